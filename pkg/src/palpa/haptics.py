"""Tool/surface contact resolution and the spring-damper force law.

The tool tip is a point. A proxy is kept on the surface; the gap between
proxy and tool tip is the penetration depth, and the reaction is

    F = max(0, k * depth - b * v_out) * n

with k, b sampled from the vertex material map at the contact and v_out the
tool's outward normal velocity, so pressing deeper raises the force,
retracting lowers it, and the clamp forbids the surface ever pulling.

Contact search is a global nearest-point query over all triangles; when a
previous contact is known the search is first restricted to the 2-ring patch
around it (proxy sliding) and only falls back to the global query when the
local minimum lands on the patch rim. Inside/outside is decided by the sign
of (tool - proxy) against the nearest triangle's face normal, ties broken by
the smallest triangle index so replays are total-ordered.
"""

from __future__ import annotations

import time
import weakref
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError
from .materials import MaterialPoint, MaterialRange, material_at
from .mesh import TriMesh, face_normals

SERVO_DT = 1e-3  # fixed 1 kHz step


@dataclass(frozen=True, eq=False)
class ToolState:
    """Tool pose at one instant: time, position (m), unit quaternion, velocity (m/s)."""

    t: float
    position: np.ndarray
    orientation: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.position, dtype=np.float64).reshape(3)
        q = np.asarray(self.orientation, dtype=np.float64).reshape(4)
        v = np.asarray(self.velocity, dtype=np.float64).reshape(3)
        if abs(float(np.linalg.norm(q)) - 1.0) > 1e-6:
            raise ValueError(f"orientation quaternion must be unit length, |q| = {np.linalg.norm(q)!r}")
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "orientation", q)
        object.__setattr__(self, "velocity", v)


@dataclass(frozen=True, eq=False)
class ContactState:
    """Resolved contact: triangle, barycentric proxy, outward normal, depth."""

    triangle: int
    bary: np.ndarray
    proxy: np.ndarray
    normal: np.ndarray
    penetration: float
    material: MaterialPoint | None = None


@dataclass(frozen=True, eq=False)
class ServoOutput:
    """One 1 kHz servo tick: reaction force, contact (if any), measured wall time."""

    force: np.ndarray
    contact: ContactState | None
    step_duration: float = field(compare=False, default=0.0)


class SurfaceIndex:
    """Per-mesh acceleration data for nearest-point queries.

    Precomputes triangle corner arrays, unit face normals, and triangle
    adjacency (sharing a vertex). Patches for proxy sliding are cached on
    demand. Read-only after construction, safe to share between sessions.
    """

    def __init__(self, mesh: TriMesh):
        self.mesh = mesh
        tri = mesh.triangles
        v = mesh.vertices
        self.corner_a = v[tri[:, 0]]
        self.corner_b = v[tri[:, 1]]
        self.corner_c = v[tri[:, 2]]
        self.face_n = face_normals(v, tri)

        vert_tris: list[list[int]] = [[] for _ in range(mesh.n_vertices)]
        for ti, (i, j, k) in enumerate(tri.tolist()):
            vert_tris[i].append(ti)
            vert_tris[j].append(ti)
            vert_tris[k].append(ti)
        self._vert_tris = vert_tris
        self._ring1: list[np.ndarray | None] = [None] * mesh.n_triangles
        self._patches: dict[int, tuple[frozenset, np.ndarray]] = {}

    def ring1(self, ti: int) -> np.ndarray:
        """Triangle ids sharing a vertex with ti, self included, sorted."""
        cached = self._ring1[ti]
        if cached is None:
            ids = set()
            for vi in self.mesh.triangles[ti]:
                ids.update(self._vert_tris[vi])
            cached = np.array(sorted(ids), dtype=np.intp)
            self._ring1[ti] = cached
        return cached

    def patch(self, ti: int) -> tuple[frozenset, np.ndarray]:
        """(inner id set, all candidate ids) for the 2-ring around ti.

        The inner set is the 1-ring; a local search result is only trusted
        when its triangle lies there, i.e. strictly inside the candidate set.
        """
        hit = self._patches.get(ti)
        if hit is None:
            inner = self.ring1(ti)
            ids = set(inner.tolist())
            for t in inner.tolist():
                ids.update(self.ring1(t).tolist())
            hit = (frozenset(inner.tolist()), np.array(sorted(ids), dtype=np.intp))
            self._patches[ti] = hit
        return hit

    def closest(self, point: np.ndarray, ids: np.ndarray | None = None):
        """Nearest surface point among the given triangles (all when None).

        Returns (triangle id, proxy point, barycentric coords, squared
        distance). Ties resolve to the smallest triangle id because candidate
        ids are sorted and argmin takes the first minimum.
        """
        if ids is None:
            a, b, c = self.corner_a, self.corner_b, self.corner_c
        else:
            a, b, c = self.corner_a[ids], self.corner_b[ids], self.corner_c[ids]
        bary, pts = _closest_point_on_triangles(point, a, b, c)
        delta = point - pts
        d2 = np.einsum("ij,ij->i", delta, delta)
        j = int(np.argmin(d2))
        ti = j if ids is None else int(ids[j])
        return ti, pts[j], bary[j], float(d2[j])


_surface_cache: "weakref.WeakKeyDictionary[TriMesh, SurfaceIndex]" = weakref.WeakKeyDictionary()


def surface_index(mesh: TriMesh) -> SurfaceIndex:
    idx = _surface_cache.get(mesh)
    if idx is None:
        idx = SurfaceIndex(mesh)
        _surface_cache[mesh] = idx
    return idx


def _closest_point_on_triangles(p, a, b, c):
    """Closest point to p on each triangle (a, b, c), vectorized.

    Region classification after Ericson's real-time collision detection
    construction; all divisors are edge lengths squared or twice the squared
    area, both positive for the non-degenerate triangles loaders admit.
    """
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = p - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = p - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)

    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    at_a = (d1 <= 0) & (d2 <= 0)
    at_b = (d3 >= 0) & (d4 <= d3)
    at_c = (d6 >= 0) & (d5 <= d6)
    on_ab = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
    on_ac = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
    on_bc = (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)

    with np.errstate(divide="ignore", invalid="ignore"):
        t_ab = d1 / (d1 - d3)
        t_ac = d2 / (d2 - d6)
        t_bc = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        denom = va + vb + vc
        v_in = vb / denom
        w_in = vc / denom

    masks = [at_a, at_b, at_c, on_ab, on_ac, on_bc]
    zeros = np.zeros_like(d1)
    ones = np.ones_like(d1)
    v = np.select(masks, [zeros, ones, zeros, t_ab, zeros, 1.0 - t_bc], default=v_in)
    w = np.select(masks, [zeros, zeros, ones, zeros, t_ac, t_bc], default=w_in)
    u = 1.0 - v - w
    # interior coordinates can round to -1e-17; material interpolation
    # requires non-negative weights, and the sum stays within 1e-15 of 1
    bary = np.maximum(np.stack([u, v, w], axis=1), 0.0)
    pts = a + ab * v[:, None] + ac * w[:, None]
    return bary, pts


def resolve_contact(mesh: TriMesh, tool_position, previous: ContactState | None = None
                    ) -> ContactState | None:
    """Proxy contact between a point tool and the mesh surface.

    Returns None when the tool sits on the positive side of the nearest
    triangle (free space); otherwise the proxy is the nearest surface point
    and penetration its distance to the tool. Material is left unsampled.
    """
    idx = surface_index(mesh)
    p = np.asarray(tool_position, dtype=np.float64).reshape(3)

    hit = None
    if previous is not None and 0 <= previous.triangle < mesh.n_triangles:
        inner, candidates = idx.patch(previous.triangle)
        ti, proxy, bary, d2 = idx.closest(p, candidates)
        if ti in inner:
            hit = (ti, proxy, bary, d2)  # local minimum away from the rim: trust it
    if hit is None:
        hit = idx.closest(p)

    ti, proxy, bary, d2 = hit
    normal = idx.face_n[ti]
    if float((p - proxy) @ normal) > 0.0:
        return None
    return ContactState(triangle=ti, bary=bary, proxy=proxy, normal=normal,
                        penetration=float(np.sqrt(d2)), material=None)


def compute_force(contact: ContactState, tool_velocity) -> np.ndarray:
    """Spring-damper reaction along the contact normal, clamped at zero.

    With b = 0 the magnitude is exactly k * penetration; damping acts on the
    outward normal velocity only, so retracting reduces the force and the
    surface never pulls the tool in.
    """
    if contact.material is None:
        raise ValueError("contact carries no sampled material; run it through servo_step")
    v = np.asarray(tool_velocity, dtype=np.float64).reshape(3)
    v_out = float(v @ contact.normal)
    magnitude = contact.material.k * contact.penetration - contact.material.b * v_out
    if magnitude <= 0.0:
        return np.zeros(3)
    return magnitude * contact.normal


def servo_step(mesh: TriMesh, range: MaterialRange, tool: ToolState,
               previous: ContactState | None = None, dt: float = SERVO_DT) -> ServoOutput:
    """One fixed-step servo tick: contact, material sample, reaction force.

    Deterministic: identical inputs give bit-identical force and contact
    (step_duration is measured wall time and excluded from comparisons).
    """
    if abs(dt - SERVO_DT) > 1e-12:
        raise DomainError(f"servo step is fixed at {SERVO_DT} s, got {dt}")
    t0 = time.perf_counter()
    contact = resolve_contact(mesh, tool.position, previous)
    if contact is None:
        force = np.zeros(3)
    else:
        mat = material_at(mesh, range, contact.triangle, contact.bary)
        contact = replace(contact, material=mat)
        force = compute_force(contact, tool.velocity)
    return ServoOutput(force=force, contact=contact,
                       step_duration=time.perf_counter() - t0)
