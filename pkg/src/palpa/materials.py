"""Per-vertex RGB codes interpreted as material parameters.

Channel assignment: R maps affinely onto stiffness [k_min, k_max] N/m,
G onto damping [b_min, b_max] N*s/m, B is reserved. Darker therefore means
softer, which keeps baked maps visually inspectable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidBarycentric, RangeError
from .mesh import TriMesh

BARY_SUM_TOL = 1e-9


@dataclass(frozen=True)
class MaterialRange:
    """Affine mapping bounds from [0,1] channel codes to physical units.

    k is stiffness in N/m (R channel), b is damping in N*s/m (G channel).
    """

    k_min: float = 50.0
    k_max: float = 400.0
    b_min: float = 0.0
    b_max: float = 2.0

    def __post_init__(self):
        if not (0.0 <= self.k_min <= self.k_max):
            raise RangeError(f"stiffness bounds need 0 <= k_min <= k_max, got [{self.k_min}, {self.k_max}]")
        if not (0.0 <= self.b_min <= self.b_max):
            raise RangeError(f"damping bounds need 0 <= b_min <= b_max, got [{self.b_min}, {self.b_max}]")


@dataclass(frozen=True)
class MaterialPoint:
    """Material sampled at one surface point: stiffness k (N/m), damping b (N*s/m)."""

    k: float
    b: float


def material_at(mesh: TriMesh, range: MaterialRange, triangle: int, bary) -> MaterialPoint:
    """Sample the material map at a barycentric point of one triangle.

    R and G are interpolated barycentrically over the triangle's vertices,
    then mapped affinely onto [k_min, k_max] and [b_min, b_max]. B is ignored.

    Raises:
        InvalidBarycentric: components negative or not summing to 1 within 1e-9.
    """
    bary = np.asarray(bary, dtype=np.float64)
    if bary.shape != (3,):
        raise InvalidBarycentric(f"need 3 barycentric components, got shape {bary.shape}")
    if np.any(bary < 0.0):
        raise InvalidBarycentric(f"negative barycentric component in {bary.tolist()}")
    if abs(float(bary.sum()) - 1.0) > BARY_SUM_TOL:
        raise InvalidBarycentric(f"barycentric components sum to {bary.sum()!r}, not 1")

    idx = mesh.triangles[triangle]
    rgb = mesh.vertex_rgb[idx]  # (3 vertices, 3 channels)
    r = float(bary @ rgb[:, 0])
    g = float(bary @ rgb[:, 1])
    k = range.k_min + r * (range.k_max - range.k_min)
    b = range.b_min + g * (range.b_max - range.b_min)
    return MaterialPoint(k=k, b=b)


def bake_uniform(mesh: TriMesh, r: float, g: float) -> TriMesh:
    """Constant material everywhere: every vertex gets (r, g, 0)."""
    if not (0.0 <= r <= 1.0 and 0.0 <= g <= 1.0):
        raise RangeError(f"uniform channels must lie in [0, 1], got r={r} g={g}")
    rgb = np.zeros((mesh.n_vertices, 3))
    rgb[:, 0] = r
    rgb[:, 1] = g
    return mesh.with_rgb(rgb)


def bake_radial_spot(mesh: TriMesh, center, radius: float,
                     inner_r: float, inner_g: float) -> TriMesh:
    """Blend a soft circular region into the existing map.

    Vertices within Euclidean distance `radius` of `center` are blended with
    smoothstep(d/radius): (inner_r, inner_g) at the center, the pre-existing
    value at the rim. Vertices at or beyond the radius are untouched.
    """
    if radius <= 0:
        raise RangeError(f"spot radius must be positive, got {radius}")
    if not (0.0 <= inner_r <= 1.0 and 0.0 <= inner_g <= 1.0):
        raise RangeError(f"inner channels must lie in [0, 1], got ({inner_r}, {inner_g})")
    center = np.asarray(center, dtype=np.float64).reshape(3)

    d = np.linalg.norm(mesh.vertices - center, axis=1)
    inside = d < radius
    t = d[inside] / radius
    s = t * t * (3.0 - 2.0 * t)  # smoothstep, s(0)=0 at center, s(1)=1 at rim

    rgb = mesh.vertex_rgb.copy()
    rgb[inside, 0] = inner_r + (rgb[inside, 0] - inner_r) * s
    rgb[inside, 1] = inner_g + (rgb[inside, 1] - inner_g) * s
    return mesh.with_rgb(rgb)


def bake_nodular(mesh: TriMesh, base_r: float, noise_amplitude: float,
                 noise_scale: float, seed: int) -> TriMesh:
    """Nodular stiffness field: R = base_r + amplitude * value-noise(pos/scale).

    The noise is seeded lattice value noise in [-1, 1], so base_r +/- amplitude
    must stay inside [0, 1]. Deterministic for a fixed seed. G is untouched.
    """
    if noise_amplitude < 0:
        raise RangeError(f"noise amplitude must be >= 0, got {noise_amplitude}")
    if noise_scale <= 0:
        raise RangeError(f"noise scale must be positive, got {noise_scale}")
    if base_r - noise_amplitude < 0.0 or base_r + noise_amplitude > 1.0:
        raise RangeError(
            f"base_r +/- amplitude must stay in [0, 1], got {base_r} +/- {noise_amplitude}")

    noise = value_noise3(mesh.vertices / noise_scale, seed)
    rgb = mesh.vertex_rgb.copy()
    rgb[:, 0] = np.clip(base_r + noise_amplitude * noise, 0.0, 1.0)
    return mesh.with_rgb(rgb)


# --- seeded lattice value noise --------------------------------------------

_MIX1 = np.uint64(0x9E3779B97F4A7C15)
_MIX2 = np.uint64(0xC2B2AE3D27D4EB4F)
_MIX3 = np.uint64(0x165667B19E3779F9)


def _hash_lattice(ix, iy, iz, seed: int) -> np.ndarray:
    """Integer lattice corners -> uniform floats in [-1, 1). Platform-stable."""
    # seed mixing in Python ints: wraparound is intended, and numpy warns
    # on scalar uint64 overflow
    seed_mix = np.uint64((seed * 0xC2B2AE3D27D4EB4F) & 0xFFFFFFFFFFFFFFFF)
    h = (ix.astype(np.uint64) * _MIX1) ^ (iy.astype(np.uint64) * _MIX2) \
        ^ (iz.astype(np.uint64) * _MIX3) ^ seed_mix
    h ^= h >> np.uint64(30)
    h *= np.uint64(0xBF58476D1CE4E5B9)
    h ^= h >> np.uint64(27)
    h *= np.uint64(0x94D049BB133111EB)
    h ^= h >> np.uint64(31)
    return (h >> np.uint64(11)).astype(np.float64) * (2.0 / 2**53) - 1.0


def value_noise3(points: np.ndarray, seed: int) -> np.ndarray:
    """Trilinear lattice value noise over (N, 3) points, range [-1, 1]."""
    p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    i0 = np.floor(p).astype(np.int64)
    f = p - i0
    u = f * f * (3.0 - 2.0 * f)  # smooth fade per axis

    def corner(dx, dy, dz):
        return _hash_lattice(i0[:, 0] + dx, i0[:, 1] + dy, i0[:, 2] + dz, seed)

    c000 = corner(0, 0, 0); c100 = corner(1, 0, 0)
    c010 = corner(0, 1, 0); c110 = corner(1, 1, 0)
    c001 = corner(0, 0, 1); c101 = corner(1, 0, 1)
    c011 = corner(0, 1, 1); c111 = corner(1, 1, 1)

    x00 = c000 + (c100 - c000) * u[:, 0]
    x10 = c010 + (c110 - c010) * u[:, 0]
    x01 = c001 + (c101 - c001) * u[:, 0]
    x11 = c011 + (c111 - c011) * u[:, 0]
    y0 = x00 + (x10 - x00) * u[:, 1]
    y1 = x01 + (x11 - x01) * u[:, 1]
    return y0 + (y1 - y0) * u[:, 2]
