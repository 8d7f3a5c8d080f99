"""Force maps: one cone glyph per palpation tap.

Each tap in a trace leaves a cone at the spot on the organ surface where
its peak force occurred. The cone's apex sits at the contact point, its
axis follows the recorded force direction, and both its height and base
radius grow linearly with the peak magnitude, so twice the force draws a
cone exactly twice as large. Cones export to a JSONL file for reload and
to an OBJ mesh for rendering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .assessment import DEFAULT_THRESHOLDS, Thresholds, segment_taps
from .errors import DomainError, SchemaError, VersionError
from .recorder import Trace

FORCEMAP_FORMAT = "palpa-forcemap"
FORCEMAP_VERSION = 1


@dataclass(frozen=True)
class ConeScale:
    """Linear force-to-geometry gains, in metres per Newton."""
    height_per_newton: float = 0.012
    radius_per_newton: float = 0.004

    def __post_init__(self):
        if self.height_per_newton <= 0 or self.radius_per_newton <= 0:
            raise DomainError("cone scale gains must be positive")


DEFAULT_CONE_SCALE = ConeScale()


@dataclass(frozen=True, eq=False)
class Cone:
    apex: np.ndarray
    axis: np.ndarray
    height: float
    radius: float
    peak_force: float
    t_peak: float

    def __post_init__(self):
        for name in ("apex", "axis"):
            a = np.asarray(getattr(self, name), dtype=np.float64)
            if a.shape != (3,):
                raise SchemaError(f"cone field {name!r} must be a 3-vector")
            object.__setattr__(self, name, a)


def cone_from_samples(samples, start: int, stop: int,
                      scale: ConeScale = DEFAULT_CONE_SCALE) -> Cone:
    """Cone for one tap (samples[start:stop]), anchored at its force peak.

    The contact point is recovered from the tool position by stepping back
    out of the surface along the force direction by the recorded depth, so
    no mesh is needed to draw a map.
    """
    mags = np.array([float(np.linalg.norm(samples[i].force)) for i in range(start, stop)])
    peak_idx = start + int(np.argmax(mags))
    s = samples[peak_idx]
    peak = float(mags[peak_idx - start])
    n_hat = s.force / peak
    apex = s.position + s.penetration * n_hat
    return Cone(
        apex=apex,
        axis=n_hat,
        height=scale.height_per_newton * peak,
        radius=scale.radius_per_newton * peak,
        peak_force=peak,
        t_peak=s.t,
    )


def cones_from_trace(trace: Trace, scale: ConeScale = DEFAULT_CONE_SCALE,
                     thresholds: Thresholds = DEFAULT_THRESHOLDS) -> list[Cone]:
    """Build one cone per tap in the trace."""
    samples = trace.samples
    mags = np.array([float(np.linalg.norm(s.force)) for s in samples])
    return [cone_from_samples(samples, start, stop, scale)
            for start, stop in segment_taps(mags, thresholds)]


def save_cones(cones, path, scale: ConeScale = DEFAULT_CONE_SCALE) -> None:
    """JSONL force map: header line, then one line per cone, repr floats."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({
            "format": FORCEMAP_FORMAT, "version": FORCEMAP_VERSION,
            "scale": {"height_per_newton": scale.height_per_newton,
                      "radius_per_newton": scale.radius_per_newton},
        }, separators=(",", ":")))
        fh.write("\n")
        for c in cones:
            fh.write(json.dumps({
                "apex": c.apex.tolist(), "axis": c.axis.tolist(),
                "h": c.height, "r": c.radius,
                "peak": c.peak_force, "t": c.t_peak,
            }, separators=(",", ":")))
            fh.write("\n")


def load_cones(path) -> list[Cone]:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise SchemaError(f"{path} is empty")
    try:
        head = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: bad header line: {exc}") from exc
    if not isinstance(head, dict) or head.get("format") != FORCEMAP_FORMAT:
        raise SchemaError(f"{path}: not a {FORCEMAP_FORMAT} file")
    if head.get("version") != FORCEMAP_VERSION:
        raise VersionError(f"{path}: unsupported force map version {head.get('version')!r}")
    cones = []
    for n, line in enumerate(lines[1:], start=2):
        try:
            rec = json.loads(line)
            cones.append(Cone(apex=rec["apex"], axis=rec["axis"],
                              height=float(rec["h"]), radius=float(rec["r"]),
                              peak_force=float(rec["peak"]), t_peak=float(rec["t"])))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}:{n}: malformed cone: {exc}") from exc
    return cones


def _ring_basis(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    seed = np.array([1.0, 0.0, 0.0])
    if abs(float(axis @ seed)) > 0.9:
        seed = np.array([0.0, 1.0, 0.0])
    u = np.cross(seed, axis)
    u /= np.linalg.norm(u)
    return u, np.cross(axis, u)


def cone_geometry(cone: Cone, segments: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Triangulated cone: apex vertex plus a base ring at apex + height * axis."""
    if segments < 3:
        raise DomainError("a cone needs at least 3 side segments")
    u, w = _ring_basis(cone.axis)
    center = cone.apex + cone.height * cone.axis
    theta = 2.0 * np.pi * np.arange(segments) / segments
    ring = center + cone.radius * (np.cos(theta)[:, None] * u + np.sin(theta)[:, None] * w)
    vertices = np.vstack([cone.apex[None, :], ring])
    tris = []
    for i in range(segments):
        j = (i + 1) % segments
        tris.append((0, 1 + i, 1 + j))
    for i in range(1, segments - 1):
        tris.append((1, 1 + i + 1, 1 + i))
    return vertices, np.array(tris, dtype=np.int32)


def export_obj(cones, path, segments: int = 16) -> None:
    """Write all cones into one OBJ file (vertices shared per cone only)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        base = 0
        for c in cones:
            vertices, tris = cone_geometry(c, segments)
            for row in vertices.tolist():
                fh.write(f"v {row[0]!r} {row[1]!r} {row[2]!r}\n")
            for a, b, d in tris.tolist():
                fh.write(f"f {base + a + 1} {base + b + 1} {base + d + 1}\n")
            base += len(vertices)
