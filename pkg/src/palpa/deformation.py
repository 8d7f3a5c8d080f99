"""Localized Gaussian visual deformation around a contact point.

The dent is purely visual: penetration depth scales the peak displacement
and lateral distance from the contact point feeds the Gaussian, so

    displacement(v) = -normal * depth * a * exp(-|v - p|^2 / w^2)

A wider kernel width w gives a wider dent, a larger amplitude a a deeper
one. The field never feeds back into the force computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .mesh import TriMesh


@dataclass(frozen=True)
class KernelParams:
    """Gaussian dent parameters.

    a: dimensionless gain on penetration depth (peak displacement = a * depth).
    w: kernel width in meters (lateral e-folding distance).
    cutoff_eps: displacement floor in meters below which vertices are omitted
        from the sparse field; a pure performance/size knob.
    """

    a: float = 1.0
    w: float = 0.02
    cutoff_eps: float = 1e-5

    def __post_init__(self):
        if self.a <= 0:
            raise DomainError(f"kernel amplitude must be positive, got {self.a}")
        if self.w <= 0:
            raise DomainError(f"kernel width must be positive, got {self.w}")
        if self.cutoff_eps < 0:
            raise DomainError(f"cutoff must be >= 0, got {self.cutoff_eps}")


@dataclass(frozen=True)
class DisplacementQuery:
    """One contact to render: where, which way is out, and how deep."""

    contact_point: np.ndarray
    contact_normal: np.ndarray
    penetration: float
    params: KernelParams = field(default_factory=KernelParams)

    def __post_init__(self):
        p = np.asarray(self.contact_point, dtype=np.float64).reshape(3)
        n = np.asarray(self.contact_normal, dtype=np.float64).reshape(3)
        object.__setattr__(self, "contact_point", p)
        object.__setattr__(self, "contact_normal", n)
        if self.penetration < 0:
            raise DomainError(f"penetration must be >= 0, got {self.penetration}")
        if abs(np.linalg.norm(n) - 1.0) > 1e-6:
            raise DomainError("contact_normal must be unit length")


def gauss_kernel(d, a: float, w: float):
    """Gaussian attenuation a * exp(-d^2 / w^2).

    Exactly a at d = 0 and strictly decreasing in d. Accepts a scalar or an
    array of lateral distances (meters).
    """
    if w <= 0:
        raise DomainError(f"kernel width must be positive, got {w}")
    d = np.asarray(d, dtype=np.float64)
    if np.any(d < 0):
        raise DomainError("lateral distance must be >= 0")
    out = a * np.exp(-(d * d) / (w * w))
    return float(out) if out.ndim == 0 else out


def displacement_field(mesh: TriMesh, query: DisplacementQuery) -> dict[int, np.ndarray]:
    """Sparse per-vertex dent displacements for one contact.

    Every vertex whose displacement magnitude reaches params.cutoff_eps gets
    an inward vector -normal * penetration * gauss_kernel(lateral distance);
    all others are omitted. Magnitude >= cutoff_eps is equivalent to lateral
    distance <= w * sqrt(ln(a * depth / cutoff_eps)), the cutoff radius; the
    magnitude form is used directly so inclusion matches a dense evaluation
    bit for bit. Zero penetration yields an empty field.
    """
    dx = query.penetration
    if dx == 0.0:
        return {}
    params = query.params
    if params.a * dx < params.cutoff_eps:
        return {}  # even the peak displacement is below the floor

    d = np.linalg.norm(mesh.vertices - query.contact_point, axis=1)
    mag = dx * gauss_kernel(d, params.a, params.w)
    keep = np.nonzero(mag >= params.cutoff_eps)[0]
    direction = -query.contact_normal
    return {int(i): direction * mag[i] for i in keep}


def cutoff_radius(params: KernelParams, penetration: float) -> float:
    """Lateral distance at which the dent magnitude falls to cutoff_eps."""
    if params.cutoff_eps == 0:
        return math.inf
    peak = params.a * penetration
    if peak < params.cutoff_eps:
        return 0.0
    return params.w * math.sqrt(math.log(peak / params.cutoff_eps))
