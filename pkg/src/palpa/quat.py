"""Unit quaternion helpers, (w, x, y, z) convention."""

from __future__ import annotations

import math

import numpy as np

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def normalize(q) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64).reshape(4)
    n = math.sqrt(float(q @ q))
    if n == 0:
        raise ValueError("cannot normalize a zero quaternion")
    return q / n


def from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=np.float64).reshape(3)
    axis = axis / np.linalg.norm(axis)
    h = 0.5 * angle
    return np.concatenate(([math.cos(h)], math.sin(h) * axis))


def rotate_vec(q, v) -> np.ndarray:
    """Apply the rotation q to a 3-vector."""
    q = np.asarray(q, dtype=np.float64).reshape(4)
    v = np.asarray(v, dtype=np.float64).reshape(3)
    w, xyz = q[0], q[1:]
    t = 2.0 * np.cross(xyz, v)
    return v + w * t + np.cross(xyz, t)


def slerp(q0, q1, alpha: float) -> np.ndarray:
    """Spherical interpolation along the shorter arc; exact at the endpoints."""
    q0 = np.asarray(q0, dtype=np.float64).reshape(4)
    q1 = np.asarray(q1, dtype=np.float64).reshape(4)
    if alpha == 0.0:
        return q0.copy()
    if alpha == 1.0:
        return q1.copy()
    dot = float(q0 @ q1)
    sign = 1.0
    if dot < 0.0:
        dot, sign = -dot, -1.0
    if dot > 1.0 - 1e-12:
        out = q0 + alpha * (sign * q1 - q0)  # nearly parallel: lerp is stable
        return out / np.linalg.norm(out)
    theta = math.acos(min(dot, 1.0))
    s = math.sin(theta)
    a = math.sin((1.0 - alpha) * theta) / s
    b = math.sin(alpha * theta) / s * sign
    return a * q0 + b * q1
