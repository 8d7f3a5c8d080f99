"""Scripted tool motion: a tiny waypoint language plus press generators.

Scripts drive headless sessions for demos, regression runs, and load
testing. Each non-comment line is a waypoint:

    t  x  y  z  [qw qx qy qz]

Times are seconds and must increase; the quaternion is optional and
defaults to identity (tool pointing straight down its own -z). Between
waypoints the simulated hand moves in a straight line at constant speed,
so the emitted 100 Hz pose stream has the segment slope as its velocity.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import quat
from .errors import ParseError
from .haptics import ToolState
from .timeline import waypoint_poses

POSE_RATE_HZ = 100.0


def parse_script(text: str, origin: str = "<script>") -> list[tuple[float, np.ndarray, np.ndarray]]:
    """Parse waypoint lines into (t, position, orientation) triples."""
    waypoints = []
    prev_t = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (4, 8):
            raise ParseError(f"{origin}:{ln}: expected 4 or 8 numbers, got {len(parts)}")
        try:
            nums = [float(x) for x in parts]
        except ValueError as exc:
            raise ParseError(f"{origin}:{ln}: {exc}") from exc
        t = nums[0]
        if prev_t is not None and t <= prev_t:
            raise ParseError(f"{origin}:{ln}: time {t} does not increase past {prev_t}")
        prev_t = t
        pos = np.array(nums[1:4])
        if len(nums) == 8:
            q = np.array(nums[4:8])
            norm = float(np.linalg.norm(q))
            if norm < 1e-9:
                raise ParseError(f"{origin}:{ln}: zero quaternion")
            q = q / norm
        else:
            q = quat.IDENTITY.copy()
        waypoints.append((t, pos, q))
    if not waypoints:
        raise ParseError(f"{origin}: script has no waypoints")
    return waypoints


def load_script(path) -> list[tuple[float, np.ndarray, np.ndarray]]:
    path = Path(path)
    return parse_script(path.read_text(encoding="utf-8"), origin=str(path))


def simulate(waypoints, rate_hz: float = POSE_RATE_HZ) -> list[ToolState]:
    """Expand waypoints into a uniform pose stream (default 100 Hz)."""
    return waypoint_poses(waypoints, rate_hz)


def press_cycle_waypoints(surface_point, normal, depth: float,
                          hover: float = 0.02, period: float = 1.0,
                          count: int = 5, start_t: float = 0.0,
                          drift=None) -> list[tuple[float, np.ndarray, np.ndarray]]:
    """Repeated press-release cycles against one spot on the surface.

    Each cycle lasts `period` seconds: hover above the point, push to
    `depth` below the surface along -normal at mid-cycle, pull back out.
    `drift` optionally shifts the target point per cycle (a 3-vector step),
    roughly how a human walks their fingertip across the organ.
    """
    surface_point = np.asarray(surface_point, dtype=np.float64)
    n = np.asarray(normal, dtype=np.float64)
    n = n / np.linalg.norm(n)
    step = np.zeros(3) if drift is None else np.asarray(drift, dtype=np.float64)
    q = quat.IDENTITY.copy()
    waypoints = []
    for c in range(count):
        base = surface_point + c * step
        t0 = start_t + c * period
        waypoints.append((t0, base + hover * n, q))
        waypoints.append((t0 + 0.5 * period, base - depth * n, q))
    waypoints.append((start_t + count * period, surface_point + count * step + hover * n, q))
    return waypoints
