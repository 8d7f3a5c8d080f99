"""Upsampling timed tool poses onto the fixed 1 kHz servo grid.

Both the live session and offline trace replay run through the same code
here, so a trace replayed against the same assets reproduces the original
servo inputs exactly at every recorded instant: a pose that lands on a grid
tick is passed through untouched, and in-between ticks interpolate with
alpha computed from integer grid indices only.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

import numpy as np

from . import quat
from .haptics import SERVO_DT, ServoOutput, ToolState, servo_step
from .materials import MaterialRange
from .mesh import TriMesh


def grid_index(t: float, t0: float, dt: float = SERVO_DT) -> int:
    return int(round((t - t0) / dt))


def interp_tool(s0: ToolState, s1: ToolState, alpha: float, t: float) -> ToolState:
    """Pose between two samples: linear position/velocity, slerp orientation."""
    if alpha == 0.0:
        return s0
    if alpha == 1.0:
        return s1
    p = s0.position + alpha * (s1.position - s0.position)
    v = s0.velocity + alpha * (s1.velocity - s0.velocity)
    q = quat.slerp(s0.orientation, s1.orientation, alpha)
    return ToolState(t=t, position=p, orientation=q, velocity=v)


def tick_states(poses: Sequence[ToolState], dt: float = SERVO_DT) -> Iterator[tuple[int, ToolState]]:
    """Yield (tick index, tool state) on the servo grid spanning the poses.

    Pose k is anchored at tick round((t_k - t_0) / dt) and yielded verbatim
    there; ticks strictly between two anchors interpolate with
    alpha = (tick - g0) / (g1 - g0). Pose times must be strictly increasing
    by at least one tick.
    """
    if not poses:
        return
    t0 = poses[0].t
    g_prev = 0
    yield 0, poses[0]
    for k in range(1, len(poses)):
        g = grid_index(poses[k].t, t0, dt)
        if g <= g_prev:
            raise ValueError(f"pose {k} is not at least one servo tick after its predecessor")
        for j in range(g_prev + 1, g):
            alpha = (j - g_prev) / (g - g_prev)
            yield j, interp_tool(poses[k - 1], poses[k], alpha, t=t0 + j * dt)
        yield g, poses[k]
        g_prev = g


def run_ticks(mesh: TriMesh, material_range: MaterialRange,
              poses: Sequence[ToolState], dt: float = SERVO_DT
              ) -> tuple[list[ToolState], list[ServoOutput]]:
    """Drive the servo over upsampled poses, chaining contact history.

    This is the one servo loop in the package: live sessions, scripted
    sessions, and trace replay all call it, which is what guarantees that a
    replayed trace revisits the original computation exactly.
    """
    states: list[ToolState] = []
    outputs: list[ServoOutput] = []
    previous = None
    for _, tool in tick_states(poses, dt):
        out = servo_step(mesh, material_range, tool, previous=previous, dt=dt)
        previous = out.contact
        states.append(tool)
        outputs.append(out)
    return states, outputs


def waypoint_poses(waypoints: Sequence[tuple[float, np.ndarray, np.ndarray]],
                   rate_hz: float = 100.0) -> list[ToolState]:
    """Expand sparse (t, position, orientation) waypoints into a pose stream.

    Emits poses on the uniform 1/rate grid from the first waypoint time to
    the last, positions interpolated linearly and orientations by slerp.
    Velocity is the slope of the surrounding waypoint segment (zero at and
    after the final waypoint). Used by scripted gestures.
    """
    if not waypoints:
        return []
    if len(waypoints) == 1:
        t, p, q = waypoints[0]
        return [ToolState(t=t, position=p, orientation=q, velocity=np.zeros(3))]
    step = 1.0 / rate_hz
    t_start, t_end = waypoints[0][0], waypoints[-1][0]
    n = int(round((t_end - t_start) / step))
    poses = []
    seg = 0
    last = len(waypoints) - 2
    for m in range(n + 1):
        t = t_start + m * step
        while seg < last and t >= waypoints[seg + 1][0]:
            seg += 1
        t0, p0, q0 = waypoints[seg]
        t1, p1, q1 = waypoints[seg + 1]
        span = t1 - t0
        alpha = min(max((t - t0) / span, 0.0), 1.0)
        p = p0 + alpha * (p1 - p0)
        q = quat.slerp(q0, q1, alpha)
        v = (p1 - p0) / span
        poses.append(ToolState(t=t, position=p, orientation=q, velocity=v))
    return poses
