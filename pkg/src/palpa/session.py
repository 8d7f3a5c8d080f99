"""Incremental palpation session: poses in, servo ticks and a trace out.

A Session is the stateful counterpart of timeline.run_ticks. Poses arrive
one at a time (from a socket client or a script) and the engine advances
the 1 kHz servo from the previous pose's grid tick to the new one, using
the same integer-grid interpolation as offline replay. Every 10th tick is
kept as a 100 Hz trace sample, so a session fed poses on the 100 Hz grid
records a trace whose replay is bit-identical to the live run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assessment import Thresholds, analyze, segment_taps
from .deformation import DisplacementQuery, KernelParams, displacement_field
from .haptics import SERVO_DT, ServoOutput, ToolState, servo_step
from .materials import MaterialRange
from .mesh import TriMesh
from .recorder import RECORD_DECIMATION, ForceSample, Trace, TraceHeader
from .timeline import grid_index, interp_tool


@dataclass(frozen=True)
class TickResult:
    tick: int
    tool: ToolState
    output: ServoOutput


class Session:
    """Feeds tool poses into the servo and accumulates a 100 Hz trace."""

    def __init__(self, mesh: TriMesh, material_range: MaterialRange,
                 kernel: KernelParams, mesh_name: str = "", preset: str = "",
                 thresholds: Thresholds | None = None, dt: float = SERVO_DT):
        self.mesh = mesh
        self.material_range = material_range
        self.kernel = kernel
        self.thresholds = thresholds if thresholds is not None else Thresholds()
        self.dt = dt
        self._header = TraceHeader(mesh_name=mesh_name, preset=preset,
                                   material_range=material_range, kernel=kernel)
        self._t0 = None
        self._last_pose: ToolState | None = None
        self._last_tick = -1
        self._previous_contact = None
        self._last_result: TickResult | None = None
        self._samples: list[ForceSample] = []
        self._sample_mags: list[float] = []
        self._taps_reported = 0

    @property
    def started(self) -> bool:
        return self._t0 is not None

    @property
    def last_result(self) -> TickResult | None:
        return self._last_result

    @property
    def last_tick(self) -> int:
        return self._last_tick

    @property
    def samples(self) -> list[ForceSample]:
        return self._samples

    def feed(self, tool: ToolState) -> list[TickResult]:
        """Advance the servo to this pose's grid tick; returns the new ticks.

        The first pose anchors tick 0. A pose less than one tick after the
        previous one is stale and ignored (returns no ticks); poses farther
        apart fill the gap by interpolation, exactly like offline replay.
        """
        if self._t0 is None:
            self._t0 = tool.t
            self._last_pose = tool
            self._last_tick = 0
            return self._run_ticks([(0, tool)])
        g = grid_index(tool.t, self._t0, self.dt)
        if g <= self._last_tick:
            return []
        g_prev, prev = self._last_tick, self._last_pose
        ticks = []
        for j in range(g_prev + 1, g):
            alpha = (j - g_prev) / (g - g_prev)
            ticks.append((j, interp_tool(prev, tool, alpha, t=self._t0 + j * self.dt)))
        ticks.append((g, tool))
        self._last_pose = tool
        self._last_tick = g
        return self._run_ticks(ticks)

    def _run_ticks(self, ticks) -> list[TickResult]:
        results = []
        for j, tool in ticks:
            out = servo_step(self.mesh, self.material_range, tool,
                             previous=self._previous_contact, dt=self.dt)
            self._previous_contact = out.contact
            result = TickResult(tick=j, tool=tool, output=out)
            self._last_result = result
            results.append(result)
            if j % RECORD_DECIMATION == 0:
                contact = out.contact is not None
                self._samples.append(ForceSample(
                    t=tool.t, position=tool.position, orientation=tool.orientation,
                    velocity=tool.velocity, force=out.force, contact=contact,
                    penetration=out.contact.penetration if contact else 0.0))
                self._sample_mags.append(float(np.linalg.norm(out.force)))
        return results

    def deformation(self, result: TickResult | None = None) -> dict[int, np.ndarray]:
        """Sparse visual displacement for the current (or given) tick."""
        result = result if result is not None else self._last_result
        if result is None or result.output.contact is None:
            return {}
        contact = result.output.contact
        query = DisplacementQuery(contact_point=contact.proxy,
                                  contact_normal=contact.normal,
                                  penetration=contact.penetration,
                                  params=self.kernel)
        return displacement_field(self.mesh, query)

    def completed_taps(self) -> list[tuple[int, int]]:
        """Closed taps so far, over the 100 Hz samples recorded to date."""
        taps = segment_taps(self._sample_mags, self.thresholds)
        if taps and taps[-1][1] == len(self._sample_mags):
            mag = self._sample_mags[-1]
            if mag >= self.thresholds.f_off:
                taps = taps[:-1]  # still pressing, tap not closed yet
        return taps

    def new_taps(self) -> list[tuple[int, int]]:
        """Taps closed since the last call (for incremental map updates)."""
        taps = self.completed_taps()
        fresh = taps[self._taps_reported:]
        self._taps_reported = len(taps)
        return fresh

    def trace(self) -> Trace:
        return Trace(header=self._header, samples=tuple(self._samples))

    def report(self):
        return analyze(self.trace(), self.thresholds)
