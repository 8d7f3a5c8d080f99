"""Session traces: 100 Hz recording, JSONL persistence, deterministic replay.

A trace stores every 10th servo tick (the servo runs at 1 kHz, the trace at
100 Hz) together with enough header context to rebuild the session: mesh
name, preset name, material range, kernel parameters. Floats are written
with full repr precision so a save/load cycle is lossless, and replay feeds
the recorded poses back through the same grid upsampler the live session
uses, which makes replayed forces match the original run bit for bit at
every recorded instant.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .deformation import KernelParams
from .errors import SchemaError, VersionError
from .haptics import SERVO_DT, ServoOutput, ToolState
from .materials import MaterialRange
from .mesh import TriMesh
from .timeline import run_ticks

TRACE_FORMAT = "palpa-trace"
TRACE_VERSION = 1
RECORD_DECIMATION = 10
RECORD_DT = SERVO_DT * RECORD_DECIMATION


@dataclass(frozen=True)
class TraceHeader:
    mesh_name: str
    preset: str
    material_range: MaterialRange
    kernel: KernelParams
    version: int = TRACE_VERSION


@dataclass(frozen=True, eq=False)
class ForceSample:
    """One recorded instant: tool pose plus the servo's response."""
    t: float
    position: np.ndarray
    orientation: np.ndarray
    velocity: np.ndarray
    force: np.ndarray
    contact: bool
    penetration: float

    def __post_init__(self):
        for name in ("position", "velocity", "force"):
            a = np.asarray(getattr(self, name), dtype=np.float64)
            if a.shape != (3,):
                raise SchemaError(f"sample field {name!r} must be a 3-vector")
            object.__setattr__(self, name, a)
        q = np.asarray(self.orientation, dtype=np.float64)
        if q.shape != (4,):
            raise SchemaError("sample orientation must be a quaternion (w, x, y, z)")
        object.__setattr__(self, "orientation", q)

    def tool_state(self) -> ToolState:
        return ToolState(t=self.t, position=self.position,
                         orientation=self.orientation, velocity=self.velocity)


@dataclass(frozen=True)
class Trace:
    header: TraceHeader
    samples: tuple = ()

    @property
    def duration(self) -> float:
        if len(self.samples) < 2:
            return 0.0
        return self.samples[-1].t - self.samples[0].t


def record(stream: Iterable[tuple[ToolState, ServoOutput]], header: TraceHeader) -> Trace:
    """Decimate a servo stream to 100 Hz and package it as a trace.

    The stream yields (tool state, servo output) once per 1 kHz tick; every
    10th tick is kept, starting with the first.
    """
    samples = []
    for k, (tool, out) in enumerate(stream):
        if k % RECORD_DECIMATION != 0:
            continue
        contact = out.contact is not None
        samples.append(ForceSample(
            t=tool.t,
            position=tool.position,
            orientation=tool.orientation,
            velocity=tool.velocity,
            force=out.force,
            contact=contact,
            penetration=out.contact.penetration if contact else 0.0,
        ))
    return Trace(header=header, samples=tuple(samples))


def validate_trace(trace: Trace) -> list[str]:
    """Invariant check; returns human-readable problems, empty when clean."""
    problems = []
    prev_t = None
    for i, s in enumerate(trace.samples):
        vals = [s.t, s.penetration, *s.position, *s.orientation, *s.velocity, *s.force]
        if not all(math.isfinite(v) for v in vals):
            problems.append(f"sample {i}: non-finite value")
            continue
        if prev_t is not None and s.t <= prev_t:
            problems.append(f"sample {i}: time {s.t} does not increase past {prev_t}")
        steps = (s.t - trace.samples[0].t) / RECORD_DT
        if abs(steps - round(steps)) > 1e-6:
            problems.append(f"sample {i}: time {s.t} is off the 100 Hz grid")
        if not s.contact:
            if s.penetration != 0.0 or np.any(s.force != 0.0):
                problems.append(f"sample {i}: free-space sample carries force or depth")
        elif s.penetration < 0.0:
            problems.append(f"sample {i}: negative penetration depth")
        prev_t = s.t
    return problems


def _header_dict(h: TraceHeader) -> dict:
    return {
        "format": TRACE_FORMAT,
        "version": h.version,
        "mesh": h.mesh_name,
        "preset": h.preset,
        "material_range": {"k_min": h.material_range.k_min, "k_max": h.material_range.k_max,
                           "b_min": h.material_range.b_min, "b_max": h.material_range.b_max},
        "kernel": {"a": h.kernel.a, "w": h.kernel.w, "cutoff_eps": h.kernel.cutoff_eps},
    }


def _sample_dict(s: ForceSample) -> dict:
    return {
        "t": s.t,
        "p": s.position.tolist(),
        "q": s.orientation.tolist(),
        "v": s.velocity.tolist(),
        "f": s.force.tolist(),
        "c": s.contact,
        "dx": s.penetration,
    }


def save_trace(trace: Trace, path) -> None:
    """Write a trace as JSONL: one header object, then one line per sample."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(_header_dict(trace.header), separators=(",", ":")))
        fh.write("\n")
        for s in trace.samples:
            fh.write(json.dumps(_sample_dict(s), separators=(",", ":")))
            fh.write("\n")


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise SchemaError(f"{where} is missing {key!r}")
    return obj[key]


def load_trace(path) -> Trace:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise SchemaError(f"{path} is empty")
    try:
        head = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: bad header line: {exc}") from exc
    if not isinstance(head, dict) or head.get("format") != TRACE_FORMAT:
        raise SchemaError(f"{path}: not a {TRACE_FORMAT} file")
    version = _require(head, "version", "trace header")
    if version != TRACE_VERSION:
        raise VersionError(f"{path}: unsupported trace version {version!r}")
    try:
        mr = _require(head, "material_range", "trace header")
        kp = _require(head, "kernel", "trace header")
        header = TraceHeader(
            mesh_name=_require(head, "mesh", "trace header"),
            preset=_require(head, "preset", "trace header"),
            material_range=MaterialRange(k_min=mr["k_min"], k_max=mr["k_max"],
                                         b_min=mr["b_min"], b_max=mr["b_max"]),
            kernel=KernelParams(a=kp["a"], w=kp["w"], cutoff_eps=kp["cutoff_eps"]),
            version=version,
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"{path}: malformed trace header: {exc}") from exc
    samples = []
    for n, line in enumerate(lines[1:], start=2):
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}:{n}: bad sample line: {exc}") from exc
        if not isinstance(rec, dict):
            raise SchemaError(f"{path}:{n}: sample line is not an object")
        try:
            samples.append(ForceSample(
                t=float(_require(rec, "t", f"sample line {n}")),
                position=rec["p"], orientation=rec["q"], velocity=rec["v"],
                force=rec["f"], contact=bool(rec["c"]),
                penetration=float(rec["dx"]),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}:{n}: malformed sample: {exc}") from exc
    trace = Trace(header=header, samples=tuple(samples))
    problems = validate_trace(trace)
    if problems:
        raise SchemaError(f"{path}: " + "; ".join(problems[:5]))
    return trace


def replay_full(trace: Trace, mesh: TriMesh, material_range: MaterialRange | None = None,
                dt: float = SERVO_DT) -> tuple[list[ToolState], list[ServoOutput]]:
    """Re-run the servo over a trace; returns the tick states and outputs.

    The recorded 100 Hz poses go through the same upsampler the live session
    uses, so tick j of the replay sees the exact pose tick j of the original
    session saw (recorded samples land on ticks 0, 10, 20, ...).
    """
    rng = material_range if material_range is not None else trace.header.material_range
    poses = [s.tool_state() for s in trace.samples]
    return run_ticks(mesh, rng, poses, dt)


def replay(trace: Trace, mesh: TriMesh, material_range: MaterialRange | None = None,
           dt: float = SERVO_DT) -> list[ServoOutput]:
    """Deterministic re-execution of a recorded session against a mesh."""
    return replay_full(trace, mesh, material_range, dt)[1]


def save_full_rate(states: Sequence[ToolState], outputs: Sequence[ServoOutput], path) -> None:
    """Dump per-tick replay results (1 kHz, not decimated) as JSONL."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"format": "palpa-replay", "version": 1,
                             "rate_hz": 1000.0}, separators=(",", ":")))
        fh.write("\n")
        for tool, out in zip(states, outputs):
            contact = out.contact is not None
            fh.write(json.dumps({
                "t": tool.t,
                "f": out.force.tolist(),
                "c": contact,
                "dx": out.contact.penetration if contact else 0.0,
            }, separators=(",", ":")))
            fh.write("\n")
