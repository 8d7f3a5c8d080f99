"""Palpation skill scoring from recorded traces.

A session is cut into taps (press-release events on the force magnitude,
with hysteresis so sensor ripple near the threshold does not split one
press into many), then scored on three habits that separate a practiced
examiner from a beginner: steady peak force across taps, steady hand speed,
and peaks kept inside the target force band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .recorder import Trace

EXPERT = "expert"
NOVICE = "novice"
INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class Thresholds:
    """Segmentation and classification knobs, defaults tuned for traces in Newtons."""
    f_on: float = 0.5
    f_off: float = 0.3
    min_samples: int = 3
    force_cv_max: float = 0.15
    speed_cv_max: float = 0.25
    band_low: float = 2.1
    band_high: float = 2.5
    band_fraction_min: float = 0.6

    def __post_init__(self):
        if not 0.0 <= self.f_off <= self.f_on:
            raise ValueError("need 0 <= f_off <= f_on for hysteresis to latch")
        if self.min_samples < 1:
            raise ValueError("min_samples must be at least 1")
        if self.band_low > self.band_high:
            raise ValueError("force band is inverted")


DEFAULT_THRESHOLDS = Thresholds()


@dataclass(frozen=True)
class Tap:
    start: int
    stop: int
    t_start: float
    t_stop: float
    peak_force: float
    mean_force: float
    mean_speed: float


@dataclass(frozen=True)
class Report:
    taps: tuple
    force_cv: float
    speed_cv: float
    band_fraction: float
    label: str


def segment_taps(magnitudes: Sequence[float],
                 thresholds: Thresholds = DEFAULT_THRESHOLDS) -> list[tuple[int, int]]:
    """Hysteresis segmentation of a force magnitude series into taps.

    A tap opens at the first sample above f_on and closes just before the
    next sample below f_off; segments shorter than min_samples are dropped.
    A tap still open at the end of the series closes there. Returned pairs
    are half-open index ranges (start, stop).
    """
    taps = []
    open_idx = None
    n = len(magnitudes)
    for i in range(n):
        m = magnitudes[i]
        if open_idx is None:
            if m > thresholds.f_on:
                open_idx = i
        elif m < thresholds.f_off:
            if i - open_idx >= thresholds.min_samples:
                taps.append((open_idx, i))
            open_idx = None
    if open_idx is not None and n - open_idx >= thresholds.min_samples:
        taps.append((open_idx, n))
    return taps


def _variation(values: np.ndarray) -> float:
    """Population coefficient of variation; 0 when the values have no spread."""
    mean = float(np.mean(values))
    std = float(np.std(values))
    if std == 0.0:
        return 0.0
    return std / mean


def tap_metrics(trace: Trace, thresholds: Thresholds = DEFAULT_THRESHOLDS) -> list[Tap]:
    samples = trace.samples
    mags = np.array([float(np.linalg.norm(s.force)) for s in samples])
    taps = []
    for start, stop in segment_taps(mags, thresholds):
        speeds = []
        for s in samples[start:stop]:
            f = float(np.linalg.norm(s.force))
            if f <= 0.0:
                continue
            n_hat = s.force / f
            v_t = s.velocity - (s.velocity @ n_hat) * n_hat
            speeds.append(float(np.linalg.norm(v_t)))
        taps.append(Tap(
            start=start, stop=stop,
            t_start=samples[start].t, t_stop=samples[stop - 1].t,
            peak_force=float(np.max(mags[start:stop])),
            mean_force=float(np.mean(mags[start:stop])),
            mean_speed=float(np.mean(speeds)) if speeds else 0.0,
        ))
    return taps


def analyze(trace: Trace, thresholds: Thresholds = DEFAULT_THRESHOLDS) -> Report:
    """Segment a trace, compute spread statistics, attach a skill label.

    Labels: expert requires steady force (CV of per-tap peaks at most
    force_cv_max), steady lateral speed (CV of per-tap mean tangential
    speeds at most speed_cv_max), and at least band_fraction_min of the
    peaks inside [band_low, band_high]. A trace failing either steadiness
    test is novice. Anything else, including traces with fewer than two
    taps, stays indeterminate.
    """
    taps = tap_metrics(trace, thresholds)
    if len(taps) < 2:
        return Report(taps=tuple(taps), force_cv=math.nan, speed_cv=math.nan,
                      band_fraction=math.nan, label=INDETERMINATE)
    peaks = np.array([tp.peak_force for tp in taps])
    speeds = np.array([tp.mean_speed for tp in taps])
    force_cv = _variation(peaks)
    speed_cv = _variation(speeds)
    in_band = (peaks >= thresholds.band_low) & (peaks <= thresholds.band_high)
    band_fraction = float(np.mean(in_band))
    if force_cv > thresholds.force_cv_max or speed_cv > thresholds.speed_cv_max:
        label = NOVICE
    elif band_fraction >= thresholds.band_fraction_min:
        label = EXPERT
    else:
        label = INDETERMINATE
    return Report(taps=tuple(taps), force_cv=force_cv, speed_cv=speed_cv,
                  band_fraction=band_fraction, label=label)


def _jsonable(x: float):
    # browsers reject bare NaN in JSON, so undefined statistics become null
    return None if math.isnan(x) else x


def report_dict(report: Report) -> dict:
    """JSON-friendly view of a report (used by the CLI and the service)."""
    return {
        "label": report.label,
        "tap_count": len(report.taps),
        "force_cv": _jsonable(report.force_cv),
        "speed_cv": _jsonable(report.speed_cv),
        "band_fraction": _jsonable(report.band_fraction),
        "taps": [{
            "t_start": tp.t_start, "t_stop": tp.t_stop,
            "peak_force": tp.peak_force, "mean_force": tp.mean_force,
            "mean_speed": tp.mean_speed,
        } for tp in report.taps],
    }
