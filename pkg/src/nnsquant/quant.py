"""Suck-cycle detection, burst segmentation, and outcome measures.

A suck cycle is a local displacement maximum that rises above the average
displacement of the analyzed window.  Consecutive cycles separated by no more
than a maximum gap form a burst; runs shorter than the minimum cycle count
are kept separately as fragments rather than silently discarded.  The
headline outcome measure is the mean intra-burst frequency: total in-burst
cycles over total burst duration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SignalStageError
from .signals import FilterSpec, MovementSignal

THRESHOLD_MODES = ("mean_abs", "mean_raw")


@dataclass
class QuantParams:
    """Detection and segmentation parameters.

    min_peak_distance_s : closest two cycles may sit; when two candidate
        peaks violate it, the larger-amplitude one wins (ties: earlier).
    max_intra_burst_gap_s : largest inter-cycle gap inside one burst.
    min_cycles_per_burst : shorter runs are reported as fragments.
    threshold_mode : "mean_abs" (mean of |x|, amplitude-scale invariant) or
        "mean_raw" (plain mean, sign-sensitive).
    """

    min_peak_distance_s: float = 0.2
    max_intra_burst_gap_s: float = 1.5
    min_cycles_per_burst: int = 6
    threshold_mode: str = "mean_abs"

    def __post_init__(self):
        if self.min_peak_distance_s <= 0:
            raise ValueError(f"min_peak_distance_s must be > 0, got {self.min_peak_distance_s}")
        if self.max_intra_burst_gap_s <= 0:
            raise ValueError(f"max_intra_burst_gap_s must be > 0, got {self.max_intra_burst_gap_s}")
        if self.min_cycles_per_burst < 1:
            raise ValueError(f"min_cycles_per_burst must be >= 1, got {self.min_cycles_per_burst}")
        if self.threshold_mode not in THRESHOLD_MODES:
            raise ValueError(
                f"threshold_mode must be one of {THRESHOLD_MODES}, got {self.threshold_mode!r}")


@dataclass
class CycleEvent:
    """One detected suck cycle (a displacement peak)."""

    index: int
    time: float
    amplitude: float


@dataclass
class Burst:
    """A maximal run of cycles whose inter-cycle gaps stay within bounds."""

    cycles: list

    @property
    def cycle_count(self) -> int:
        return len(self.cycles)

    @property
    def start_time(self) -> float:
        return self.cycles[0].time

    @property
    def end_time(self) -> float:
        return self.cycles[-1].time

    @property
    def duration(self) -> float:
        return self.end_time - self.start_time


@dataclass
class NNSReport:
    """Quantification outcome for one session and landmark."""

    landmark_id: int
    mode: str
    unit: str
    session_duration_s: float
    parameters: QuantParams
    bursts: list
    fragments: list
    cycles_per_burst: list
    burst_durations_s: list
    bursts_per_minute: float
    cycles_per_minute: float
    mean_frequency_hz: float | None
    frequency_defined: bool
    mean_cycle_amplitude: float | None
    total_cycles_detected: int
    filter_spec: FilterSpec | None = None
    segments_analyzed: int = 1
    segments_skipped: int = 0
    sample_rate_hz: float | None = None
    source_id: str | None = None


def detection_threshold(samples: np.ndarray, mode: str) -> float:
    """Average displacement used as the peak acceptance threshold."""
    if mode == "mean_abs":
        return float(np.mean(np.abs(samples)))
    if mode == "mean_raw":
        return float(np.mean(samples))
    raise ValueError(f"threshold_mode must be one of {THRESHOLD_MODES}, got {mode!r}")


def _peak_candidates(x: np.ndarray) -> list[int]:
    """Indices of local maxima strictly above both neighbors.

    A plateau (run of equal values) counts as a single candidate at its
    center index, provided the samples flanking the run are both lower.
    Endpoints never qualify.
    """
    n = len(x)
    out: list[int] = []
    i = 1
    while i < n - 1:
        if x[i] > x[i - 1]:
            j = i
            while j + 1 < n and x[j + 1] == x[j]:
                j += 1
            if j + 1 < n and x[j + 1] < x[j]:
                out.append((i + j) // 2)
            i = j + 1
        else:
            i += 1
    return out


def detect_cycles(signal: MovementSignal, params: QuantParams | None = None) -> list[CycleEvent]:
    """Find suck cycles in a filtered displacement signal.

    A sample qualifies when it is a strict local maximum (plateau-centered),
    its value exceeds the average displacement (see ``threshold_mode``), and
    it keeps ``min_peak_distance_s`` clearance from every stronger accepted
    peak (greedy, descending amplitude; equal amplitudes resolve to the
    earlier peak).

    Raises SignalStageError when handed a raw (unfiltered) signal.
    """
    params = params or QuantParams()
    if signal.stage != "filtered":
        raise SignalStageError(
            f"detect_cycles expects a filtered signal, got stage {signal.stage!r}")
    x = signal.samples
    if not np.all(np.isfinite(x)):
        raise SignalStageError("signal contains gaps; analyze each segment separately")
    if len(x) < 3:
        return []
    threshold = detection_threshold(x, params.threshold_mode)
    candidates = [i for i in _peak_candidates(x) if x[i] > threshold]

    t = signal.timestamps
    accepted: list[int] = []
    for i in sorted(candidates, key=lambda i: (-x[i], i)):
        if all(abs(t[i] - t[j]) >= params.min_peak_distance_s for j in accepted):
            accepted.append(i)
    accepted.sort()
    return [CycleEvent(index=int(i), time=float(t[i]), amplitude=float(x[i]))
            for i in accepted]


def segment_bursts(cycles: list, params: QuantParams | None = None
                   ) -> tuple[list, list]:
    """Group cycles into bursts.

    Returns ``(bursts, fragments)``: maximal runs whose consecutive cycle
    gaps are all <= ``max_intra_burst_gap_s``; runs with fewer than
    ``min_cycles_per_burst`` cycles go to the fragments list.
    """
    params = params or QuantParams()
    bursts: list[Burst] = []
    fragments: list[Burst] = []
    if not cycles:
        return bursts, fragments
    run = [cycles[0]]
    for prev, cur in zip(cycles[:-1], cycles[1:]):
        if cur.time - prev.time <= params.max_intra_burst_gap_s:
            run.append(cur)
        else:
            (bursts if len(run) >= params.min_cycles_per_burst else fragments).append(Burst(run))
            run = [cur]
    (bursts if len(run) >= params.min_cycles_per_burst else fragments).append(Burst(run))
    return bursts, fragments


def quantify(signal: MovementSignal, cycles: list, bursts: list,
             session_duration_s: float, params: QuantParams | None = None,
             fragments: list = (), filter_spec: FilterSpec | None = None,
             segments_analyzed: int = 1, segments_skipped: int = 0,
             source_id: str | None = None) -> NNSReport:
    """Assemble the outcome report.

    Rates normalize by the session duration; the mean frequency is total
    in-burst cycles over total burst duration (undefined — and flagged — when
    there are no bursts or all bursts have zero duration).
    """
    params = params or QuantParams()
    if session_duration_s <= 0:
        raise ValueError(f"session_duration_s must be > 0, got {session_duration_s}")
    cycle_times = {c.time for c in cycles}
    for b in bursts:
        for c in b.cycles:
            if c.time not in cycle_times:
                raise ValueError("bursts reference a cycle missing from the cycle list")

    in_burst = sum(b.cycle_count for b in bursts)
    durations = [b.duration for b in bursts]
    total_duration = float(sum(durations))
    if bursts and total_duration > 0:
        mean_frequency = in_burst / total_duration
        frequency_defined = True
    else:
        mean_frequency = None
        frequency_defined = False
    amplitudes = [c.amplitude for b in bursts for c in b.cycles]
    mean_amplitude = float(np.mean(amplitudes)) if amplitudes else None

    return NNSReport(
        landmark_id=signal.landmark_id,
        mode=signal.mode,
        unit="model units",
        session_duration_s=float(session_duration_s),
        parameters=params,
        bursts=list(bursts),
        fragments=list(fragments),
        cycles_per_burst=[b.cycle_count for b in bursts],
        burst_durations_s=[float(d) for d in durations],
        bursts_per_minute=60.0 * len(bursts) / session_duration_s,
        cycles_per_minute=60.0 * in_burst / session_duration_s,
        mean_frequency_hz=mean_frequency,
        frequency_defined=frequency_defined,
        mean_cycle_amplitude=mean_amplitude,
        total_cycles_detected=len(cycles),
        filter_spec=filter_spec if filter_spec is not None else signal.filter_spec,
        segments_analyzed=segments_analyzed,
        segments_skipped=segments_skipped,
        sample_rate_hz=float(signal.sample_rate),
        source_id=source_id,
    )
