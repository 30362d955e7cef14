"""Displacement signal extraction and band-pass filtering.

The displacement signal is computed from *frontalized* landmarks (model-space
re-synthesis of per-frame fits), so head and camera motion are already
factored out.  Displacement is measured relative to the first fitted frame in
one of three modes:

    euclidean   ||p_t - p_0||          (non-negative)
    horizontal  p_t.x - p_0.x          (signed)
    vertical    p_t.y - p_0.y          (signed)

Unfittable frames leave gaps: gaps no longer than ``max_gap_s`` are bridged
by linear interpolation (and flagged), longer gaps split the signal into
independent segments.  Filtering is a Butterworth band-pass applied either
zero-phase (forward-backward, odd-reflection padding) or causally.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import signal as sps

from .errors import (
    DimensionError,
    EmptySessionError,
    FilterDesignError,
    SignalLengthError,
    SignalStageError,
)

MODES = ("euclidean", "horizontal", "vertical")
STAGES = ("raw", "filtered")

#: Relative timestamp jitter beyond which the signal is resampled to a
#: uniform grid before filtering.
MAX_RELATIVE_JITTER = 0.01

#: Gaps of at most this many seconds are bridged by linear interpolation;
#: longer gaps split the session into independent segments.
DEFAULT_MAX_GAP_S = 0.5


@dataclass
class FilterSpec:
    """Band-pass description.  ``order`` is the per-pass filter order (even,
    >= 2); a zero-phase run therefore has an effective order of 2x."""

    low_cut_hz: float = 0.3
    high_cut_hz: float = 3.0
    order: int = 4
    zero_phase: bool = True

    def validate(self, sample_rate: float) -> None:
        nyquist = sample_rate / 2.0
        if self.order < 2 or self.order % 2 != 0:
            raise FilterDesignError(
                f"order must be an even integer >= 2, got {self.order}")
        if not self.low_cut_hz > 0:
            raise FilterDesignError(
                f"low_cut_hz must be > 0, got {self.low_cut_hz}")
        if not self.high_cut_hz > self.low_cut_hz:
            raise FilterDesignError(
                f"high_cut_hz ({self.high_cut_hz}) must exceed low_cut_hz "
                f"({self.low_cut_hz})")
        if not self.high_cut_hz < nyquist:
            raise FilterDesignError(
                f"high_cut_hz ({self.high_cut_hz} Hz) must be below the Nyquist "
                f"frequency ({nyquist} Hz at {sample_rate} fps)")


@dataclass
class MovementSignal:
    """A single-landmark displacement time series.

    ``samples`` may contain NaN where the landmark could not be fitted and
    the gap was too long to interpolate; ``interpolated`` flags samples that
    were filled in.  ``stage`` is "raw" or "filtered".
    """

    landmark_id: int
    mode: str
    sample_rate: float
    timestamps: np.ndarray
    samples: np.ndarray
    stage: str = "raw"
    filter_spec: FilterSpec | None = None
    interpolated: np.ndarray | None = None

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=float)
        self.samples = np.asarray(self.samples, dtype=float)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.stage not in STAGES:
            raise ValueError(f"stage must be one of {STAGES}, got {self.stage!r}")
        if self.timestamps.shape != self.samples.shape:
            raise DimensionError(
                f"timestamps {self.timestamps.shape} vs samples {self.samples.shape}")
        if self.interpolated is None:
            self.interpolated = np.zeros(self.samples.shape, dtype=bool)
        else:
            self.interpolated = np.asarray(self.interpolated, dtype=bool)

    def __len__(self) -> int:
        return int(self.samples.shape[0])


@dataclass
class FilterKernel:
    """A designed band-pass filter bound to a sample rate."""

    sos: np.ndarray
    spec: FilterSpec
    sample_rate: float

    @property
    def n_sections(self) -> int:
        return int(self.sos.shape[0])

    @property
    def effective_length(self) -> int:
        """FIR-equivalent tap span of the cascade (each biquad adds 2 taps)."""
        return 2 * self.n_sections + 1

    @property
    def pad_samples(self) -> int:
        """Odd-reflection padding per pass; also the minimum extra length the
        input must have beyond one sample."""
        return 3 * self.effective_length


def infer_sample_rate(timestamps: np.ndarray) -> float:
    """Nominal sample rate from the median inter-frame interval."""
    ts = np.asarray(timestamps, dtype=float)
    if ts.ndim != 1 or ts.shape[0] < 2:
        raise DimensionError("need at least 2 timestamps to infer a sample rate")
    dt = np.diff(ts)
    if np.any(dt <= 0):
        raise DimensionError("timestamps must be strictly increasing")
    return 1.0 / float(np.median(dt))


def _displacement(frontalized: np.ndarray, reference: np.ndarray, mode: str) -> float:
    d = frontalized - reference
    if mode == "euclidean":
        return float(np.linalg.norm(d))
    if mode == "horizontal":
        return float(d[0])
    return float(d[1])  # vertical


def displacement_signal(fits, landmark_id: int, mode: str = "euclidean",
                        timestamps=None,
                        max_gap_s: float = DEFAULT_MAX_GAP_S) -> MovementSignal:
    """Per-frame displacement of one frontalized landmark.

    Parameters
    ----------
    fits : sequence of FrameFit or None
        One entry per frame, in time order; None marks unfittable frames.
    landmark_id : int
        Index into the 68-landmark annotation.
    mode : {"euclidean", "horizontal", "vertical"}
    timestamps : array-like, optional
        Per-frame times covering every slot (required when any entry of
        ``fits`` is None; otherwise taken from the fits themselves).
    max_gap_s : float
        Longest gap bridged by linear interpolation; longer gaps stay NaN and
        split the signal into segments (see :func:`split_segments`).

    The sample at the first fitted frame is exactly 0 (it is the reference
    position).  If timestamps jitter by more than 1% of the median interval,
    the signal is resampled onto a uniform grid by linear interpolation.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    fits = list(fits)
    if timestamps is None:
        if any(f is None for f in fits):
            raise DimensionError(
                "timestamps are required when the fit list has unfittable frames")
        timestamps = [f.timestamp for f in fits]
    ts = np.asarray(timestamps, dtype=float)
    if ts.shape != (len(fits),):
        raise DimensionError(
            f"timestamps: expected {len(fits)} entries, got shape {ts.shape}")

    fitted_idx = [i for i, f in enumerate(fits) if f is not None]
    if not fitted_idx:
        raise EmptySessionError("no frame in the session could be fitted")
    reference = fits[fitted_idx[0]].frontalized[landmark_id]

    samples = np.full(len(fits), np.nan)
    for i in fitted_idx:
        samples[i] = _displacement(fits[i].frontalized[landmark_id], reference, mode)

    rate = infer_sample_rate(ts)
    med = 1.0 / rate

    # Missing frames (no slot at all) and timestamp jitter both show up as
    # non-uniform spacing.  Align everything onto the uniform slot grid first
    # so absent frames become NaN slots and the gap policy below applies.
    n_slots = int(round((ts[-1] - ts[0]) / med)) + 1
    grid = ts[0] + np.arange(n_slots) * med
    slots = np.round((ts - ts[0]) / med).astype(int)
    on_grid = (np.max(np.abs(ts - grid[np.clip(slots, 0, n_slots - 1)])) <= MAX_RELATIVE_JITTER * med
               and len(np.unique(slots)) == len(slots))
    resample_flags = np.zeros(n_slots, dtype=bool)
    if on_grid and n_slots == len(ts):
        grid = ts  # complete and uniform: keep timestamps verbatim
        placed = samples
    elif on_grid:
        placed = np.full(n_slots, np.nan)
        placed[slots] = samples
    else:
        placed, resample_flags = _resample_jittered(ts, samples, grid, med, max_gap_s)

    filled, gap_flags = _fill_short_gaps(grid, placed, max_gap_s)
    return MovementSignal(landmark_id=landmark_id, mode=mode, sample_rate=rate,
                          timestamps=grid, samples=filled, stage="raw",
                          interpolated=gap_flags | resample_flags)


def _resample_jittered(ts: np.ndarray, samples: np.ndarray, grid: np.ndarray,
                       step: float, max_gap_s: float
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Linear resampling onto ``grid``: NaN outside valid runs, never bridging
    native spacings wider than ``max_gap_s``; grid points spanning a spacing
    wider than 1.5 sample intervals are flagged as interpolated."""
    out = np.full(len(grid), np.nan)
    flagged = np.zeros(len(grid), dtype=bool)
    valid = np.isfinite(samples)
    for start, stop in _runs(valid):
        t_run, v_run = ts[start:stop], samples[start:stop]
        cuts = np.flatnonzero(np.diff(t_run) > max_gap_s)
        for piece in np.split(np.arange(len(t_run)), cuts + 1):
            if piece.size == 0:
                continue
            t_p, v_p = t_run[piece], v_run[piece]
            lo = np.searchsorted(grid, t_p[0] - 1e-9 * step)
            hi = np.searchsorted(grid, t_p[-1] + 1e-9 * step)
            if hi <= lo:
                continue
            out[lo:hi] = np.interp(grid[lo:hi], t_p, v_p)
            if len(t_p) > 1:
                right = np.clip(np.searchsorted(t_p, grid[lo:hi]), 1, len(t_p) - 1)
                flagged[lo:hi] = (t_p[right] - t_p[right - 1]) > 1.5 * step
    return out, flagged


def _runs(mask: np.ndarray):
    """Yield (start, stop) index pairs of contiguous True runs."""
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate([[idx[0]], idx[breaks + 1]])
    stops = np.concatenate([idx[breaks] + 1, [idx[-1] + 1]])
    yield from zip(starts, stops)


def _fill_short_gaps(ts: np.ndarray, samples: np.ndarray,
                     max_gap_s: float) -> tuple[np.ndarray, np.ndarray]:
    out = samples.copy()
    interpolated = np.zeros(samples.shape, dtype=bool)
    valid = np.isfinite(samples)
    runs = list(_runs(valid))
    for (_, stop_a), (start_b, _) in zip(runs[:-1], runs[1:]):
        gap_s = ts[start_b] - ts[stop_a - 1]
        if gap_s <= max_gap_s:
            sl = slice(stop_a, start_b)
            out[sl] = np.interp(ts[sl], [ts[stop_a - 1], ts[start_b]],
                                [samples[stop_a - 1], samples[start_b]])
            interpolated[sl] = True
    return out, interpolated


def split_segments(signal: MovementSignal, min_samples: int = 1) -> list[MovementSignal]:
    """Break a gappy signal into contiguous gap-free segments.

    Segments shorter than ``min_samples`` are dropped (they cannot be
    filtered stably); the caller can count them by comparing lengths.
    """
    finite = np.isfinite(signal.samples)
    segments = []
    for start, stop in _runs(finite):
        if stop - start < min_samples:
            continue
        segments.append(replace(
            signal,
            timestamps=signal.timestamps[start:stop].copy(),
            samples=signal.samples[start:stop].copy(),
            interpolated=signal.interpolated[start:stop].copy()))
    return segments


def design_bandpass(spec: FilterSpec, sample_rate: float) -> FilterKernel:
    """Design a Butterworth band-pass (bilinear transform, second-order
    sections) for the given sample rate.

    ``spec.order`` is the per-pass order: a band-pass of order 2N is designed
    from an order-N low-pass prototype, so the prototype order is
    ``spec.order // 2``.
    """
    if sample_rate <= 0:
        raise FilterDesignError(f"sample_rate must be > 0, got {sample_rate}")
    spec.validate(sample_rate)
    sos = sps.butter(spec.order // 2, [spec.low_cut_hz, spec.high_cut_hz],
                     btype="bandpass", output="sos", fs=sample_rate)
    return FilterKernel(sos=sos, spec=spec, sample_rate=sample_rate)


def apply_bandpass(signal: MovementSignal, kernel: FilterKernel) -> MovementSignal:
    """Filter a raw signal; returns a new signal with stage "filtered".

    Zero-phase mode runs the cascade forward and backward with odd-reflection
    padding (no phase lag, squared magnitude response); causal mode runs a
    single forward pass (the filtered peak lags the raw one slightly).
    """
    if signal.stage != "raw":
        raise SignalStageError(
            f"apply_bandpass expects a raw signal, got stage {signal.stage!r}")
    if not np.all(np.isfinite(signal.samples)):
        raise SignalStageError(
            "signal contains gaps; split into segments before filtering")
    if abs(signal.sample_rate - kernel.sample_rate) > 1e-9 * kernel.sample_rate:
        raise FilterDesignError(
            f"kernel designed for {kernel.sample_rate} fps but signal is at "
            f"{signal.sample_rate} fps")
    n = len(signal)
    if n <= kernel.pad_samples:
        raise SignalLengthError(
            f"signal too short for stable filtering: {n} samples, need more "
            f"than {kernel.pad_samples}")
    if kernel.spec.zero_phase:
        filtered = sps.sosfiltfilt(kernel.sos, signal.samples,
                                   padtype="odd", padlen=kernel.pad_samples)
    else:
        filtered = sps.sosfilt(kernel.sos, signal.samples)
    return replace(signal, samples=np.asarray(filtered, dtype=float),
                   stage="filtered", filter_spec=kernel.spec)
