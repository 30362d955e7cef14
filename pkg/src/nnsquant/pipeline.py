"""End-to-end pipeline: trajectory file → fits → signal → filter → report.

Each stage failure is wrapped in :class:`StageError` carrying a short stage
label ("parse", "model", "fit", "signal", "filter", "detect", "quantify",
"write") so the CLI and service can report *where* a session failed without
parsing messages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .camera_fit import FitConfig, FrameFit, fit_frame
from .errors import EmptySessionError, InsufficientDataError, NNSError, StageError
from .io_formats import (
    TrajectorySession,
    parse_trajectory,
    write_fits,
    write_report,
    write_signal,
)
from .quant import NNSReport, QuantParams, detect_cycles, quantify, segment_bursts
from .shape_model import ShapeModel, load_shape_model
from .signals import (
    FilterSpec,
    MovementSignal,
    apply_bandpass,
    design_bandpass,
    displacement_signal,
    split_segments,
)


@dataclass
class PipelineConfig:
    landmark_id: int = 8
    mode: str = "euclidean"
    filter_spec: FilterSpec = field(default_factory=FilterSpec)
    quant: QuantParams = field(default_factory=QuantParams)
    fit: FitConfig = field(default_factory=FitConfig)
    max_gap_s: float = 0.5


@dataclass
class PipelineResult:
    report: NNSReport
    raw_signal: MovementSignal
    filtered_signal: MovementSignal
    fits: list
    timestamps: np.ndarray


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def fit_session(model: ShapeModel, session: TrajectorySession,
                config: FitConfig | None = None) -> list:
    """Fit every frame independently; unfittable frames yield None.

    Raises EmptySessionError when no frame at all could be fitted.
    """
    config = config or FitConfig()
    fits: list[FrameFit | None] = []
    for frame in session.frames:
        try:
            fits.append(fit_frame(model, frame.points, frame.valid, config,
                                  frame_index=frame.frame_index,
                                  timestamp=frame.timestamp,
                                  confidence=frame.confidence))
        except InsufficientDataError:
            fits.append(None)
    if all(f is None for f in fits):
        raise EmptySessionError(
            f"session {session.source_id!r}: no fittable frame "
            f"(every frame has < 4 valid landmarks)")
    return fits


def _assemble_filtered(raw: MovementSignal, segments: list) -> MovementSignal:
    """Full-length filtered signal: segment outputs at their grid positions,
    NaN elsewhere (gaps and skipped segments)."""
    samples = np.full(len(raw), np.nan)
    for seg in segments:
        start = int(np.searchsorted(raw.timestamps, seg.timestamps[0] - 1e-12))
        samples[start:start + len(seg)] = seg.samples
    spec = segments[0].filter_spec if segments else None
    return MovementSignal(landmark_id=raw.landmark_id, mode=raw.mode,
                          sample_rate=raw.sample_rate, timestamps=raw.timestamps,
                          samples=samples, stage="filtered", filter_spec=spec,
                          interpolated=raw.interpolated)


def run_pipeline(session: TrajectorySession, model: ShapeModel,
                 config: PipelineConfig | None = None,
                 fits: list | None = None) -> PipelineResult:
    """Run the full analysis on a parsed session.

    ``fits`` may be supplied to reuse cached per-frame fits (the service does
    this); otherwise every frame is fitted here.
    """
    config = config or PipelineConfig()
    if fits is None:
        fits = _stage("fit", fit_session, model, session, config.fit)
    timestamps = session.timestamps()

    raw = _stage("signal", displacement_signal, fits, config.landmark_id,
                 config.mode, timestamps=timestamps, max_gap_s=config.max_gap_s)

    kernel = _stage("filter", design_bandpass, config.filter_spec, raw.sample_rate)
    all_segments = split_segments(raw, min_samples=1)
    usable = [s for s in all_segments if len(s) > kernel.pad_samples]
    if not usable:
        raise StageError("filter", EmptySessionError(
            f"no segment long enough to filter (need more than "
            f"{kernel.pad_samples} contiguous samples)"))
    filtered_segments = [_stage("filter", apply_bandpass, seg, kernel)
                         for seg in usable]
    filtered = _assemble_filtered(raw, filtered_segments)

    cycles = []
    offset_times = raw.timestamps
    for seg in filtered_segments:
        seg_cycles = _stage("detect", detect_cycles, seg, config.quant)
        base = int(np.searchsorted(offset_times, seg.timestamps[0] - 1e-12))
        for c in seg_cycles:
            c.index += base
        cycles.extend(seg_cycles)
    bursts, fragments = _stage("detect", segment_bursts, cycles, config.quant)

    duration = (raw.timestamps[-1] - raw.timestamps[0]) + 1.0 / raw.sample_rate
    report = _stage("quantify", quantify, raw, cycles, bursts, duration,
                    config.quant, fragments=fragments,
                    filter_spec=config.filter_spec,
                    segments_analyzed=len(usable),
                    segments_skipped=len(all_segments) - len(usable),
                    source_id=session.source_id)
    return PipelineResult(report=report, raw_signal=raw, filtered_signal=filtered,
                          fits=fits, timestamps=timestamps)


def fit_from_paths(trajectory_path: str | Path, model_path: str | Path,
                   config: FitConfig | None = None,
                   fits_path: str | Path | None = None) -> list:
    """Parse, fit, and optionally persist per-frame fits (CLI `fit`)."""
    session = _stage("parse", parse_trajectory, trajectory_path)
    model = _stage("model", load_shape_model, model_path)
    fits = _stage("fit", fit_session, model, session, config)
    if fits_path is not None:
        _stage("write", write_fits, fits, session.timestamps(), fits_path)
    return fits


def run_from_paths(trajectory_path: str | Path, model_path: str | Path,
                   config: PipelineConfig | None = None,
                   report_path: str | Path | None = None,
                   signal_prefix: str | Path | None = None,
                   fits_path: str | Path | None = None) -> PipelineResult:
    """File-to-file convenience used by the CLI `run` subcommand.

    Outputs are deterministic: running twice on the same inputs produces
    byte-identical files.
    """
    session = _stage("parse", parse_trajectory, trajectory_path)
    model = _stage("model", load_shape_model, model_path)
    result = run_pipeline(session, model, config)
    if report_path is not None:
        _stage("write", write_report, result.report, report_path)
    if signal_prefix is not None:
        prefix = str(signal_prefix)
        _stage("write", write_signal, result.raw_signal, prefix + ".raw.json")
        _stage("write", write_signal, result.filtered_signal, prefix + ".filtered.json")
    if fits_path is not None:
        _stage("write", write_fits, result.fits, result.timestamps, fits_path)
    return result
