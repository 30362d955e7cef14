"""File formats: landmark trajectories (CSV), signals / reports / fits (JSON).

Trajectory files are plain UTF-8 CSV with ``#`` comment lines, a header row,
then one row per (frame, landmark) observation::

    # source_id: clip-042
    frame_index,timestamp_s,landmark_id,x_px,y_px,confidence
    0,0.0,0,312.5,201.8,0.98

The confidence column is optional.  Landmarks absent from a frame are invalid
slots; frames absent entirely are gaps in time.  All JSON documents carry a
``schema_version`` field and serialize floats at full precision, so write →
parse round-trips are exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .camera_fit import AffineCamera, FrameFit
from .errors import (
    ReportFormatError,
    ReportVersionError,
    TrajectoryFormatError,
    TrajectoryOrderingError,
)
from .quant import Burst, CycleEvent, NNSReport, QuantParams
from .shape_model import NUM_LANDMARKS
from .signals import FilterSpec, MovementSignal

TRAJECTORY_COLUMNS = ("frame_index", "timestamp_s", "landmark_id", "x_px", "y_px")
REPORT_SCHEMA = "nns-report/1"
SIGNAL_SCHEMA = "nns-signal/1"
FITS_SCHEMA = "nns-fits/1"


@dataclass
class LandmarkFrame:
    """All landmark observations sharing one frame index / timestamp."""

    frame_index: int
    timestamp: float
    points: np.ndarray                      # (68, 2), NaN where invalid
    valid: np.ndarray                       # (68,) bool
    confidence: np.ndarray | None = None    # (68,) float, 1.0 default

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.confidence is None:
            self.confidence = np.ones(NUM_LANDMARKS)
        else:
            self.confidence = np.asarray(self.confidence, dtype=float)


@dataclass
class TrajectorySession:
    """A parsed landmark trajectory."""

    source_id: str
    frames: list
    sample_rate_hint: float | None = None
    metadata: dict = field(default_factory=dict)

    def timestamps(self) -> np.ndarray:
        return np.array([f.timestamp for f in self.frames])

    def __len__(self) -> int:
        return len(self.frames)


def validate_session(session: TrajectorySession) -> TrajectorySession:
    if len(session.frames) < 2:
        raise TrajectoryFormatError(
            f"a session needs at least 2 frames, got {len(session.frames)}")
    indices = [f.frame_index for f in session.frames]
    if len(set(indices)) != len(indices):
        raise TrajectoryFormatError("frame_index values must be unique")
    if sorted(indices) != indices:
        raise TrajectoryFormatError("frames must be ordered by frame_index")
    ts = session.timestamps()
    if np.any(np.diff(ts) <= 0):
        raise TrajectoryOrderingError(
            "timestamps must be strictly increasing in frame-index order")
    return session


def parse_trajectory_text(text: str, source_id: str = "unnamed") -> TrajectorySession:
    """Parse trajectory CSV content.  See module docstring for the dialect.

    Raises TrajectoryFormatError (with the 1-based line number) on malformed
    rows, duplicate (frame, landmark) pairs, or out-of-range landmark ids;
    TrajectoryOrderingError when timestamps do not increase with frame index.
    """
    metadata: dict[str, str] = {}
    header: list[str] | None = None
    has_confidence = False
    # (frame_index) -> [timestamp, points, valid, confidence, first_line]
    frames: dict[int, list] = {}
    seen: set[tuple[int, int]] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                key, _, value = body.partition(":")
                metadata[key.strip()] = value.strip()
            continue
        if header is None:
            header = [c.strip() for c in line.split(",")]
            base = tuple(header[:5])
            if base != TRAJECTORY_COLUMNS or len(header) not in (5, 6):
                raise TrajectoryFormatError(
                    f"header must be {','.join(TRAJECTORY_COLUMNS)}[,confidence], "
                    f"got {line!r}", line=lineno)
            if len(header) == 6:
                if header[5] != "confidence":
                    raise TrajectoryFormatError(
                        f"sixth column must be 'confidence', got {header[5]!r}",
                        line=lineno)
                has_confidence = True
            continue

        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(header):
            raise TrajectoryFormatError(
                f"expected {len(header)} columns, got {len(cells)}", line=lineno)
        try:
            frame_index = int(cells[0])
            timestamp = float(cells[1])
            landmark_id = int(cells[2])
            x = float(cells[3])
            y = float(cells[4])
            confidence = float(cells[5]) if has_confidence else 1.0
        except ValueError as exc:
            raise TrajectoryFormatError(f"unparseable value: {exc}", line=lineno) from None
        if not (0 <= landmark_id < NUM_LANDMARKS):
            raise TrajectoryFormatError(
                f"landmark_id {landmark_id} out of range [0, {NUM_LANDMARKS})",
                line=lineno)
        if not (math.isfinite(timestamp) and math.isfinite(x) and math.isfinite(y)):
            raise TrajectoryFormatError("non-finite coordinate or timestamp", line=lineno)
        key = (frame_index, landmark_id)
        if key in seen:
            raise TrajectoryFormatError(
                f"duplicate row for frame {frame_index}, landmark {landmark_id}",
                line=lineno)
        seen.add(key)

        entry = frames.get(frame_index)
        if entry is None:
            entry = [timestamp, np.full((NUM_LANDMARKS, 2), np.nan),
                     np.zeros(NUM_LANDMARKS, dtype=bool), np.ones(NUM_LANDMARKS),
                     lineno]
            frames[frame_index] = entry
        elif entry[0] != timestamp:
            raise TrajectoryFormatError(
                f"frame {frame_index} has conflicting timestamps "
                f"({entry[0]} vs {timestamp})", line=lineno)
        entry[1][landmark_id] = (x, y)
        entry[2][landmark_id] = True
        entry[3][landmark_id] = confidence

    if header is None:
        raise TrajectoryFormatError("no header row found")
    frame_list = [
        LandmarkFrame(frame_index=idx, timestamp=e[0], points=e[1], valid=e[2],
                      confidence=e[3])
        for idx, e in sorted(frames.items())
    ]
    session = TrajectorySession(
        source_id=metadata.get("source_id", source_id),
        frames=frame_list,
        metadata={k: v for k, v in metadata.items()
                  if k not in ("source_id", "sample_rate_hint")},
    )
    if "sample_rate_hint" in metadata:
        try:
            session.sample_rate_hint = float(metadata["sample_rate_hint"])
        except ValueError:
            raise TrajectoryFormatError(
                f"sample_rate_hint comment is not numeric: {metadata['sample_rate_hint']!r}")
    return validate_session(session)


def parse_trajectory(path: str | Path) -> TrajectorySession:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_trajectory_text(fh.read(), source_id=Path(path).stem)


def write_trajectory(session: TrajectorySession, path: str | Path) -> None:
    """Write a session in the CSV dialect; floats keep full precision."""
    with_confidence = any(
        bool(np.any(f.valid & (f.confidence != 1.0))) for f in session.frames)
    lines = [f"# source_id: {session.source_id}"]
    if session.sample_rate_hint is not None:
        lines.append(f"# sample_rate_hint: {float(session.sample_rate_hint)!r}")
    for key, value in session.metadata.items():
        lines.append(f"# {key}: {value}")
    header = ",".join(TRAJECTORY_COLUMNS) + (",confidence" if with_confidence else "")
    lines.append(header)
    for f in session.frames:
        for lid in np.flatnonzero(f.valid):
            # plain-float repr keeps full precision and parses back exactly
            row = (f"{int(f.frame_index)},{float(f.timestamp)!r},{int(lid)},"
                   f"{float(f.points[lid, 0])!r},{float(f.points[lid, 1])!r}")
            if with_confidence:
                row += f",{float(f.confidence[lid])!r}"
            lines.append(row)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# JSON helpers


def _nan_to_null(values) -> list:
    return [None if not math.isfinite(v) else float(v) for v in np.asarray(values, dtype=float)]


def _null_to_nan(values) -> np.ndarray:
    return np.array([np.nan if v is None else float(v) for v in values])


def _filter_to_dict(spec: FilterSpec | None) -> dict | None:
    if spec is None:
        return None
    return {"low_cut_hz": spec.low_cut_hz, "high_cut_hz": spec.high_cut_hz,
            "order": spec.order, "zero_phase": spec.zero_phase}


def _filter_from_dict(doc: dict | None) -> FilterSpec | None:
    if doc is None:
        return None
    return FilterSpec(low_cut_hz=doc["low_cut_hz"], high_cut_hz=doc["high_cut_hz"],
                      order=doc["order"], zero_phase=doc["zero_phase"])


def _load_json(path: str | Path, kind: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ReportFormatError(f"cannot read {kind} document {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ReportFormatError(f"{kind} document must be a JSON object")
    return doc


def _check_schema(doc: dict, expected: str, kind: str) -> None:
    version = doc.get("schema_version")
    if version is None:
        raise ReportFormatError(f"{kind} document is missing schema_version")
    if version != expected:
        raise ReportVersionError(
            f"unsupported {kind} schema_version {version!r} (expected {expected!r})")


# ---------------------------------------------------------------------------
# Signals


def signal_to_dict(signal: MovementSignal) -> dict:
    return {
        "schema_version": SIGNAL_SCHEMA,
        "landmark_id": signal.landmark_id,
        "mode": signal.mode,
        "unit": "model units",
        "stage": signal.stage,
        "sample_rate_hz": float(signal.sample_rate),
        "timestamps_s": [float(t) for t in signal.timestamps],
        "samples": _nan_to_null(signal.samples),
        "interpolated": [bool(b) for b in signal.interpolated],
        "filter": _filter_to_dict(signal.filter_spec),
    }


def signal_from_dict(doc: dict) -> MovementSignal:
    _check_schema(doc, SIGNAL_SCHEMA, "signal")
    return MovementSignal(
        landmark_id=int(doc["landmark_id"]),
        mode=doc["mode"],
        sample_rate=float(doc["sample_rate_hz"]),
        timestamps=np.array(doc["timestamps_s"], dtype=float),
        samples=_null_to_nan(doc["samples"]),
        stage=doc["stage"],
        filter_spec=_filter_from_dict(doc.get("filter")),
        interpolated=np.array(doc["interpolated"], dtype=bool),
    )


def write_signal(signal: MovementSignal, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(signal_to_dict(signal), fh)
        fh.write("\n")


def parse_signal(path: str | Path) -> MovementSignal:
    return signal_from_dict(_load_json(path, "signal"))


# ---------------------------------------------------------------------------
# Reports


def _burst_to_dict(burst: Burst) -> dict:
    return {
        "start_time_s": burst.start_time,
        "end_time_s": burst.end_time,
        "duration_s": burst.duration,
        "cycle_count": burst.cycle_count,
        "cycles": [{"index": c.index, "time_s": c.time, "amplitude": c.amplitude}
                   for c in burst.cycles],
    }


def _burst_from_dict(doc: dict) -> Burst:
    return Burst([CycleEvent(index=int(c["index"]), time=float(c["time_s"]),
                             amplitude=float(c["amplitude"]))
                  for c in doc["cycles"]])


def report_to_dict(report: NNSReport) -> dict:
    p = report.parameters
    return {
        "schema_version": REPORT_SCHEMA,
        "source_id": report.source_id,
        "landmark_id": report.landmark_id,
        "mode": report.mode,
        "unit": report.unit,
        "sample_rate_hz": report.sample_rate_hz,
        "session_duration_s": report.session_duration_s,
        "parameters": {
            "min_peak_distance_s": p.min_peak_distance_s,
            "max_intra_burst_gap_s": p.max_intra_burst_gap_s,
            "min_cycles_per_burst": p.min_cycles_per_burst,
            "threshold_mode": p.threshold_mode,
        },
        "filter": _filter_to_dict(report.filter_spec),
        "bursts": [_burst_to_dict(b) for b in report.bursts],
        "fragments": [_burst_to_dict(b) for b in report.fragments],
        "cycles_per_burst": report.cycles_per_burst,
        "burst_durations_s": report.burst_durations_s,
        "bursts_per_minute": report.bursts_per_minute,
        "cycles_per_minute": report.cycles_per_minute,
        "mean_frequency_hz": report.mean_frequency_hz,
        "frequency_defined": report.frequency_defined,
        "mean_cycle_amplitude": report.mean_cycle_amplitude,
        "total_cycles_detected": report.total_cycles_detected,
        "segments_analyzed": report.segments_analyzed,
        "segments_skipped": report.segments_skipped,
    }


def report_from_dict(doc: dict) -> NNSReport:
    _check_schema(doc, REPORT_SCHEMA, "report")
    try:
        params = QuantParams(
            min_peak_distance_s=doc["parameters"]["min_peak_distance_s"],
            max_intra_burst_gap_s=doc["parameters"]["max_intra_burst_gap_s"],
            min_cycles_per_burst=doc["parameters"]["min_cycles_per_burst"],
            threshold_mode=doc["parameters"]["threshold_mode"],
        )
        return NNSReport(
            landmark_id=int(doc["landmark_id"]),
            mode=doc["mode"],
            unit=doc["unit"],
            session_duration_s=float(doc["session_duration_s"]),
            parameters=params,
            bursts=[_burst_from_dict(b) for b in doc["bursts"]],
            fragments=[_burst_from_dict(b) for b in doc["fragments"]],
            cycles_per_burst=[int(c) for c in doc["cycles_per_burst"]],
            burst_durations_s=[float(d) for d in doc["burst_durations_s"]],
            bursts_per_minute=float(doc["bursts_per_minute"]),
            cycles_per_minute=float(doc["cycles_per_minute"]),
            mean_frequency_hz=(None if doc["mean_frequency_hz"] is None
                               else float(doc["mean_frequency_hz"])),
            frequency_defined=bool(doc["frequency_defined"]),
            mean_cycle_amplitude=(None if doc["mean_cycle_amplitude"] is None
                                  else float(doc["mean_cycle_amplitude"])),
            total_cycles_detected=int(doc["total_cycles_detected"]),
            filter_spec=_filter_from_dict(doc.get("filter")),
            segments_analyzed=int(doc["segments_analyzed"]),
            segments_skipped=int(doc["segments_skipped"]),
            sample_rate_hz=(None if doc.get("sample_rate_hz") is None
                            else float(doc["sample_rate_hz"])),
            source_id=doc.get("source_id"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ReportFormatError(f"report document is malformed: {exc!r}") from exc


def write_report(report: NNSReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(report), fh, indent=1)
        fh.write("\n")


def parse_report(path: str | Path) -> NNSReport:
    return report_from_dict(_load_json(path, "report"))


# ---------------------------------------------------------------------------
# Per-frame fits


def fits_to_dict(fits: list, timestamps) -> dict:
    frames = []
    for fit, ts in zip(fits, timestamps):
        if fit is None:
            frames.append({"fitted": False, "timestamp_s": float(ts)})
            continue
        frames.append({
            "fitted": True,
            "frame_index": fit.frame_index,
            "timestamp_s": float(fit.timestamp),
            "camera": [[float(v) for v in row] for row in fit.camera.matrix],
            "coefficients": [float(a) for a in fit.coefficients],
            "frontalized": [[float(v) for v in p] for p in fit.frontalized],
            "residual": float(fit.residual),
            "num_valid": fit.num_valid,
        })
    return {"schema_version": FITS_SCHEMA, "frames": frames}


def fits_from_dict(doc: dict) -> tuple[list, np.ndarray]:
    _check_schema(doc, FITS_SCHEMA, "fits")
    fits: list[FrameFit | None] = []
    timestamps = []
    for i, fr in enumerate(doc["frames"]):
        timestamps.append(float(fr["timestamp_s"]))
        if not fr["fitted"]:
            fits.append(None)
            continue
        fits.append(FrameFit(
            frame_index=int(fr.get("frame_index", i)),
            timestamp=float(fr["timestamp_s"]),
            camera=AffineCamera(np.array(fr["camera"], dtype=float)),
            coefficients=np.array(fr["coefficients"], dtype=float),
            frontalized=np.array(fr["frontalized"], dtype=float),
            residual=float(fr["residual"]),
            num_valid=int(fr["num_valid"]),
        ))
    return fits, np.array(timestamps)


def write_fits(fits: list, timestamps, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(fits_to_dict(fits, timestamps), fh)
        fh.write("\n")


def parse_fits(path: str | Path) -> tuple[list, np.ndarray]:
    return fits_from_dict(_load_json(path, "fits"))
