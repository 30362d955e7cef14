"""Synthetic sessions with known ground truth, and detection scoring.

The generator builds a scalar "sucking" waveform — raised-cosine pulses of
0.4 s width placed at scripted cycle times, plus white noise and a slow
sinusoidal drift — and exposes it two ways:

* :func:`generate_signal` returns the waveform directly as a raw
  MovementSignal (for exercising the filter/quant stages in isolation);
* :func:`generate_trajectory` renders it through the shape model and a
  scripted affine camera into a full 2D landmark trajectory, by modulating
  the model coefficients along the direction that moves the target landmark
  vertically.  The whole analysis chain (fit → frontalize → signal → filter
  → detect) can then be validated against the known cycle times.

All randomness comes from ``numpy.random.default_rng(seed)`` (PCG64): one
generator per call, drawn in a fixed documented order, so every artifact is
reproducible from the scenario alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .camera_fit import AffineCamera, project
from .errors import ModelFormatError, ReportFormatError
from .io_formats import LandmarkFrame, TrajectorySession, _check_schema, _load_json
from .quant import NNSReport
from .shape_model import ShapeModel, synthesize_shape
from .signals import MovementSignal

SCENARIO_SCHEMA = "nns-scenario/1"
TRUTH_SCHEMA = "nns-truth/1"
SCORE_SCHEMA = "nns-score/1"

#: Half-width of the raised-cosine pulse placed at each cycle time (s).
PULSE_WIDTH_S = 0.4

#: A detected cycle within this window of a truth cycle counts as a match.
MATCH_WINDOW_S = 0.15

#: Quiet time appended after the last cycle so pulses and filters settle.
TAIL_S = 2.0


@dataclass
class Scenario:
    """Parameters of one synthetic session.

    ``intra_burst_hz`` is the in-burst cycle rate: consecutive cycle times
    within a burst are exactly ``1 / intra_burst_hz`` apart.  Pauses between
    bursts (and the lead-in before the first) are drawn uniformly from
    ``pause_s_range``.
    """

    burst_count: int = 4
    cycles_per_burst_range: tuple = (6, 12)
    intra_burst_hz: float = 2.0
    pause_s_range: tuple = (2.0, 4.0)
    cycle_amplitude: float = 1.0
    noise_sd: float = 0.1
    drift_amplitude: float = 0.3
    drift_hz: float = 0.05
    sample_rate: float = 30.0
    seed: int = 0
    landmark_id: int = 8

    def __post_init__(self):
        lo, hi = self.cycles_per_burst_range
        if not (1 <= lo <= hi):
            raise ValueError(
                f"cycles_per_burst_range must satisfy 1 <= lo <= hi, got {(lo, hi)}")
        if self.burst_count < 0:
            raise ValueError(f"burst_count must be >= 0, got {self.burst_count}")
        if self.intra_burst_hz <= 0:
            raise ValueError(f"intra_burst_hz must be > 0, got {self.intra_burst_hz}")
        plo, phi = self.pause_s_range
        if not (0 < plo <= phi):
            raise ValueError(f"pause_s_range must satisfy 0 < lo <= hi, got {(plo, phi)}")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate}")
        if self.noise_sd < 0 or self.drift_amplitude < 0:
            raise ValueError("noise_sd and drift_amplitude must be >= 0")
        if not (0 <= self.drift_hz < 0.1):
            raise ValueError(
                f"drift_hz must stay below the pass band (< 0.1 Hz), got {self.drift_hz}")
        if not (0 <= self.landmark_id < 68):
            raise ValueError(f"landmark_id must be in [0, 68), got {self.landmark_id}")


@dataclass
class GroundTruth:
    """What the generator actually produced."""

    cycle_times: np.ndarray
    burst_spans: list            # (first_cycle_time, last_cycle_time) per burst
    cycles_per_burst: list
    true_frequency_hz: float | None

    @property
    def burst_count(self) -> int:
        return len(self.burst_spans)


@dataclass
class PoseScript:
    """Scripted camera for trajectory rendering.

    Yaw/pitch oscillate sinusoidally; sway translates the image.  With all
    amplitudes at 0 the camera is a static scaled orthographic projection.
    """

    scale: float = 1.5
    center: tuple = (320.0, 240.0)
    yaw_amplitude_rad: float = 0.0
    yaw_hz: float = 0.05
    pitch_amplitude_rad: float = 0.0
    pitch_hz: float = 0.03
    sway_amplitude_px: float = 0.0
    sway_hz: float = 0.02
    pixel_noise_sd: float = 0.0
    drop_fraction: float = 0.0

    def camera_at(self, t: float) -> AffineCamera:
        yaw = self.yaw_amplitude_rad * np.sin(2 * np.pi * self.yaw_hz * t)
        pitch = self.pitch_amplitude_rad * np.sin(2 * np.pi * self.pitch_hz * t + np.pi / 3)
        cy, sy = np.cos(yaw), np.sin(yaw)
        cp, sp = np.cos(pitch), np.sin(pitch)
        rot_y = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
        rot_x = np.array([[1, 0, 0], [0, cp, -sp], [0, sp, cp]])
        rot = rot_y @ rot_x
        sway = self.sway_amplitude_px * np.array(
            [np.sin(2 * np.pi * self.sway_hz * t), np.cos(2 * np.pi * self.sway_hz * t)])
        matrix = np.zeros((3, 4))
        matrix[:2, :3] = self.scale * rot[:2, :]
        matrix[:2, 3] = np.asarray(self.center) + sway
        matrix[2, 3] = 1.0
        return AffineCamera(matrix)


@dataclass
class DetectionScore:
    cycle_recall: float
    cycle_precision: float
    burst_count_error: int
    frequency_error_hz: float
    matched_cycles: int = 0


def _layout(scenario: Scenario, rng: np.random.Generator):
    """Draw the burst layout.  RNG order: lead-in pause, then per burst the
    cycle count followed by the trailing pause."""
    lo, hi = scenario.cycles_per_burst_range
    period = 1.0 / scenario.intra_burst_hz
    cycle_times: list[float] = []
    spans: list[tuple[float, float]] = []
    counts: list[int] = []
    t = float(rng.uniform(*scenario.pause_s_range))
    for _ in range(scenario.burst_count):
        count = int(rng.integers(lo, hi + 1))
        times = t + period * np.arange(count)
        cycle_times.extend(times)
        spans.append((float(times[0]), float(times[-1])))
        counts.append(count)
        t = float(times[-1] + rng.uniform(*scenario.pause_s_range))
    total_cycles = sum(counts)
    total_duration = sum(e - s for s, e in spans)
    freq = total_cycles / total_duration if total_duration > 0 else None
    truth = GroundTruth(cycle_times=np.array(cycle_times), burst_spans=spans,
                        cycles_per_burst=counts, true_frequency_hz=freq)
    return truth


def _waveform(scenario: Scenario, truth: GroundTruth,
              rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Sample grid and waveform: pulses + noise + drift.  RNG order: noise
    array, then drift phase."""
    fs = scenario.sample_rate
    if truth.cycle_times.size:
        duration = truth.cycle_times[-1] + TAIL_S
    else:
        duration = 2.0 * TAIL_S
    n = int(round(duration * fs)) + 1
    t = np.arange(n) / fs
    x = np.zeros(n)
    half = PULSE_WIDTH_S / 2.0
    for tc in truth.cycle_times:
        lo = int(np.ceil((tc - half) * fs))
        hi = int(np.floor((tc + half) * fs))
        lo, hi = max(lo, 0), min(hi, n - 1)
        win = t[lo:hi + 1] - tc
        x[lo:hi + 1] += scenario.cycle_amplitude * np.cos(np.pi * win / PULSE_WIDTH_S) ** 2
    if scenario.noise_sd > 0:
        x = x + rng.normal(0.0, scenario.noise_sd, n)
    else:
        rng.normal(0.0, 1.0, n)  # keep the draw order fixed regardless of noise_sd
    phase = rng.uniform(0.0, 2 * np.pi)
    if scenario.drift_amplitude > 0:
        x = x + scenario.drift_amplitude * np.sin(2 * np.pi * scenario.drift_hz * t + phase)
    return t, x


def generate_signal(scenario: Scenario) -> tuple[MovementSignal, GroundTruth]:
    """Synthesize a raw displacement signal with known cycle times.

    Deterministic per scenario seed.  The signal is tagged mode="vertical"
    (the waveform is a signed displacement).
    """
    rng = np.random.default_rng(scenario.seed)
    truth = _layout(scenario, rng)
    t, x = _waveform(scenario, truth, rng)
    signal = MovementSignal(landmark_id=scenario.landmark_id, mode="vertical",
                            sample_rate=scenario.sample_rate, timestamps=t,
                            samples=x, stage="raw")
    return signal, truth


def _vertical_direction(model: ShapeModel, landmark_id: int) -> np.ndarray:
    """Coefficient direction that moves one landmark by exactly (0, 1, 0).

    Solves basis @ d = e_y for the sigma-scaled landmark basis (minimum-norm
    solution).  Raises when the model cannot express vertical motion at that
    landmark (needs >= 3 components with independent action there).
    """
    basis = model.landmark_basis()[landmark_id]   # (3, K)
    target = np.array([0.0, 1.0, 0.0])
    d, *_ = np.linalg.lstsq(basis, target, rcond=None)
    if np.linalg.norm(basis @ d - target) > 1e-8:
        raise ModelFormatError(
            f"model components cannot move landmark {landmark_id} vertically; "
            f"need at least 3 independent components at that vertex")
    return d


def generate_trajectory(scenario: Scenario, model: ShapeModel,
                        script: PoseScript | None = None
                        ) -> tuple[TrajectorySession, GroundTruth]:
    """Render a scenario as a 2D landmark trajectory.

    The waveform modulates the shape coefficients along the direction that
    displaces the target landmark vertically in model space, so the true
    model-space displacement of that landmark equals the waveform.  Each
    frame is projected through the scripted camera; optional pixel noise is
    added to every projected landmark and a fraction of frames can be dropped
    entirely (they simply have no rows).  RNG order: layout, waveform, pixel
    noise (all frames), drop mask.
    """
    script = script or PoseScript()
    rng = np.random.default_rng(scenario.seed)
    truth = _layout(scenario, rng)
    t, x = _waveform(scenario, truth, rng)
    direction = _vertical_direction(model, scenario.landmark_id)

    n = len(t)
    pixel_noise = (rng.normal(0.0, script.pixel_noise_sd, (n, 68, 2))
                   if script.pixel_noise_sd > 0 else None)
    keep = np.ones(n, dtype=bool)
    if script.drop_fraction > 0:
        keep = rng.random(n) >= script.drop_fraction
        keep[0] = True  # keep the reference frame
        if keep.sum() < 2:
            keep[:2] = True

    frames = []
    for k in range(n):
        if not keep[k]:
            continue
        alpha = x[k] * direction
        landmarks3d = synthesize_shape(model, alpha)
        pts = project(script.camera_at(t[k]), landmarks3d)
        if pixel_noise is not None:
            pts = pts + pixel_noise[k]
        frames.append(LandmarkFrame(frame_index=k, timestamp=float(t[k]),
                                    points=pts, valid=np.ones(68, dtype=bool)))
    session = TrajectorySession(
        source_id=f"synth-{scenario.seed}",
        frames=frames,
        sample_rate_hint=scenario.sample_rate,
        metadata={"generator": "nnsquant.synth", "seed": str(scenario.seed)},
    )
    return session, truth


def score_detection(report: NNSReport, truth: GroundTruth) -> DetectionScore:
    """Compare a report against ground truth.

    Detected cycles (bursts and fragments pooled) are matched one-to-one to
    truth cycles greedily in time order: each detection takes the nearest
    unmatched truth cycle within ±0.15 s.  Conventions: empty truth → recall
    1; empty detections → precision 1; undefined frequency on one side only
    → infinite frequency error.
    """
    detected = sorted(c.time for group in (report.bursts, report.fragments)
                      for b in group for c in b.cycles)
    truth_times = np.asarray(truth.cycle_times, dtype=float)
    unmatched = list(range(len(truth_times)))
    matches = 0
    for td in detected:
        if not unmatched:
            break
        j = min(unmatched, key=lambda j: (abs(truth_times[j] - td), j))
        if abs(truth_times[j] - td) <= MATCH_WINDOW_S:
            unmatched.remove(j)
            matches += 1
    recall = matches / len(truth_times) if len(truth_times) else 1.0
    precision = matches / len(detected) if detected else 1.0

    if report.mean_frequency_hz is None and truth.true_frequency_hz is None:
        freq_error = 0.0
    elif report.mean_frequency_hz is None or truth.true_frequency_hz is None:
        freq_error = float("inf")
    else:
        freq_error = abs(report.mean_frequency_hz - truth.true_frequency_hz)
    return DetectionScore(
        cycle_recall=recall,
        cycle_precision=precision,
        burst_count_error=len(report.bursts) - truth.burst_count,
        frequency_error_hz=freq_error,
        matched_cycles=matches,
    )


# ---------------------------------------------------------------------------
# Scenario / truth / score documents


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "schema_version": SCENARIO_SCHEMA,
        "burst_count": scenario.burst_count,
        "cycles_per_burst_range": list(scenario.cycles_per_burst_range),
        "intra_burst_hz": scenario.intra_burst_hz,
        "pause_s_range": list(scenario.pause_s_range),
        "cycle_amplitude": scenario.cycle_amplitude,
        "noise_sd": scenario.noise_sd,
        "drift_amplitude": scenario.drift_amplitude,
        "drift_hz": scenario.drift_hz,
        "sample_rate": scenario.sample_rate,
        "seed": scenario.seed,
        "landmark_id": scenario.landmark_id,
    }


def scenario_from_dict(doc: dict) -> Scenario:
    _check_schema(doc, SCENARIO_SCHEMA, "scenario")
    try:
        return Scenario(
            burst_count=int(doc["burst_count"]),
            cycles_per_burst_range=tuple(doc["cycles_per_burst_range"]),
            intra_burst_hz=float(doc["intra_burst_hz"]),
            pause_s_range=tuple(doc["pause_s_range"]),
            cycle_amplitude=float(doc["cycle_amplitude"]),
            noise_sd=float(doc["noise_sd"]),
            drift_amplitude=float(doc["drift_amplitude"]),
            drift_hz=float(doc["drift_hz"]),
            sample_rate=float(doc["sample_rate"]),
            seed=int(doc["seed"]),
            landmark_id=int(doc.get("landmark_id", 8)),
        )
    except (KeyError, TypeError) as exc:
        raise ReportFormatError(f"scenario document is malformed: {exc!r}") from exc


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_dict(_load_json(path, "scenario"))


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=1) + "\n",
                          encoding="utf-8")


def truth_to_dict(truth: GroundTruth) -> dict:
    return {
        "schema_version": TRUTH_SCHEMA,
        "cycle_times_s": [float(t) for t in truth.cycle_times],
        "burst_spans_s": [[float(s), float(e)] for s, e in truth.burst_spans],
        "cycles_per_burst": list(truth.cycles_per_burst),
        "true_frequency_hz": truth.true_frequency_hz,
    }


def truth_from_dict(doc: dict) -> GroundTruth:
    _check_schema(doc, TRUTH_SCHEMA, "truth")
    return GroundTruth(
        cycle_times=np.array(doc["cycle_times_s"], dtype=float),
        burst_spans=[(float(s), float(e)) for s, e in doc["burst_spans_s"]],
        cycles_per_burst=[int(c) for c in doc["cycles_per_burst"]],
        true_frequency_hz=(None if doc["true_frequency_hz"] is None
                           else float(doc["true_frequency_hz"])),
    )


def load_truth(path: str | Path) -> GroundTruth:
    return truth_from_dict(_load_json(path, "truth"))


def save_truth(truth: GroundTruth, path: str | Path) -> None:
    Path(path).write_text(json.dumps(truth_to_dict(truth), indent=1) + "\n",
                          encoding="utf-8")


def score_to_dict(score: DetectionScore) -> dict:
    return {
        "schema_version": SCORE_SCHEMA,
        "cycle_recall": score.cycle_recall,
        "cycle_precision": score.cycle_precision,
        "burst_count_error": score.burst_count_error,
        "frequency_error_hz": (None if np.isinf(score.frequency_error_hz)
                               else score.frequency_error_hz),
        "matched_cycles": score.matched_cycles,
    }
