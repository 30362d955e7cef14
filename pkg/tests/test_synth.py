"""Synthetic session generator and detection scoring.

The generator is itself test infrastructure, so it gets its own checks:
deterministic replay, analytically known layouts, and a soundness run proving
that a noiseless scenario is recovered exactly by the filter + detector.
"""

import numpy as np
import pytest

from nnsquant.errors import ModelFormatError, ReportVersionError
from nnsquant.quant import QuantParams, detect_cycles, quantify, segment_bursts
from nnsquant.shape_model import make_synthetic_model
from nnsquant.signals import FilterSpec, apply_bandpass, design_bandpass
from nnsquant.synth import (
    DetectionScore,
    GroundTruth,
    PoseScript,
    Scenario,
    generate_signal,
    generate_trajectory,
    load_scenario,
    load_truth,
    save_scenario,
    save_truth,
    scenario_from_dict,
    scenario_to_dict,
    score_detection,
    score_to_dict,
    truth_from_dict,
    truth_to_dict,
)


def clean_scenario(**kw):
    defaults = dict(burst_count=1, cycles_per_burst_range=(8, 8),
                    intra_burst_hz=2.0, pause_s_range=(2.0, 2.0),
                    noise_sd=0.0, drift_amplitude=0.0, seed=5)
    defaults.update(kw)
    return Scenario(**defaults)


def analyze(signal, params=None):
    kernel = design_bandpass(FilterSpec(), signal.sample_rate)
    filtered = apply_bandpass(signal, kernel)
    cycles = detect_cycles(filtered, params)
    bursts, fragments = segment_bursts(cycles, params)
    duration = signal.timestamps[-1] - signal.timestamps[0] + 1.0 / signal.sample_rate
    return quantify(filtered, cycles, bursts, duration, params, fragments=fragments)


# ---------------------------------------------------------------------------
# layout / waveform


def test_fixed_layout_is_analytic():
    sig, truth = generate_signal(clean_scenario())
    # lead-in pause is pinned to 2.0 s; 8 cycles at 2 Hz
    np.testing.assert_allclose(truth.cycle_times, 2.0 + 0.5 * np.arange(8))
    assert truth.burst_spans == [(2.0, 5.5)]
    assert truth.cycles_per_burst == [8]
    assert truth.true_frequency_hz == pytest.approx(8.0 / 3.5)
    # waveform: unit raised-cosine at each cycle time, zero in the gaps
    i = int(2.0 * 30)
    assert sig.samples[i] == pytest.approx(1.0, abs=1e-12)
    assert sig.samples[int(1.0 * 30)] == 0.0  # mid lead-in
    assert sig.stage == "raw"
    assert sig.timestamps[-1] == pytest.approx(5.5 + 2.0)  # tail appended


def test_generation_is_deterministic():
    a_sig, a_truth = generate_signal(Scenario(seed=42))
    b_sig, b_truth = generate_signal(Scenario(seed=42))
    np.testing.assert_array_equal(a_sig.samples, b_sig.samples)
    np.testing.assert_array_equal(a_truth.cycle_times, b_truth.cycle_times)
    c_sig, _ = generate_signal(Scenario(seed=43))
    assert not np.array_equal(a_sig.samples, c_sig.samples)


def test_noise_toggle_does_not_shift_layout():
    # drawing order is fixed, so turning noise off must not move the drift
    # phase or the cycle times
    loud, truth_loud = generate_signal(Scenario(seed=9, noise_sd=0.1))
    quiet, truth_quiet = generate_signal(Scenario(seed=9, noise_sd=0.0))
    np.testing.assert_array_equal(truth_loud.cycle_times, truth_quiet.cycle_times)
    diff = loud.samples - quiet.samples
    assert diff.std() == pytest.approx(0.1, abs=0.01)  # pure noise left


def test_pause_bounds_respected():
    for seed in range(10):
        _, truth = generate_signal(Scenario(burst_count=5, seed=seed,
                                            pause_s_range=(2.0, 4.0)))
        starts = [s for s, _ in truth.burst_spans]
        ends = [e for _, e in truth.burst_spans]
        assert starts[0] >= 2.0 - 1e-12
        for end, nxt in zip(ends[:-1], starts[1:]):
            assert 2.0 - 1e-12 <= nxt - end <= 4.0 + 1e-12
        for (s, e), count in zip(truth.burst_spans, truth.cycles_per_burst):
            assert 6 <= count <= 12
            assert e - s == pytest.approx((count - 1) * 0.5)


def test_empty_scenario():
    sig, truth = generate_signal(Scenario(burst_count=0, seed=1))
    assert truth.burst_count == 0
    assert truth.true_frequency_hz is None
    assert len(sig) > 0


def test_scenario_validation():
    with pytest.raises(ValueError, match="cycles_per_burst_range"):
        Scenario(cycles_per_burst_range=(0, 5))
    with pytest.raises(ValueError, match="intra_burst_hz"):
        Scenario(intra_burst_hz=0.0)
    with pytest.raises(ValueError, match="pause_s_range"):
        Scenario(pause_s_range=(0.0, 1.0))
    with pytest.raises(ValueError, match="drift_hz"):
        Scenario(drift_hz=0.2)
    with pytest.raises(ValueError, match="landmark_id"):
        Scenario(landmark_id=68)


# ---------------------------------------------------------------------------
# soundness: the analysis chain recovers a clean scenario exactly


def test_noiseless_scenario_recovered_exactly():
    scenario = clean_scenario(burst_count=3, cycles_per_burst_range=(6, 10),
                              drift_amplitude=0.3, seed=11)
    sig, truth = generate_signal(scenario)
    report = analyze(sig)
    score = score_detection(report, truth)
    assert score.cycle_recall == 1.0
    assert score.cycle_precision == 1.0
    assert score.burst_count_error == 0
    assert report.cycles_per_burst == truth.cycles_per_burst
    assert score.frequency_error_hz < 0.05


def test_drift_alone_forms_no_bursts():
    # the threshold is relative, so the filtered drift residue may still give
    # a stray local maximum or two -- but never a burst
    scenario = Scenario(burst_count=0, noise_sd=0.0, drift_amplitude=0.5, seed=3)
    sig, truth = generate_signal(scenario)
    report = analyze(sig)
    assert report.bursts == []
    assert not report.frequency_defined
    assert score_detection(report, truth).frequency_error_hz == 0.0


# ---------------------------------------------------------------------------
# scoring


def fake_report(times, min_cycles=1):
    """Wrap given detection times into a report via the real segmentation."""
    from nnsquant.quant import CycleEvent
    from nnsquant.signals import MovementSignal

    cycles = [CycleEvent(index=i, time=float(t), amplitude=1.0)
              for i, t in enumerate(times)]
    params = QuantParams(min_cycles_per_burst=min_cycles)
    bursts, fragments = segment_bursts(cycles, params)
    sig = MovementSignal(landmark_id=8, mode="vertical", sample_rate=30.0,
                         timestamps=np.arange(10) / 30.0, samples=np.zeros(10),
                         stage="filtered")
    return quantify(sig, cycles, bursts, 60.0, params, fragments=fragments)


def truth_at(times, spans=None, counts=None, freq=None):
    return GroundTruth(cycle_times=np.asarray(times, dtype=float),
                       burst_spans=spans or [], cycles_per_burst=counts or [],
                       true_frequency_hz=freq)


def test_perfect_match_scores_one():
    times = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5]
    score = score_detection(fake_report(times), truth_at(times, spans=[(1.0, 3.5)],
                                                         counts=[6], freq=6 / 2.5))
    assert score.cycle_recall == 1.0
    assert score.cycle_precision == 1.0
    assert score.matched_cycles == 6


def test_shifted_detections_score_zero_recall():
    times = np.array([1.0, 1.5, 2.0, 2.5, 3.0, 3.5])
    score = score_detection(fake_report(times + 0.3), truth_at(times))
    assert score.cycle_recall == 0.0
    assert score.cycle_precision == 0.0


def test_match_window_boundary():
    score = score_detection(fake_report([1.14]), truth_at([1.0]))
    assert score.matched_cycles == 1  # 0.14 < 0.15
    score = score_detection(fake_report([1.16]), truth_at([1.0]))
    assert score.matched_cycles == 0


def test_matching_is_one_to_one():
    # two detections bracket a single truth cycle: only one may match
    score = score_detection(fake_report([0.95, 1.05]), truth_at([1.0]))
    assert score.matched_cycles == 1
    assert score.cycle_recall == 1.0
    assert score.cycle_precision == 0.5


def test_empty_conventions():
    no_truth = truth_at([])
    assert score_detection(fake_report([]), no_truth).cycle_recall == 1.0
    assert score_detection(fake_report([]), no_truth).cycle_precision == 1.0
    assert score_detection(fake_report([1.0]), no_truth).cycle_recall == 1.0
    assert score_detection(fake_report([1.0]), no_truth).cycle_precision == 0.0
    assert score_detection(fake_report([]), truth_at([1.0])).cycle_recall == 0.0
    assert score_detection(fake_report([]), truth_at([1.0])).cycle_precision == 1.0


def test_frequency_error_conventions():
    # report with no bursts (all fragments) has undefined frequency
    sparse = fake_report([1.0], min_cycles=6)
    assert sparse.mean_frequency_hz is None
    assert score_detection(sparse, truth_at([1.0], freq=2.0)).frequency_error_hz \
        == float("inf")
    assert score_detection(sparse, truth_at([1.0], freq=None)).frequency_error_hz == 0.0
    dense = fake_report(np.arange(6) * 0.5 + 1.0, min_cycles=6)
    assert score_detection(dense, truth_at([], freq=2.4)).frequency_error_hz \
        == pytest.approx(0.0, abs=1e-12)


def test_burst_count_error_sign():
    dense = fake_report(np.arange(6) * 0.5, min_cycles=6)
    assert score_detection(dense, truth_at([], spans=[(0, 1), (2, 3)],
                                           counts=[6, 6])).burst_count_error == -1


def test_score_to_dict_maps_inf_to_null():
    score = DetectionScore(cycle_recall=1.0, cycle_precision=1.0,
                           burst_count_error=0, frequency_error_hz=float("inf"))
    assert score_to_dict(score)["frequency_error_hz"] is None


# ---------------------------------------------------------------------------
# trajectory rendering


def test_static_camera_renders_waveform_linearly(wide_model):
    scenario = clean_scenario(seed=21)
    script = PoseScript(scale=1.5, center=(320.0, 240.0))
    session, truth = generate_trajectory(scenario, wide_model, script)
    sig, _ = generate_signal(scenario)
    assert len(session) == len(sig)
    # with identity rotation the landmark's image y is an affine function of
    # the waveform: y_px = 1.5 * (y_model + x_t) + 240
    ys = np.array([f.points[scenario.landmark_id, 1] for f in session.frames])
    expected = ys[0] + 1.5 * (sig.samples - sig.samples[0])
    np.testing.assert_allclose(ys, expected, atol=1e-9)


def test_trajectory_deterministic(wide_model):
    scenario = Scenario(seed=33, burst_count=2)
    script = PoseScript(pixel_noise_sd=0.5, drop_fraction=0.1)
    a, _ = generate_trajectory(scenario, wide_model, script)
    b, _ = generate_trajectory(scenario, wide_model, script)
    assert [f.frame_index for f in a.frames] == [f.frame_index for f in b.frames]
    for fa, fb in zip(a.frames, b.frames):
        np.testing.assert_array_equal(fa.points, fb.points)


def test_drop_fraction_keeps_reference_frame(wide_model):
    scenario = Scenario(seed=2, burst_count=2)
    session, _ = generate_trajectory(scenario, wide_model,
                                     PoseScript(drop_fraction=0.4))
    indices = [f.frame_index for f in session.frames]
    assert indices[0] == 0
    full, _ = generate_trajectory(scenario, wide_model, PoseScript())
    kept = len(indices) / len(full)
    assert 0.45 < kept < 0.75  # ~60% expected


def test_pixel_noise_magnitude(wide_model):
    scenario = clean_scenario(seed=4)
    clean, _ = generate_trajectory(scenario, wide_model, PoseScript())
    noisy, _ = generate_trajectory(scenario, wide_model,
                                   PoseScript(pixel_noise_sd=0.5))
    diffs = np.concatenate([(a.points - b.points).ravel()
                            for a, b in zip(noisy.frames, clean.frames)])
    assert diffs.std() == pytest.approx(0.5, abs=0.02)


def test_vertical_direction_needs_enough_components():
    thin = make_synthetic_model(num_vertices=80, num_components=2, seed=3)
    with pytest.raises(ModelFormatError, match="vertically"):
        generate_trajectory(clean_scenario(), thin)


def test_moving_camera_changes_pixels_not_truth(wide_model):
    scenario = clean_scenario(seed=8)
    still, truth_a = generate_trajectory(scenario, wide_model, PoseScript())
    moving, truth_b = generate_trajectory(
        scenario, wide_model,
        PoseScript(yaw_amplitude_rad=0.3, pitch_amplitude_rad=0.15,
                   sway_amplitude_px=20.0))
    np.testing.assert_array_equal(truth_a.cycle_times, truth_b.cycle_times)
    assert not np.allclose(still.frames[50].points, moving.frames[50].points)


# ---------------------------------------------------------------------------
# document round-trips


def test_scenario_roundtrip(tmp_path):
    scenario = Scenario(burst_count=7, seed=123, noise_sd=0.25,
                        cycles_per_burst_range=(7, 9))
    path = tmp_path / "scenario.json"
    save_scenario(scenario, path)
    assert load_scenario(path) == scenario
    with pytest.raises(ReportVersionError):
        scenario_from_dict({**scenario_to_dict(scenario),
                            "schema_version": "nns-scenario/9"})


def test_truth_roundtrip(tmp_path):
    _, truth = generate_signal(Scenario(seed=77))
    path = tmp_path / "truth.json"
    save_truth(truth, path)
    loaded = load_truth(path)
    np.testing.assert_array_equal(loaded.cycle_times, truth.cycle_times)
    assert loaded.burst_spans == truth.burst_spans
    assert loaded.cycles_per_burst == truth.cycles_per_burst
    assert loaded.true_frequency_hz == truth.true_frequency_hz
    # None frequency survives the trip
    _, empty = generate_signal(Scenario(burst_count=0, seed=1))
    save_truth(empty, path)
    assert load_truth(path).true_frequency_hz is None
    assert truth_from_dict(truth_to_dict(empty)).burst_count == 0
