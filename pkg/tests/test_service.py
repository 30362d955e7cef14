"""HTTP service: session lifecycle, deterministic payloads, error mapping."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from nnsquant.io_formats import write_trajectory
from nnsquant.pipeline import PipelineConfig, run_pipeline
from nnsquant.service.app import create_app
from nnsquant.signals import FilterSpec
from nnsquant.synth import PoseScript, Scenario, generate_trajectory

SCENARIO = Scenario(burst_count=2, cycles_per_burst_range=(6, 9),
                    pause_s_range=(2.5, 3.0), noise_sd=0.0,
                    drift_amplitude=0.2, seed=23)


@pytest.fixture(scope="module")
def rendered(wide_model):
    return generate_trajectory(SCENARIO, wide_model, PoseScript())


@pytest.fixture(scope="module")
def csv_text(rendered, tmp_path_factory):
    path = tmp_path_factory.mktemp("svc") / "clip.csv"
    write_trajectory(rendered[0], path)
    return path.read_text(encoding="utf-8")


@pytest.fixture(scope="module")
def service(wide_model, tmp_path_factory):
    workdir = tmp_path_factory.mktemp("svc-work")
    app = create_app(workdir=workdir, models={"demo": wide_model})
    client = TestClient(app)
    return client, app, workdir


@pytest.fixture(scope="module")
def fitted_session(service, csv_text):
    client, app, _ = service
    response = client.post("/sessions", json={
        "trajectory_csv": csv_text, "model": "demo", "source_id": "clip-23"})
    assert response.status_code == 201, response.text
    body = response.json()
    assert body["status"] in ("uploaded", "fitting")
    session_id = body["session_id"]
    meta = app.state.store.wait_until_settled(session_id)
    assert meta["status"] == "fitted", meta
    return session_id


# ---------------------------------------------------------------------------
# lifecycle


def test_session_metadata_after_fit(service, fitted_session, rendered):
    client, _, _ = service
    response = client.get(f"/sessions/{fitted_session}")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "fitted"
    assert body["model"] == "demo"
    # the file's own "# source_id:" header outranks the request field
    assert body["source_id"] == "synth-23"
    assert body["frame_count"] == len(rendered[0])
    assert body["fitted_frames"] == len(rendered[0])
    assert body["error"] is None


def test_unknown_session_is_404(service):
    client, _, _ = service
    response = client.get("/sessions/doesnotexist")
    assert response.status_code == 404
    assert "doesnotexist" in response.json()["detail"]


def test_unknown_model_is_422(service, csv_text):
    client, _, _ = service
    response = client.post("/sessions", json={
        "trajectory_csv": csv_text, "model": "nope"})
    assert response.status_code == 422
    detail = response.json()["detail"][0]
    assert detail["loc"] == ["body", "model"]
    assert "demo" in detail["msg"]  # registered models are listed


def test_malformed_csv_is_400_with_line(service):
    client, _, _ = service
    bad = "frame_index,timestamp_s,landmark_id,x_px,y_px\n0,0.0,99,1.0,2.0\n"
    response = client.post("/sessions", json={
        "trajectory_csv": bad, "model": "demo"})
    assert response.status_code == 400
    body = response.json()
    assert body["error"] == "TrajectoryFormatError"
    assert "line 2" in body["message"]


def test_not_yet_fitted_is_409(service, csv_text):
    client, app, _ = service
    store = app.state.store
    # deterministic pending state: a session directory frozen mid-fit
    session_id = "pending0" * 4
    (store.sessions_dir / session_id).mkdir(parents=True)
    store._write_meta(session_id, {
        "session_id": session_id, "status": "fitting", "model": "demo",
        "source_id": None, "frame_count": 2, "fitted_frames": None,
        "error": None, "created_at": "2026-01-01T00:00:00+00:00"})
    response = client.get(f"/sessions/{session_id}/signal")
    assert response.status_code == 409
    assert response.json()["detail"]["status"] == "fitting"
    response = client.post(f"/sessions/{session_id}/quantify",
                           json={"landmark_id": 8, "mode": "vertical",
                                 "filter": {}, "quant": {}})
    assert response.status_code == 409


def test_unfittable_upload_ends_in_error_status(service):
    client, app, _ = service
    rows = ["frame_index,timestamp_s,landmark_id,x_px,y_px"]
    for frame in range(3):
        for lid in range(3):  # 3 valid landmarks < the 4-point minimum
            rows.append(f"{frame},{frame / 30.0},{lid},{lid * 10.0},{frame * 1.0}")
    response = client.post("/sessions", json={
        "trajectory_csv": "\n".join(rows), "model": "demo"})
    assert response.status_code == 201
    session_id = response.json()["session_id"]
    meta = app.state.store.wait_until_settled(session_id)
    assert meta["status"] == "error"
    assert "fittable" in meta["error"]
    response = client.get(f"/sessions/{session_id}/signal")
    assert response.status_code == 409


# ---------------------------------------------------------------------------
# signal endpoint


def test_signal_raw_only(service, fitted_session, rendered):
    client, _, _ = service
    response = client.get(f"/sessions/{fitted_session}/signal",
                          params={"mode": "vertical"})
    assert response.status_code == 200
    body = response.json()
    assert body["session_id"] == fitted_session
    assert body["landmark_id"] == 8
    assert body["mode"] == "vertical"
    n = len(rendered[0])
    assert len(body["timestamps_s"]) == n
    assert len(body["raw"]) == n
    assert len(body["interpolated"]) == n
    assert body["filtered"] is None
    assert body["filter"] is None
    assert body["raw"][0] == 0.0  # reference frame
    assert body["sample_rate_hz"] == pytest.approx(30.0)


def test_signal_with_filter(service, fitted_session):
    client, _, _ = service
    response = client.get(f"/sessions/{fitted_session}/signal",
                          params={"mode": "vertical", "low": 0.3, "high": 3.0})
    assert response.status_code == 200
    body = response.json()
    assert body["filter"] == {"low_cut_hz": 0.3, "high_cut_hz": 3.0,
                              "order": 4, "zero_phase": True}
    filtered = np.array(body["filtered"], dtype=float)
    raw = np.array(body["raw"], dtype=float)
    assert len(filtered) == len(raw)
    # band-pass removes the mean
    assert abs(filtered.mean()) < abs(raw.mean())


def test_signal_is_deterministic(service, fitted_session):
    client, _, _ = service
    params = {"mode": "vertical", "low": 0.3, "high": 3.0}
    first = client.get(f"/sessions/{fitted_session}/signal", params=params)
    second = client.get(f"/sessions/{fitted_session}/signal", params=params)
    assert first.content == second.content


def test_signal_query_validation(service, fitted_session):
    client, _, _ = service
    response = client.get(f"/sessions/{fitted_session}/signal",
                          params={"mode": "diagonal"})
    assert response.status_code == 422
    assert response.json()["detail"][0]["loc"] == ["query", "mode"]

    response = client.get(f"/sessions/{fitted_session}/signal",
                          params={"low": 0.3, "high": 20.0})
    assert response.status_code == 422
    detail = response.json()["detail"][0]
    assert detail["loc"] == ["query", "high"]
    assert "Nyquist" in detail["msg"]

    response = client.get(f"/sessions/{fitted_session}/signal",
                          params={"low": 0.3, "high": 3.0, "order": 3})
    assert response.status_code == 422
    assert response.json()["detail"][0]["loc"] == ["query", "order"]

    response = client.get(f"/sessions/{fitted_session}/signal",
                          params={"landmark": 68})
    assert response.status_code == 422


# ---------------------------------------------------------------------------
# quantify endpoint


def quantify_body(**kw):
    body = {"landmark_id": 8, "mode": "vertical", "filter": {}, "quant": {}}
    body.update(kw)
    return body


def test_quantify_matches_library_pipeline(service, fitted_session, rendered,
                                           wide_model):
    client, _, _ = service
    response = client.post(f"/sessions/{fitted_session}/quantify",
                           json=quantify_body())
    assert response.status_code == 200, response.text
    body = response.json()

    config = PipelineConfig(landmark_id=8, mode="vertical")
    expected = run_pipeline(rendered[0], wide_model, config).report
    assert body["session_id"] == fitted_session
    assert body["total_cycles_detected"] == expected.total_cycles_detected
    assert body["cycles_per_burst"] == expected.cycles_per_burst
    assert body["mean_frequency_hz"] == pytest.approx(expected.mean_frequency_hz)
    assert body["bursts_per_minute"] == pytest.approx(expected.bursts_per_minute)
    assert body["session_duration_s"] == pytest.approx(expected.session_duration_s)
    assert len(body["bursts"]) == len(expected.bursts)
    assert body["bursts"][0]["cycles"][0]["time_s"] == pytest.approx(
        expected.bursts[0].cycles[0].time)
    assert body["parameters"]["min_cycles_per_burst"] == 6
    assert body["frequency_defined"] is True


def test_quantify_is_deterministic(service, fitted_session):
    client, _, _ = service
    first = client.post(f"/sessions/{fitted_session}/quantify",
                        json=quantify_body())
    second = client.post(f"/sessions/{fitted_session}/quantify",
                         json=quantify_body())
    assert first.content == second.content


def test_quantify_parameters_change_output(service, fitted_session):
    client, _, _ = service
    strict = client.post(
        f"/sessions/{fitted_session}/quantify",
        json=quantify_body(quant={"min_cycles_per_burst": 20})).json()
    assert strict["bursts"] == []
    assert strict["mean_frequency_hz"] is None
    assert strict["frequency_defined"] is False
    assert len(strict["fragments"]) > 0


def test_quantify_filter_validation(service, fitted_session):
    client, _, _ = service
    response = client.post(
        f"/sessions/{fitted_session}/quantify",
        json=quantify_body(filter={"high_cut_hz": 20.0}))
    assert response.status_code == 422
    detail = response.json()["detail"][0]
    assert detail["loc"] == ["body", "filter"]
    assert "Nyquist" in detail["msg"]
    # schema-level checks are caught by pydantic before the pipeline runs
    response = client.post(
        f"/sessions/{fitted_session}/quantify",
        json=quantify_body(filter={"low_cut_hz": -1.0}))
    assert response.status_code == 422
    response = client.post(
        f"/sessions/{fitted_session}/quantify",
        json=quantify_body(landmark_id=99))
    assert response.status_code == 422


# ---------------------------------------------------------------------------
# annotation endpoint


def test_annotation_document(service):
    client, _, _ = service
    response = client.get("/annotation")
    assert response.status_code == 200
    body = response.json()
    assert body["num_landmarks"] == 68
    assert body["default_landmark_id"] == 8
    assert len(body["landmarks"]) == 68
    ids = [lm["id"] for lm in body["landmarks"]]
    assert ids == list(range(68))
    regions = {lm["region"] for lm in body["landmarks"]}
    assert "jaw" in regions and "outer_lip" in regions
    for lm in body["landmarks"]:
        assert -1.0 <= lm["x"] <= 1.0
        assert -1.0 <= lm["y"] <= 1.0


# ---------------------------------------------------------------------------
# persistence


def test_sessions_persist_as_files(service, fitted_session):
    _, _, workdir = service
    sdir = workdir / "sessions" / fitted_session
    assert (sdir / "trajectory.csv").exists()
    assert (sdir / "fits.json").exists()
    assert (sdir / "meta.json").exists()


def test_new_app_instance_serves_old_sessions(service, fitted_session,
                                              wide_model):
    client, _, workdir = service
    fresh = TestClient(create_app(workdir=workdir, models={"demo": wide_model}))
    params = {"mode": "vertical", "low": 0.3, "high": 3.0}
    old = client.get(f"/sessions/{fitted_session}/signal", params=params)
    new = fresh.get(f"/sessions/{fitted_session}/signal", params=params)
    assert new.status_code == 200
    assert new.content == old.content
    report_old = client.post(f"/sessions/{fitted_session}/quantify",
                             json=quantify_body())
    report_new = fresh.post(f"/sessions/{fitted_session}/quantify",
                            json=quantify_body())
    assert report_new.content == report_old.content


def test_gappy_session_reports_segments(service, rendered, wide_model,
                                        tmp_path):
    client, app, _ = service
    session, truth = rendered
    ts = session.timestamps()
    mid = (truth.burst_spans[0][1] + truth.burst_spans[1][0]) / 2.0
    keep = (ts < mid - 0.6) | (ts > mid + 0.6)
    frames = [f for f, k in zip(session.frames, keep) if k]
    gappy = type(session)(source_id="gappy", frames=frames)
    path = tmp_path / "gappy.csv"
    write_trajectory(gappy, path)
    response = client.post("/sessions", json={
        "trajectory_csv": path.read_text(encoding="utf-8"), "model": "demo"})
    session_id = response.json()["session_id"]
    meta = app.state.store.wait_until_settled(session_id)
    assert meta["status"] == "fitted"

    signal = client.get(f"/sessions/{session_id}/signal",
                        params={"mode": "vertical"}).json()
    assert any(v is None for v in signal["raw"])  # the hole stays visible

    report = client.post(f"/sessions/{session_id}/quantify",
                         json=quantify_body()).json()
    assert report["segments_analyzed"] == 2
    assert report["total_cycles_detected"] == len(truth.cycle_times)
