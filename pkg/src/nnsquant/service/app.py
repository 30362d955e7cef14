"""FastAPI application wrapping the analysis pipeline.

Endpoints
---------
POST /sessions                      upload a trajectory; fitting runs async
GET  /sessions/{id}                 lifecycle status
GET  /sessions/{id}/signal          raw (and optionally filtered) series
POST /sessions/{id}/quantify        run detection with explicit parameters
GET  /annotation                    68-landmark ids + schematic coordinates

Responses are deterministic: identical requests against the same session
return byte-identical bodies (fits are computed once and cached).
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse

from ..annotation import DEFAULT_LANDMARK_ID, NUM_LANDMARKS, landmark_schematic
from ..errors import FilterDesignError, NNSError, StageError
from ..io_formats import parse_trajectory_text, report_to_dict
from ..pipeline import PipelineConfig, run_pipeline
from ..quant import QuantParams
from ..signals import (
    FilterSpec,
    MODES,
    apply_bandpass,
    design_bandpass,
    displacement_signal,
    split_segments,
)
from .schemas import (
    AnnotationResponse,
    CreateSessionRequest,
    FilterParams,
    QuantifyRequest,
    ReportResponse,
    SessionResponse,
    SignalResponse,
)
from .store import SessionNotReadyError, SessionStore, UnknownSessionError


def _validation_error(loc: list, message: str) -> HTTPException:
    return HTTPException(status_code=422, detail=[
        {"loc": loc, "msg": message, "type": "value_error"}])


def _nan_to_none(values) -> list:
    return [None if (v is None or not math.isfinite(v)) else float(v) for v in values]


def _meta_response(meta: dict) -> SessionResponse:
    return SessionResponse(**meta)


def create_app(workdir: str | Path, model_paths: dict | None = None,
               models: dict | None = None, ui_dir: str | Path | None = None,
               max_workers: int = 2) -> FastAPI:
    """Build the service.

    ``model_paths`` maps registered model names to files on disk; ``models``
    may carry already-loaded ShapeModel objects (tests use this).
    """
    registry = dict(models or {})
    if model_paths:
        store = SessionStore.from_paths(workdir, model_paths, max_workers=max_workers)
        store.models.update(registry)
    else:
        store = SessionStore(workdir, registry, max_workers=max_workers)

    app = FastAPI(title="nnsquant service", version="0.1.0")
    app.state.store = store

    @app.exception_handler(NNSError)
    async def _nns_error_handler(_, exc: NNSError):
        return JSONResponse(status_code=400, content={
            "error": type(exc).__name__, "message": str(exc)})

    @app.exception_handler(StageError)
    async def _stage_error_handler(_, exc: StageError):
        return JSONResponse(status_code=400, content={
            "error": type(exc.cause).__name__, "stage": exc.stage,
            "message": str(exc.cause)})

    @app.post("/sessions", response_model=SessionResponse, status_code=201)
    def create_session(request: CreateSessionRequest):
        if request.model not in store.models:
            known = sorted(store.models)
            raise _validation_error(["body", "model"],
                                    f"unknown model {request.model!r}; "
                                    f"registered models: {known}")
        try:
            meta = store.create(request.trajectory_csv, request.model,
                                request.source_id)
        except KeyError:
            raise _validation_error(["body", "model"],
                                    f"unknown model {request.model!r}")
        return _meta_response(meta)

    @app.get("/sessions/{session_id}", response_model=SessionResponse)
    def get_session(session_id: str):
        try:
            return _meta_response(store.get_meta(session_id))
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    def _fits_or_error(session_id: str):
        try:
            return store.get_fits(session_id)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except SessionNotReadyError as exc:
            raise HTTPException(status_code=409, detail=exc.meta)

    @app.get("/sessions/{session_id}/signal", response_model=SignalResponse,
             response_model_exclude_none=False)
    def get_signal(
        session_id: str,
        landmark: int = Query(DEFAULT_LANDMARK_ID, ge=0, le=NUM_LANDMARKS - 1),
        mode: str = Query("euclidean"),
        low: Optional[float] = Query(None),
        high: Optional[float] = Query(None),
        order: int = Query(4),
        causal: bool = Query(False),
    ):
        if mode not in MODES:
            raise _validation_error(["query", "mode"],
                                    f"mode must be one of {list(MODES)}")
        fits, timestamps = _fits_or_error(session_id)
        raw = displacement_signal(fits, landmark, mode, timestamps=timestamps)

        filtered_payload = None
        spec_payload = None
        if low is not None or high is not None:
            spec = FilterSpec(low_cut_hz=low if low is not None else 0.3,
                              high_cut_hz=high if high is not None else 3.0,
                              order=order, zero_phase=not causal)
            field_for = {"low_cut_hz": "low", "high_cut_hz": "high", "order": "order"}
            try:
                kernel = design_bandpass(spec, raw.sample_rate)
            except FilterDesignError as exc:
                loc = ["query", "low"]
                for attr, qname in field_for.items():
                    if attr in str(exc):
                        loc = ["query", qname]
                raise _validation_error(loc, str(exc))
            assembled = np.full(len(raw), np.nan)
            for seg in split_segments(raw, min_samples=1):
                if len(seg) <= kernel.pad_samples:
                    continue
                out = apply_bandpass(seg, kernel)
                start = int(np.searchsorted(raw.timestamps,
                                            seg.timestamps[0] - 1e-12))
                assembled[start:start + len(seg)] = out.samples
            filtered_payload = _nan_to_none(assembled)
            spec_payload = FilterParams(low_cut_hz=spec.low_cut_hz,
                                        high_cut_hz=spec.high_cut_hz,
                                        order=spec.order,
                                        zero_phase=spec.zero_phase)

        return SignalResponse(
            session_id=session_id,
            landmark_id=raw.landmark_id,
            mode=raw.mode,
            unit="model units",
            sample_rate_hz=float(raw.sample_rate),
            timestamps_s=[float(t) for t in raw.timestamps],
            raw=_nan_to_none(raw.samples),
            filtered=filtered_payload,
            interpolated=[bool(b) for b in raw.interpolated],
            filter=spec_payload,
        )

    @app.post("/sessions/{session_id}/quantify", response_model=ReportResponse)
    def quantify_session(session_id: str, request: QuantifyRequest):
        fits, _ = _fits_or_error(session_id)
        meta = store.get_meta(session_id)
        sdir = store.sessions_dir / session_id
        session = parse_trajectory_text(
            (sdir / "trajectory.csv").read_text(encoding="utf-8"),
            source_id=meta.get("source_id") or "upload")
        spec = FilterSpec(low_cut_hz=request.filter.low_cut_hz,
                          high_cut_hz=request.filter.high_cut_hz,
                          order=request.filter.order,
                          zero_phase=request.filter.zero_phase)
        params = QuantParams(
            min_peak_distance_s=request.quant.min_peak_distance_s,
            max_intra_burst_gap_s=request.quant.max_intra_burst_gap_s,
            min_cycles_per_burst=request.quant.min_cycles_per_burst,
            threshold_mode=request.quant.threshold_mode)
        config = PipelineConfig(landmark_id=request.landmark_id, mode=request.mode,
                                filter_spec=spec, quant=params)
        try:
            result = run_pipeline(session, model=None, config=config, fits=fits)
        except StageError as exc:
            if isinstance(exc.cause, FilterDesignError):
                raise _validation_error(["body", "filter"], str(exc.cause))
            raise
        doc = report_to_dict(result.report)
        doc.pop("schema_version")
        doc["session_id"] = session_id
        return ReportResponse(**doc)

    @app.get("/annotation", response_model=AnnotationResponse)
    def annotation():
        return AnnotationResponse(landmarks=landmark_schematic(),
                                  default_landmark_id=DEFAULT_LANDMARK_ID,
                                  num_landmarks=NUM_LANDMARKS)

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
