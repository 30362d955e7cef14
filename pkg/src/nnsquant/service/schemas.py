"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class CreateSessionRequest(BaseModel):
    trajectory_csv: str = Field(..., description="Trajectory file content (CSV dialect).")
    model: str = Field(..., description="Registered shape model name.")
    source_id: Optional[str] = Field(None, description="Label for the session origin.")


class SessionResponse(BaseModel):
    session_id: str
    status: Literal["uploaded", "fitting", "fitted", "error"]
    model: str
    source_id: Optional[str] = None
    frame_count: Optional[int] = None
    fitted_frames: Optional[int] = None
    error: Optional[str] = None
    created_at: str


class FilterParams(BaseModel):
    low_cut_hz: float = Field(0.3, gt=0)
    high_cut_hz: float = Field(3.0, gt=0)
    order: int = Field(4, ge=2)
    zero_phase: bool = True


class QuantParamsModel(BaseModel):
    min_peak_distance_s: float = Field(0.2, gt=0)
    max_intra_burst_gap_s: float = Field(1.5, gt=0)
    min_cycles_per_burst: int = Field(6, ge=1)
    threshold_mode: Literal["mean_abs", "mean_raw"] = "mean_abs"


class SignalResponse(BaseModel):
    session_id: str
    landmark_id: int
    mode: str
    unit: str
    sample_rate_hz: float
    timestamps_s: list[float]
    raw: list[Optional[float]]
    filtered: Optional[list[Optional[float]]] = None
    interpolated: list[bool]
    filter: Optional[FilterParams] = None


class QuantifyRequest(BaseModel):
    landmark_id: int = Field(8, ge=0, le=67)
    mode: Literal["euclidean", "horizontal", "vertical"] = "euclidean"
    filter: FilterParams = Field(default_factory=FilterParams)
    quant: QuantParamsModel = Field(default_factory=QuantParamsModel)


class CycleModel(BaseModel):
    index: int
    time_s: float
    amplitude: float


class BurstModel(BaseModel):
    start_time_s: float
    end_time_s: float
    duration_s: float
    cycle_count: int
    cycles: list[CycleModel]


class ReportResponse(BaseModel):
    session_id: str
    source_id: Optional[str] = None
    landmark_id: int
    mode: str
    unit: str
    sample_rate_hz: Optional[float] = None
    session_duration_s: float
    parameters: QuantParamsModel
    filter: FilterParams
    bursts: list[BurstModel]
    fragments: list[BurstModel]
    cycles_per_burst: list[int]
    burst_durations_s: list[float]
    bursts_per_minute: float
    cycles_per_minute: float
    mean_frequency_hz: Optional[float] = None
    frequency_defined: bool
    mean_cycle_amplitude: Optional[float] = None
    total_cycles_detected: int
    segments_analyzed: int
    segments_skipped: int


class LandmarkPoint(BaseModel):
    id: int
    x: float
    y: float
    region: str


class AnnotationResponse(BaseModel):
    landmarks: list[LandmarkPoint]
    default_landmark_id: int
    num_landmarks: int
