"""Contact-less quantification of non-nutritive sucking (NNS).

Pipeline: 2D facial-landmark trajectories are fitted per frame with an affine
camera and a linear 3D shape model; re-synthesizing the landmarks from the
fitted coefficients removes head and camera motion.  The displacement of a
chosen landmark is band-pass filtered, suck cycles are detected as
above-average peaks, grouped into bursts, and summarized in an outcome
report.
"""

from .annotation import DEFAULT_LANDMARK_ID, landmark_schematic
from .camera_fit import (
    AffineCamera,
    FitConfig,
    FrameFit,
    estimate_affine_camera,
    fit_frame,
    fit_shape_coefficients,
    project,
)
from .errors import NNSError, StageError
from .pipeline import PipelineConfig, PipelineResult, fit_session, run_pipeline
from .quant import (
    Burst,
    CycleEvent,
    NNSReport,
    QuantParams,
    detect_cycles,
    quantify,
    segment_bursts,
)
from .shape_model import (
    ShapeModel,
    load_shape_model,
    make_synthetic_model,
    save_shape_model,
    synthesize_shape,
)
from .signals import (
    FilterKernel,
    FilterSpec,
    MovementSignal,
    apply_bandpass,
    design_bandpass,
    displacement_signal,
    split_segments,
)
from .synth import (
    DetectionScore,
    GroundTruth,
    PoseScript,
    Scenario,
    generate_signal,
    generate_trajectory,
    score_detection,
)

__version__ = "0.1.0"

__all__ = [
    "AffineCamera", "Burst", "CycleEvent", "DEFAULT_LANDMARK_ID",
    "DetectionScore", "FilterKernel", "FilterSpec", "FitConfig", "FrameFit",
    "GroundTruth", "MovementSignal", "NNSError", "NNSReport", "PipelineConfig",
    "PipelineResult", "PoseScript", "QuantParams", "Scenario", "ShapeModel",
    "StageError", "apply_bandpass", "design_bandpass", "detect_cycles",
    "displacement_signal", "estimate_affine_camera", "fit_frame",
    "fit_session", "fit_shape_coefficients", "generate_signal",
    "generate_trajectory", "landmark_schematic", "load_shape_model",
    "make_synthetic_model", "project", "quantify", "run_pipeline",
    "save_shape_model", "score_detection", "segment_bursts",
    "split_segments", "synthesize_shape",
]
