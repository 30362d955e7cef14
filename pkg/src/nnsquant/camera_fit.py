"""Affine camera estimation and per-frame shape-coefficient fitting.

The observation model ties a 2D landmark frame to the shape model through an
affine camera P (3x4, third row fixed to (0, 0, 0, 1)):

    [u, v, 1]^T = P @ [X, Y, Z, 1]^T

Estimation is direct least squares on isotropically normalized coordinates
(2D points scaled to mean distance sqrt(2) from their centroid, 3D points to
sqrt(3)), which keeps the normal equations well conditioned; the similarity
transforms are undone before the camera is returned.

Shape coefficients are recovered per frame by ridge-regularized linear least
squares, and :func:`fit_frame` alternates camera and coefficient estimation
starting from the mean shape.  Because the fitted coefficients live in model
space, re-synthesizing the landmarks from them yields a frontalized (head-
motion-decoupled) face.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateGeometryError,
    DimensionError,
    InsufficientDataError,
    RankDeficiencyError,
)
from .shape_model import NUM_LANDMARKS, ShapeModel, synthesize_shape

MIN_CORRESPONDENCES = 4


@dataclass
class AffineCamera:
    """Affine camera: 3x4 matrix with third row (0, 0, 0, 1)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 4):
            raise DimensionError(f"camera matrix: expected shape (3, 4), got {m.shape}")
        self.matrix = m

    @property
    def linear(self) -> np.ndarray:
        """The 2x3 linear block mapping 3D directions to image displacements."""
        return self.matrix[:2, :3]

    @property
    def translation(self) -> np.ndarray:
        return self.matrix[:2, 3]


@dataclass
class FitConfig:
    """Knobs for :func:`fit_frame`.

    iterations : alternation rounds (camera step then shape step); >= 1.
    ridge : Tikhonov weight on the sigma-normalized coefficients. The default
        1.0 biases coefficients toward 0, trading amplitude for stability on
        noisy landmarks; use 0.0 for exact recovery on clean data.
    use_confidence : weight correspondences by per-landmark confidence.
    """

    iterations: int = 3
    ridge: float = 1.0
    use_confidence: bool = False


@dataclass
class FrameFit:
    """Result of fitting one frame."""

    frame_index: int
    timestamp: float
    camera: AffineCamera
    coefficients: np.ndarray
    frontalized: np.ndarray
    residual: float
    num_valid: int
    residual_history: list = field(default_factory=list)


def project(camera: AffineCamera, points3d: np.ndarray) -> np.ndarray:
    """Project 3D points to the image plane.

    Equivalent to multiplying homogeneous points by the camera matrix and
    reading the first two rows (the affine third row makes w == 1).
    """
    pts = np.asarray(points3d, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise DimensionError(f"points3d: expected shape (M, 3), got {pts.shape}")
    return pts @ camera.linear.T + camera.translation


def _normalization(points: np.ndarray, target: float) -> tuple[np.ndarray, float]:
    """Centroid and isotropic scale bringing mean distance to ``target``."""
    centroid = points.mean(axis=0)
    mean_dist = float(np.mean(np.linalg.norm(points - centroid, axis=1)))
    scale = target / mean_dist if mean_dist > 0 else 1.0
    return centroid, scale


def estimate_affine_camera(points2d: np.ndarray, points3d: np.ndarray,
                           weights: np.ndarray | None = None) -> AffineCamera:
    """Least-squares affine camera from 2D-3D correspondences.

    Parameters
    ----------
    points2d : (M, 2) array
    points3d : (M, 3) array
    weights : (M,) array, optional
        Per-correspondence weights (e.g. landmark confidences); rows of the
        least-squares system are scaled by them.

    Raises
    ------
    InsufficientDataError
        Fewer than 4 correspondences.
    DegenerateGeometryError
        The 3D points do not constrain the camera (collinear) or the
        recovered projection collapses the cloud to a line.
    """
    x2 = np.asarray(points2d, dtype=float)
    x3 = np.asarray(points3d, dtype=float)
    if x2.ndim != 2 or x2.shape[1] != 2:
        raise DimensionError(f"points2d: expected shape (M, 2), got {x2.shape}")
    if x3.ndim != 2 or x3.shape[1] != 3:
        raise DimensionError(f"points3d: expected shape (M, 3), got {x3.shape}")
    if x2.shape[0] != x3.shape[0]:
        raise DimensionError(
            f"correspondence count mismatch: {x2.shape[0]} 2D vs {x3.shape[0]} 3D")
    m = x2.shape[0]
    if m < MIN_CORRESPONDENCES:
        raise InsufficientDataError(
            f"need at least {MIN_CORRESPONDENCES} correspondences, got {m}")
    if not (np.all(np.isfinite(x2)) and np.all(np.isfinite(x3))):
        raise DimensionError("correspondences contain non-finite values")

    c2, s2 = _normalization(x2, np.sqrt(2.0))
    c3, s3 = _normalization(x3, np.sqrt(3.0))
    x2n = (x2 - c2) * s2
    x3n = (x3 - c3) * s3

    design = np.hstack([x3n, np.ones((m, 1))])
    target = x2n
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        if w.shape != (m,):
            raise DimensionError(f"weights: expected shape ({m},), got {w.shape}")
        design = design * w[:, None]
        target = target * w[:, None]

    if np.linalg.matrix_rank(design) < 3:
        raise DegenerateGeometryError(
            "3D points are collinear or collapsed; camera is not identifiable")

    # Minimum-norm least squares: a planar cloud leaves one direction
    # unconstrained and lstsq zeroes it out, which still reprojects exactly.
    sol, *_ = np.linalg.lstsq(design, target, rcond=None)
    m_norm = sol.T  # 2x4 in normalized coordinates

    p_norm = np.vstack([m_norm, [0.0, 0.0, 0.0, 1.0]])
    t2_inv = np.array([[1.0 / s2, 0.0, c2[0]],
                       [0.0, 1.0 / s2, c2[1]],
                       [0.0, 0.0, 1.0]])
    u3 = np.eye(4)
    u3[:3, :3] *= s3
    u3[:3, 3] = -s3 * c3
    matrix = t2_inv @ p_norm @ u3

    svals = np.linalg.svd(matrix[:2, :3], compute_uv=False)
    if svals[1] <= 1e-12 * max(svals[0], 1.0):
        raise DegenerateGeometryError(
            "recovered projection collapses the face to a line")
    return AffineCamera(matrix)


def reprojection_rms(camera: AffineCamera, points3d: np.ndarray,
                     points2d: np.ndarray) -> float:
    """Root-mean-square Euclidean reprojection error over the points."""
    err = project(camera, points3d) - np.asarray(points2d, dtype=float)
    return float(np.sqrt(np.mean(np.sum(err ** 2, axis=1))))


def fit_shape_coefficients(camera: AffineCamera, model: ShapeModel,
                           points2d: np.ndarray, valid: np.ndarray | None = None,
                           ridge: float = 1.0,
                           weights: np.ndarray | None = None) -> np.ndarray:
    """Recover sigma-normalized shape coefficients for one frame.

    Solves  min_alpha ||A alpha - b||^2 + ridge * ||alpha||^2  where A stacks
    the camera-projected, sigma-scaled component displacements of each valid
    landmark and b is the observed 2D position minus the projected mean shape.

    Parameters
    ----------
    camera : AffineCamera
    model : ShapeModel
    points2d : (68, 2) array
        Observed landmark positions; rows where ``valid`` is False ignored.
    valid : (68,) bool array, optional
        Defaults to all valid.
    ridge : float
        Regularization weight; must be >= 0.  With ridge == 0 a rank-deficient
        system raises instead of returning an arbitrary solution.
    weights : (68,) array, optional
        Per-landmark confidence weights applied to the residual rows.
    """
    obs = np.asarray(points2d, dtype=float)
    if obs.shape != (NUM_LANDMARKS, 2):
        raise DimensionError(f"points2d: expected shape ({NUM_LANDMARKS}, 2), got {obs.shape}")
    if ridge < 0:
        raise ValueError(f"ridge must be >= 0, got {ridge}")
    if valid is None:
        valid = np.ones(NUM_LANDMARKS, dtype=bool)
    else:
        valid = np.asarray(valid, dtype=bool)
    n_valid = int(valid.sum())
    if n_valid < 1:
        raise InsufficientDataError("no valid landmarks to fit coefficients")

    k = model.num_components
    basis = model.landmark_basis()                       # (68, 3, K)
    proj_basis = np.einsum("ij,ljk->lik", camera.linear, basis)  # (68, 2, K)
    pred_mean = project(camera, model.mean_landmarks())  # (68, 2)

    a = proj_basis[valid].reshape(2 * n_valid, k)
    b = (obs - pred_mean)[valid].reshape(2 * n_valid)
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        if w.shape != (NUM_LANDMARKS,):
            raise DimensionError(f"weights: expected shape ({NUM_LANDMARKS},), got {w.shape}")
        wr = np.repeat(w[valid], 2)
        a = a * wr[:, None]
        b = b * wr

    if ridge == 0.0:
        if np.linalg.matrix_rank(a) < k:
            raise RankDeficiencyError(
                "normal equations are singular with ridge=0; "
                "use ridge > 0 to regularize")
        alpha, *_ = np.linalg.lstsq(a, b, rcond=None)
        return alpha
    return np.linalg.solve(a.T @ a + ridge * np.eye(k), a.T @ b)


def fit_frame(model: ShapeModel, points2d: np.ndarray, valid: np.ndarray | None = None,
              config: FitConfig | None = None, *, frame_index: int = 0,
              timestamp: float = 0.0,
              confidence: np.ndarray | None = None) -> FrameFit:
    """Alternate camera and coefficient estimation for one landmark frame.

    Starts from the mean shape (alpha = 0); each round re-estimates the
    camera against the current synthesized shape, then the coefficients under
    the new camera.  With ridge == 0 each half-step is an exact minimizer, so
    the reprojection residual is non-increasing across rounds.

    Raises
    ------
    InsufficientDataError
        Fewer than 4 valid landmarks: the frame is unfittable.
    """
    cfg = config or FitConfig()
    if cfg.iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {cfg.iterations}")
    obs = np.asarray(points2d, dtype=float)
    if obs.shape != (NUM_LANDMARKS, 2):
        raise DimensionError(f"points2d: expected shape ({NUM_LANDMARKS}, 2), got {obs.shape}")
    if valid is None:
        valid = np.all(np.isfinite(obs), axis=1)
    else:
        valid = np.asarray(valid, dtype=bool) & np.all(np.isfinite(obs), axis=1)
    n_valid = int(valid.sum())
    if n_valid < MIN_CORRESPONDENCES:
        raise InsufficientDataError(
            f"frame {frame_index}: only {n_valid} valid landmarks "
            f"(need {MIN_CORRESPONDENCES}); frame is unfittable")

    w_cam = w_coef = None
    if cfg.use_confidence and confidence is not None:
        conf = np.asarray(confidence, dtype=float)
        w_cam = conf[valid]
        w_coef = conf

    alpha = np.zeros(model.num_components)
    camera = None
    history: list[float] = []
    for _ in range(cfg.iterations):
        shape3d = synthesize_shape(model, alpha)
        camera = estimate_affine_camera(obs[valid], shape3d[valid], weights=w_cam)
        alpha = fit_shape_coefficients(camera, model, obs, valid,
                                       ridge=cfg.ridge, weights=w_coef)
        history.append(reprojection_rms(camera, synthesize_shape(model, alpha)[valid],
                                        obs[valid]))

    frontalized = synthesize_shape(model, alpha)
    return FrameFit(frame_index=frame_index, timestamp=timestamp, camera=camera,
                    coefficients=alpha, frontalized=frontalized,
                    residual=history[-1], num_valid=n_valid,
                    residual_history=history)
