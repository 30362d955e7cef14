"""Linear (PCA-style) 3D face shape model restricted to annotated landmarks.

A shape model is a mean 3D face plus K orthogonal displacement directions
("components") with per-component scales ("sigmas").  A face instance is

    shape = mean + sum_k  alpha_k * sigma_k * component_k

where ``alpha`` are dimensionless coefficients in sigma-normalized units.
Only the 68 annotated landmark vertices ever matter downstream, so
:func:`synthesize_shape` returns just those, in annotation order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, ModelFormatError

NUM_LANDMARKS = 68


@dataclass
class ShapeModel:
    """In-memory shape model.

    Attributes
    ----------
    num_vertices : int
        Number of 3D vertices N in the dense mesh.
    mean : (3N,) float array
        Mean shape, vertex-major flattening (x0, y0, z0, x1, ...).
    components : (3N, K) float array
        Unit-scale principal displacement directions, one column per mode.
    sigmas : (K,) float array
        Per-mode scales; strictly positive.
    landmark_annotation : (68,) int array
        Vertex index of each annotated landmark, all distinct, each < N.
    """

    num_vertices: int
    mean: np.ndarray
    components: np.ndarray
    sigmas: np.ndarray
    landmark_annotation: np.ndarray

    @property
    def num_components(self) -> int:
        return int(self.components.shape[1])

    def mean_landmarks(self) -> np.ndarray:
        """Mean positions of the annotated vertices, shape (68, 3)."""
        return self.mean.reshape(self.num_vertices, 3)[self.landmark_annotation]

    def landmark_basis(self) -> np.ndarray:
        """Sigma-scaled component displacements at the annotated vertices.

        Returns an array of shape (68, 3, K): entry [j, :, k] is the 3D
        displacement of landmark j per unit of coefficient alpha_k.
        """
        comps = self.components.reshape(self.num_vertices, 3, self.num_components)
        return comps[self.landmark_annotation] * self.sigmas[None, None, :]


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ModelFormatError(message)


def validate_shape_model(model: ShapeModel) -> ShapeModel:
    """Check structural invariants; raise ModelFormatError naming the bad field."""
    n = model.num_vertices
    k = model.components.shape[1] if model.components.ndim == 2 else -1
    _require(n >= NUM_LANDMARKS, f"num_vertices: need at least {NUM_LANDMARKS}, got {n}")
    _require(model.mean.ndim == 1 and model.mean.shape[0] == 3 * n,
             f"mean: expected length {3 * n}, got shape {model.mean.shape}")
    _require(model.components.ndim == 2 and model.components.shape[0] == 3 * n,
             f"components: expected shape ({3 * n}, K), got {model.components.shape}")
    _require(model.sigmas.ndim == 1 and model.sigmas.shape[0] == k,
             f"sigmas: expected length {k}, got shape {model.sigmas.shape}")
    _require(bool(np.all(model.sigmas > 0)), "sigmas: every scale must be > 0")
    ann = model.landmark_annotation
    _require(ann.ndim == 1 and ann.shape[0] == NUM_LANDMARKS,
             f"landmark_annotation: expected {NUM_LANDMARKS} entries, got shape {ann.shape}")
    _require(bool(np.all((ann >= 0) & (ann < n))),
             "landmark_annotation: vertex index out of range")
    _require(len(np.unique(ann)) == NUM_LANDMARKS,
             "landmark_annotation: vertex indices must be distinct")
    _require(bool(np.all(np.isfinite(model.mean))), "mean: non-finite value")
    _require(bool(np.all(np.isfinite(model.components))), "components: non-finite value")
    return model


def synthesize_shape(model: ShapeModel, coefficients: np.ndarray) -> np.ndarray:
    """Instantiate the annotated landmarks for a coefficient vector.

    Parameters
    ----------
    model : ShapeModel
    coefficients : (K,) array-like
        Sigma-normalized shape coefficients alpha.

    Returns
    -------
    (68, 3) float array
        Landmark positions: mean + sum_k alpha_k * sigma_k * component_k,
        evaluated at the annotated vertices, in annotation order.
    """
    alpha = np.asarray(coefficients, dtype=float)
    if alpha.shape != (model.num_components,):
        raise DimensionError(
            f"coefficients: expected length {model.num_components}, got shape {alpha.shape}")
    return model.mean_landmarks() + model.landmark_basis() @ alpha


def load_shape_model(path: str | Path) -> ShapeModel:
    """Load a shape model document (JSON) and validate it.

    Raises ModelFormatError on malformed documents; the message names the
    offending field.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"cannot read shape model {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("document: expected a JSON object at top level")
    for field in ("num_vertices", "num_components", "mean", "sigmas",
                  "components", "landmark_annotation"):
        if field not in doc:
            raise ModelFormatError(f"{field}: missing")
    try:
        n = int(doc["num_vertices"])
        k = int(doc["num_components"])
        mean = np.asarray(doc["mean"], dtype=float)
        sigmas = np.asarray(doc["sigmas"], dtype=float)
        components = np.asarray(doc["components"], dtype=float)
        annotation = np.asarray(doc["landmark_annotation"], dtype=int)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"numeric field unreadable: {exc}") from exc
    if components.ndim != 2 or components.shape != (3 * n, k):
        raise ModelFormatError(
            f"components: expected {3 * n} rows x {k} columns, got shape {components.shape}")
    model = ShapeModel(num_vertices=n, mean=mean, components=components,
                       sigmas=sigmas, landmark_annotation=annotation)
    return validate_shape_model(model)


def save_shape_model(model: ShapeModel, path: str | Path) -> None:
    """Write a shape model as a JSON document (row-major components)."""
    doc = {
        "num_vertices": model.num_vertices,
        "num_components": model.num_components,
        "mean": model.mean.tolist(),
        "sigmas": model.sigmas.tolist(),
        "components": model.components.tolist(),
        "landmark_annotation": model.landmark_annotation.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def _affine_motion_fields(points: np.ndarray) -> np.ndarray:
    """The 12 displacement fields of affine motions (L @ p + t) sampled at
    ``points``; columns of the returned (3M, 12) matrix."""
    m = points.shape[0]
    cols = []
    for i in range(3):
        for j in range(3):
            f = np.zeros((m, 3))
            f[:, i] = points[:, j]
            cols.append(f.reshape(-1))
        f = np.zeros((m, 3))
        f[:, i] = 1.0
        cols.append(f.reshape(-1))
    return np.stack(cols, axis=1)


def make_synthetic_model(num_vertices: int = 100, num_components: int = 5,
                         seed: int = 0, extent: float = 50.0) -> ShapeModel:
    """Build a random but valid model for tests and demos.

    Component columns are orthonormalized (QR) so synthetic coefficients are
    recoverable without ambiguity, and — as in statistical shape models built
    from aligned training data — their displacements at the annotated
    vertices carry no affine-motion content (rotation/scale/shear/translation
    of the mean).  That keeps shape variation distinguishable from camera
    motion.  The mean is a random cloud of the given spatial extent.
    Deterministic per seed.
    """
    if num_vertices < NUM_LANDMARKS:
        raise ModelFormatError(
            f"num_vertices: need at least {NUM_LANDMARKS}, got {num_vertices}")
    rng = np.random.default_rng(seed)
    mean = rng.normal(0.0, extent, size=3 * num_vertices)
    raw = rng.normal(size=(3 * num_vertices, num_components))
    annotation = rng.choice(num_vertices, size=NUM_LANDMARKS, replace=False)

    # Remove, from each column, the full-mesh affine field that best explains
    # its values at the annotated vertices.
    fields = _affine_motion_fields(mean.reshape(-1, 3))
    ann_coords = (annotation[:, None] * 3 + np.arange(3)[None, :]).reshape(-1)
    fields_ann = fields[ann_coords]
    coeffs = np.linalg.solve(fields_ann.T @ fields_ann, fields_ann.T @ raw[ann_coords])
    raw = raw - fields @ coeffs

    q, _ = np.linalg.qr(raw)
    sigmas = rng.uniform(0.5, 2.0, size=num_components)
    model = ShapeModel(num_vertices=num_vertices, mean=mean,
                       components=q[:, :num_components], sigmas=sigmas,
                       landmark_annotation=annotation.astype(int))
    return validate_shape_model(model)
