"""Principal component analysis over standardized feature rows.

Used both to reduce the 7 features to the k leading components that feed
the HMM, and as the per-component baseline detector input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray                      # (D,)
    scale: np.ndarray                     # (D,) per-feature std, 1.0 where degenerate
    components: np.ndarray                # (k, D) orthonormal rows
    explained_variance_ratio: np.ndarray  # (k,) non-increasing

    @property
    def k(self) -> int:
        return self.components.shape[0]

    @property
    def dim(self) -> int:
        return self.components.shape[1]


def fit_pca(matrix: np.ndarray, k: int = 3) -> PcaModel:
    """Fit PCA on standardized rows; zero-variance columns get unit scale."""
    X = np.asarray(matrix, dtype=float)
    if X.ndim != 2:
        raise ValidationError("fit_pca: input must be a 2-D matrix")
    T, D = X.shape
    if T < 2:
        raise ValidationError("fit_pca: need at least 2 rows")
    if not 1 <= k <= D:
        raise ValidationError(f"fit_pca: component count must be in [1, {D}]")
    mean = X.mean(axis=0)
    scale = X.std(axis=0, ddof=1)
    scale = np.where(scale > 0, scale, 1.0)
    Z = (X - mean) / scale
    cov = np.cov(Z, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    vals = np.clip(vals[order], 0.0, None)
    vecs = vecs[:, order]
    total = vals.sum()
    ratio = vals[:k] / total if total > 0 else np.zeros(k)
    comps = vecs[:, :k].T.copy()
    # deterministic sign: largest-magnitude entry of each component is positive
    for row in comps:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    return PcaModel(mean=mean, scale=scale, components=comps,
                    explained_variance_ratio=ratio)


def project(model: PcaModel, vector: np.ndarray) -> np.ndarray:
    """Project a single row onto the model's components."""
    v = np.asarray(vector, dtype=float)
    if v.shape != (model.dim,):
        raise ValidationError(f"project: expected a {model.dim}-vector, got shape {v.shape}")
    return model.components @ ((v - model.mean) / model.scale)


def transform(model: PcaModel, matrix: np.ndarray) -> np.ndarray:
    """Project T rows at once; returns a (T, k) matrix."""
    X = np.asarray(matrix, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.dim:
        raise ValidationError(f"transform: expected (T, {model.dim}) rows, got {X.shape}")
    return ((X - model.mean) / model.scale) @ model.components.T


def save_pca(model: PcaModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({
            "mean": model.mean.tolist(),
            "scale": model.scale.tolist(),
            "components": model.components.tolist(),
            "explained_variance_ratio": model.explained_variance_ratio.tolist(),
        }, fh, indent=1)
        fh.write("\n")


def load_pca(path: str) -> PcaModel:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        return PcaModel(
            mean=np.array(data["mean"], dtype=float),
            scale=np.array(data["scale"], dtype=float),
            components=np.array(data["components"], dtype=float),
            explained_variance_ratio=np.array(data["explained_variance_ratio"], dtype=float))
    except KeyError as exc:
        raise ValidationError(f"pca model file: missing field {exc}") from exc
