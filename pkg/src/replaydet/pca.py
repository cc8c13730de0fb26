"""Linear dimensionality reduction to a fixed number of components.

Fit on the training split only; the same projection is reused for
validation and test so no information leaks across splits. Components
follow a deterministic sign convention (largest-magnitude element
positive) so persisted models are byte-reproducible.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, RankDeficient

PCA_DIM = 128


@dataclass
class PcaModel:
    mean: np.ndarray        # (d,)
    components: np.ndarray  # (k, d), rows orthonormal
    explained_variance: np.ndarray  # (k,), non-increasing

    @property
    def input_dim(self) -> int:
        return len(self.mean)

    @property
    def output_dim(self) -> int:
        return len(self.components)


def fit(X: np.ndarray, k: int = PCA_DIM) -> PcaModel:
    """Top-k principal directions of mean-centered X (rows = samples).

    Deterministic given input order. If X has fewer than k nonzero
    singular values the missing components are zero-padded and a
    RankDeficient warning is issued.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch(f"X must be 2-D, got shape {X.shape}")
    n, d = X.shape
    if n < k:
        raise DimensionMismatch(f"need at least k={k} rows, got {n}")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    if k < 1 or k > d:
        raise DimensionMismatch(f"k must be in [1, {d}], got {k}")

    mean = X.mean(axis=0)
    _, svals, vt = np.linalg.svd(X - mean, full_matrices=False)

    tol = max(n, d) * np.finfo(np.float64).eps * (svals[0] if len(svals) else 0.0)
    rank = int(np.sum(svals > tol))
    n_keep = min(k, rank)

    components = np.zeros((k, d))
    components[:n_keep] = vt[:n_keep]
    variance = np.zeros(k)
    variance[:n_keep] = svals[:n_keep] ** 2 / max(n - 1, 1)

    # sign convention: largest-magnitude element of each kept row positive
    for row in components[:n_keep]:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0

    if n_keep < k:
        warnings.warn(
            f"rank {rank} < k={k}; padded {k - n_keep} zero components",
            RankDeficient,
        )
    return PcaModel(mean=mean, components=components, explained_variance=variance)


def transform(m: PcaModel, x: np.ndarray) -> np.ndarray:
    """Project vector(s) onto the principal components: components @ (x - mean)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != m.input_dim:
        raise DimensionMismatch(
            f"input dim {x.shape[-1]} does not match model dim {m.input_dim}"
        )
    return (x - m.mean) @ m.components.T
