"""Diagonal-covariance Gaussian mixtures for the two-class baseline.

One mixture per class is fit with EM from a k-means++ seeded start;
classification compares class log-likelihoods (LLR > 0 -> natural).
Variances are floored at 1e-4 and components whose weight collapses
below 1e-8 are reinitialized from a random data point.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, TooFewSamples
from ..preprocess import EMITTED, NATURAL

log = logging.getLogger(__name__)

VAR_FLOOR = 1e-4
WEIGHT_FLOOR = 1e-8
DEFAULT_COMPONENTS = 512
MAX_ITER = 100
REL_TOL = 1e-6


@dataclass
class Mixture:
    weights: np.ndarray    # (M,), on the simplex
    means: np.ndarray      # (M, d)
    variances: np.ndarray  # (M, d), all >= VAR_FLOOR

    @property
    def n_components(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return self.means.shape[1]


@dataclass
class GmmPair:
    natural: Mixture
    emitted: Mixture

    @property
    def dim(self) -> int:
        return self.natural.dim


def _component_log_density(mix: Mixture, X: np.ndarray) -> np.ndarray:
    """log(w_m * N(x; mu_m, diag var_m)) for every (sample, component)."""
    const = mix.dim * np.log(2.0 * np.pi) + np.sum(np.log(mix.variances), axis=1)
    # ||(x - mu)/sigma||^2 expanded so it is a single matmul per term
    inv_var = 1.0 / mix.variances
    maha = (
        (X ** 2) @ inv_var.T
        - 2.0 * (X @ (mix.means * inv_var).T)
        + np.sum(mix.means ** 2 * inv_var, axis=1)
    )
    return np.log(mix.weights) - 0.5 * (const + maha)


def _logsumexp(a: np.ndarray, axis: int = 1) -> np.ndarray:
    amax = np.max(a, axis=axis, keepdims=True)
    out = amax + np.log(np.sum(np.exp(a - amax), axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


def log_likelihood(mix: Mixture, X: np.ndarray) -> np.ndarray:
    """Per-sample log p(x) under the mixture."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != mix.dim:
        raise DimensionMismatch(f"dim {X.shape[1]} != mixture dim {mix.dim}")
    return _logsumexp(_component_log_density(mix, X), axis=1)


def responsibilities(mix: Mixture, X: np.ndarray) -> np.ndarray:
    lp = _component_log_density(mix, X)
    return np.exp(lp - _logsumexp(lp, axis=1)[:, None])


def kmeans_plus_plus(X: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """Standard D^2-weighted seeding; returns (m, d) initial means."""
    n = len(X)
    means = np.empty((m, X.shape[1]))
    means[0] = X[rng.integers(n)]
    d2 = np.sum((X - means[0]) ** 2, axis=1)
    for j in range(1, m):
        total = d2.sum()
        if total <= 0.0:
            means[j] = X[rng.integers(n)]
            continue
        means[j] = X[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((X - means[j]) ** 2, axis=1))
    return means


def train_gmm(X: np.ndarray, m: int = DEFAULT_COMPONENTS, seed: int = 0,
              max_iter: int = MAX_ITER, rel_tol: float = REL_TOL):
    """EM fit of one class mixture; returns (Mixture, log-likelihood history)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch(f"X must be 2-D, got shape {X.shape}")
    n, d = X.shape
    if n < m:
        raise TooFewSamples(f"{n} samples cannot support {m} components")

    rng = np.random.default_rng(seed)
    global_var = np.maximum(X.var(axis=0), VAR_FLOOR)
    mix = Mixture(
        weights=np.full(m, 1.0 / m),
        means=kmeans_plus_plus(X, m, rng),
        variances=np.tile(global_var, (m, 1)),
    )

    ll_history = []
    prev_ll = None
    for _ in range(max_iter):
        lp = _component_log_density(mix, X)
        per_sample = _logsumexp(lp, axis=1)
        ll = float(per_sample.sum())
        ll_history.append(ll)

        resp = np.exp(lp - per_sample[:, None])  # (n, m)
        nk = resp.sum(axis=0)
        mix.weights = nk / n
        safe_nk = np.maximum(nk, 1e-300)
        mix.means = (resp.T @ X) / safe_nk[:, None]
        ex2 = (resp.T @ (X * X)) / safe_nk[:, None]
        mix.variances = np.maximum(ex2 - mix.means ** 2, VAR_FLOOR)

        degenerate = np.flatnonzero(mix.weights < WEIGHT_FLOOR)
        if len(degenerate) > 0:
            log.warning("reinitializing %d degenerate component(s)", len(degenerate))
            for j in degenerate:
                mix.means[j] = X[rng.integers(n)]
                mix.variances[j] = global_var
                mix.weights[j] = 1.0 / m
            mix.weights = mix.weights / mix.weights.sum()

        if prev_ll is not None and abs(ll - prev_ll) < rel_tol * abs(ll):
            break
        prev_ll = ll

    return mix, ll_history


def gmm_score(pair: GmmPair, X: np.ndarray) -> np.ndarray:
    """LLR = log p(x|natural) - log p(x|emitted), one value per sample."""
    return log_likelihood(pair.natural, X) - log_likelihood(pair.emitted, X)


def predict_gmm(pair: GmmPair, X: np.ndarray) -> np.ndarray:
    """Class indices (0 natural, 1 emitted); natural iff LLR > 0."""
    return (gmm_score(pair, X) <= 0.0).astype(int)


def predict_gmm_label(pair: GmmPair, x: np.ndarray) -> tuple[float, str]:
    llr = float(gmm_score(pair, np.atleast_2d(x))[0])
    return llr, NATURAL if llr > 0.0 else EMITTED
