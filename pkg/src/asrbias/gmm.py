"""Diagonal-covariance Gaussian mixture models trained with EM.

Initialization grows the mixture by binary mean splitting from the global
Gaussian, with seed-fixed perturbations, then runs full EM. The total data
log-likelihood is recorded per iteration and is non-decreasing up to the
variance floor.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import DataError

logger = logging.getLogger(__name__)

_LOG_2PI = np.log(2.0 * np.pi)
_MIN_COMPONENT_WEIGHT = 1e-8
_VARIANCE_FLOOR_FACTOR = 1e-4
_ABS_VARIANCE_FLOOR = 1e-10


@dataclass
class DiagGmm:
    """weights (K,), means (K, D), variances (K, D)."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    log_likelihoods: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.means = np.asarray(self.means, dtype=np.float64)
        self.variances = np.asarray(self.variances, dtype=np.float64)
        self.validate()

    def validate(self) -> None:
        k, d = self.means.shape
        if self.weights.shape != (k,) or self.variances.shape != (k, d):
            raise DataError("inconsistent GMM parameter shapes")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-8:
            raise DataError("GMM weights must be a probability vector")
        if np.any(self.variances <= 0):
            raise DataError("GMM variances must be positive")

    @property
    def n_components(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def component_log_prob(self, x: np.ndarray) -> np.ndarray:
        """Per-frame, per-component joint log density log(w_k N(x; mu_k, var_k))."""
        x = np.asarray(x, dtype=np.float64)
        inv_var = 1.0 / self.variances
        const = -0.5 * (
            self.dim * _LOG_2PI + np.sum(np.log(self.variances), axis=1)
        ) + np.log(np.maximum(self.weights, _MIN_COMPONENT_WEIGHT * 1e-8))
        quad = (
            (x**2) @ inv_var.T
            - 2.0 * x @ (self.means * inv_var).T
            + np.sum(self.means**2 * inv_var, axis=1)
        )
        return const - 0.5 * quad

    def log_prob(self, x: np.ndarray) -> np.ndarray:
        """Per-frame mixture log density."""
        return logsumexp(self.component_log_prob(x), axis=1)

    def total_log_prob(self, x: np.ndarray) -> float:
        return float(np.sum(self.log_prob(x)))


def _variance_floor(x: np.ndarray) -> np.ndarray:
    global_var = np.var(x, axis=0)
    return np.maximum(_VARIANCE_FLOOR_FACTOR * global_var, _ABS_VARIANCE_FLOOR)


def _em_iterations(x, weights, means, variances, n_iter, floor, rng, record=None):
    n = x.shape[0]
    for _ in range(n_iter):
        gmm = DiagGmm(weights, means, variances)
        joint = gmm.component_log_prob(x)
        norm = logsumexp(joint, axis=1)
        if record is not None:
            record.append(float(np.sum(norm)))
        resp = np.exp(joint - norm[:, None])

        counts = resp.sum(axis=0)
        safe = np.maximum(counts, 1e-300)
        weights = counts / counts.sum()
        means = (resp.T @ x) / safe[:, None]
        ex2 = (resp.T @ (x**2)) / safe[:, None]
        variances = np.maximum(ex2 - means**2, floor[None, :])

        dead = counts < _MIN_COMPONENT_WEIGHT * n
        for k in np.where(dead)[0]:
            # Re-seed the starved component by splitting the heaviest one.
            heavy = int(np.argmax(weights))
            logger.warning("re-splitting degenerate component %d from %d", k, heavy)
            means[k] = means[heavy] + 0.1 * np.sqrt(variances[heavy]) * rng.standard_normal(
                means.shape[1]
            )
            variances[k] = variances[heavy]
            weights[k] = weights[heavy] / 2.0
            weights[heavy] /= 2.0
        if np.any(dead):
            weights = weights / weights.sum()
    return weights, means, variances


def train_gmm(
    features: np.ndarray, n_components: int, n_iter: int = 10, seed: int = 0
) -> DiagGmm:
    """Fit a diagonal GMM by EM.

    Requires at least 10 * n_components * dim frames. The returned model
    carries ``log_likelihoods``: the total data log-likelihood evaluated at
    the start of each of the final n_iter EM iterations plus once after the
    last update (length n_iter + 1).
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise DataError("features must be a 2-D frames x dim array")
    n, d = x.shape
    if n_components < 1:
        raise DataError("n_components must be >= 1")
    if n < 10 * n_components * d:
        raise DataError(
            f"insufficient data: {n} frames < 10 * {n_components} * {d} required"
        )
    rng = np.random.default_rng(seed)
    floor = _variance_floor(x)

    means = x.mean(axis=0)[None, :]
    variances = np.maximum(x.var(axis=0), floor)[None, :]
    weights = np.ones(1)

    while means.shape[0] < n_components:
        k = means.shape[0]
        n_split = min(k, n_components - k)
        order = np.argsort(weights)[::-1][:n_split]
        new_means, new_vars, new_weights = [means], [variances], [weights.copy()]
        for idx in order:
            delta = 0.1 * np.sqrt(variances[idx]) * rng.standard_normal(d)
            new_means.append((means[idx] + delta)[None, :])
            new_vars.append(variances[idx][None, :])
            new_weights[0][idx] /= 2.0
            new_weights.append(np.array([new_weights[0][idx]]))
        means = np.concatenate(new_means, axis=0)
        variances = np.concatenate(new_vars, axis=0)
        weights = np.concatenate(new_weights)
        weights = weights / weights.sum()
        weights, means, variances = _em_iterations(
            x, weights, means, variances, 2, floor, rng
        )

    history: list[float] = []
    weights, means, variances = _em_iterations(
        x, weights, means, variances, n_iter, floor, rng, record=history
    )
    gmm = DiagGmm(weights, means, variances)
    history.append(gmm.total_log_prob(x))
    gmm.log_likelihoods = history
    return gmm
