"""Regression-function estimators eta_hat and their confidence score.

Every estimator maps a point of [0,1]^d to an estimate of P(Y=1 | X=x) in
[0,1]. The score max(eta_hat, 1 - eta_hat) measures how confident the
plug-in classifier 1{eta_hat >= 1/2} is at that point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .core import Dataset
from .errors import ConfigurationError, FitError, InputError, NumericError

COUNT_RATIO = "count_ratio"
EXACT_MARGINAL = "exact_marginal"
HIST_FORMS = (COUNT_RATIO, EXACT_MARGINAL)
LEARNERS = ("histogram", "knn", "linear")

# neighbor search works on blocks of roughly this many float entries
_KNN_BLOCK = 2_000_000


def _as_queries(x, d):
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != d:
        raise InputError(f"expected points of dimension {d}, got {X.shape[1]}")
    return X, single


class EtaEstimator:
    """Base contract: ``predict_eta`` in [0,1] and ``score`` in [1/2,1]."""

    d: int

    def _eta(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict_eta(self, x):
        X, single = _as_queries(x, self.d)
        eta = np.clip(self._eta(X), 0.0, 1.0)
        return float(eta[0]) if single else eta

    def score(self, x):
        eta = self.predict_eta(x)
        return np.maximum(eta, 1.0 - eta) if not np.isscalar(eta) else max(eta, 1.0 - eta)

    def predict(self, x):
        eta = np.asarray(self.predict_eta(x))
        return (eta >= 0.5).astype(np.int64)


def predict_eta(est: EtaEstimator, x):
    return est.predict_eta(x)


def score(est: EtaEstimator, x):
    return est.score(x)


# ---------------------------------------------------------------- histogram


def _cell_keys(cells: np.ndarray) -> np.ndarray:
    cells = np.ascontiguousarray(cells, dtype=np.int64)
    return cells.view(np.dtype((np.void, cells.dtype.itemsize * cells.shape[1]))).ravel()


class HistogramEstimator(EtaEstimator):
    """Piecewise-constant estimator on a cubic partition of [0,1]^d.

    Cell ``i`` along a coordinate covers [i r, (i+1) r); the last cell is closed
    at 1 and may be shorter than ``r``. Cells that received no sample predict
    1/2.
    """

    def __init__(self, cell_width: float, d: int, form: str = COUNT_RATIO, region_mass: float = 1.0):
        if not 0 < cell_width <= 1:
            raise ConfigurationError(f"cell width must lie in (0, 1], got {cell_width}")
        if form not in HIST_FORMS:
            raise ConfigurationError(f"unknown histogram form {form!r}")
        self.cell_width = float(cell_width)
        self.d = int(d)
        self.form = form
        self.region_mass = float(region_mass)
        self.n_cells = max(1, math.ceil(1.0 / self.cell_width - 1e-12))
        self._keys = _cell_keys(np.empty((0, self.d), dtype=np.int64))
        self._values = np.empty(0)

    def cell_index(self, X: np.ndarray) -> np.ndarray:
        idx = np.floor(np.asarray(X, dtype=float) / self.cell_width).astype(np.int64)
        return np.clip(idx, 0, self.n_cells - 1)

    def cell_volume(self, cells: np.ndarray) -> np.ndarray:
        lo = cells * self.cell_width
        hi = np.minimum(lo + self.cell_width, 1.0)
        hi[cells == self.n_cells - 1] = 1.0
        return np.prod(hi - lo, axis=1)

    @property
    def cell_values(self) -> dict[tuple[int, ...], float]:
        cells = np.frombuffer(self._keys.tobytes(), dtype=np.int64).reshape(-1, self.d)
        return {tuple(int(c) for c in row): float(v) for row, v in zip(cells, self._values)}

    def _eta(self, X):
        out = np.full(X.shape[0], 0.5)
        if self._keys.size == 0:
            return out
        keys = _cell_keys(self.cell_index(X))
        pos = np.searchsorted(self._keys, keys)
        pos_c = np.minimum(pos, self._keys.size - 1)
        hit = self._keys[pos_c] == keys
        out[hit] = self._values[pos_c[hit]]
        return out


def hist_fit(
    samples: Dataset,
    r: float,
    form: str = COUNT_RATIO,
    region_mass: float = 1.0,
    marginal: str = "uniform",
) -> HistogramEstimator:
    """Fit the histogram rule on labeled samples drawn from Pi(. | A).

    ``count_ratio`` stores per-cell label means. ``exact_marginal`` stores
    Pi(A)/Pi(R) * (1/N_A) * sum_j Y_j 1{X_j in R}, clipped to [0,1]; it needs
    the marginal in closed form and only ``"uniform"`` is supported.
    """
    if len(samples) == 0:
        raise InputError("histogram fit needs at least one sample")
    est = HistogramEstimator(r, samples.d, form, region_mass)
    if form == EXACT_MARGINAL and marginal != "uniform":
        raise ConfigurationError(f"unsupported marginal {marginal!r}")
    keys, inv = np.unique(_cell_keys(est.cell_index(samples.X)), return_inverse=True)
    inv = inv.reshape(-1)
    positives = np.bincount(inv, weights=samples.y.astype(float), minlength=keys.size)
    if form == COUNT_RATIO:
        values = positives / np.bincount(inv, minlength=keys.size)
    else:
        cells = np.frombuffer(keys.tobytes(), dtype=np.int64).reshape(-1, samples.d)
        values = region_mass / est.cell_volume(cells) * positives / len(samples)
    est._keys = keys
    est._values = np.clip(values, 0.0, 1.0)
    return est


# ---------------------------------------------------------------- k-NN


class KnnEstimator(EtaEstimator):
    """Fraction of positive labels among the k nearest training points.

    Distances are Euclidean; equal distances are resolved in favor of the
    lower training index, so predictions are fully deterministic.
    """

    def __init__(self, k: int = 5):
        if int(k) != k or k < 1:
            raise ConfigurationError(f"k must be a positive integer, got {k}")
        self.k = int(k)
        self.X = None
        self.y = None

    def fit(self, samples: Dataset) -> "KnnEstimator":
        if len(samples) == 0:
            raise InputError("k-NN fit needs at least one sample")
        self.X = samples.X.copy()
        self.y = samples.y.astype(float)
        self.d = samples.d
        self.k = min(self.k, len(samples))
        return self

    def _eta(self, X):
        n, k = self.X.shape[0], self.k
        out = np.empty(X.shape[0])
        block = max(1, _KNN_BLOCK // max(1, n * self.d))
        for start in range(0, X.shape[0], block):
            q = X[start:start + block]
            d2 = ((q[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=-1)
            if k == n:
                out[start:start + block] = self.y.mean()
                continue
            part = np.argpartition(d2, k - 1, axis=1)[:, :k]
            kth = np.take_along_axis(d2, part, axis=1).max(axis=1)[:, None]
            closer = d2 < kth
            tied = d2 == kth
            need = k - closer.sum(axis=1, keepdims=True)
            chosen = closer | (tied & (np.cumsum(tied, axis=1) <= need))
            out[start:start + block] = chosen @ self.y / k
        return out


def knn_fit(samples: Dataset, k: int = 5) -> KnnEstimator:
    return KnnEstimator(k).fit(samples)


# ---------------------------------------------------------------- logistic


class LinearEstimator(EtaEstimator):
    def __init__(self, weights, intercept: float = 0.0):
        self.weights = np.asarray(weights, dtype=float).reshape(-1)
        self.intercept = float(intercept)
        self.d = self.weights.shape[0]

    def _eta(self, X):
        return expit(X @ self.weights + self.intercept)


def logistic_loss(w, b, X, y) -> float:
    z = X @ w + b
    # log(1 + e^z) - y z, written stably
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def logistic_grad(w, b, X, y):
    resid = expit(X @ w + b) - y
    return X.T @ resid / X.shape[0], float(resid.mean())


def linear_fit(samples: Dataset, steps: int = 500, learning_rate: float = 0.5) -> LinearEstimator:
    """Full-batch gradient descent on the mean logistic loss from zero."""
    if len(samples) == 0:
        raise InputError("linear fit needs at least one sample")
    if steps < 0 or not learning_rate > 0:
        raise ConfigurationError("steps must be >= 0 and learning_rate > 0")
    X, y = samples.X, samples.y.astype(float)
    w, b = np.zeros(X.shape[1]), 0.0
    for _ in range(int(steps)):
        gw, gb = logistic_grad(w, b, X, y)
        w -= learning_rate * gw
        b -= learning_rate * gb
    if not (np.all(np.isfinite(w)) and math.isfinite(b) and math.isfinite(logistic_loss(w, b, X, y))):
        raise NumericError("logistic training diverged")
    return LinearEstimator(w, b)


# ---------------------------------------------------------------- learner spec


@dataclass(frozen=True)
class LearnerSpec:
    """Which base learner to fit at every stage, with its parameters.

    ``hist_r`` overrides the default cell width N_k**(-1/(d+2)).
    """

    kind: str = "histogram"
    knn_k: int = 5
    hist_r: float | None = None
    hist_form: str = COUNT_RATIO
    linear_steps: int = 500
    linear_lr: float = 0.5

    def __post_init__(self):
        if self.kind not in LEARNERS:
            raise ConfigurationError(f"unknown learner {self.kind!r}")
        if self.knn_k < 1:
            raise ConfigurationError("knn_k must be positive")
        if self.hist_r is not None and not 0 < self.hist_r <= 1:
            raise ConfigurationError("hist_r must lie in (0, 1]")
        if self.hist_form not in HIST_FORMS:
            raise ConfigurationError(f"unknown histogram form {self.hist_form!r}")

    def cell_width(self, n_nominal: int, d: int) -> float:
        if self.hist_r is not None:
            return self.hist_r
        return min(1.0, max(n_nominal, 1) ** (-1.0 / (d + 2)))

    def fit(self, samples: Dataset, n_nominal: int, region_mass: float = 1.0) -> EtaEstimator:
        if len(samples) == 0:
            raise FitError("no labeled samples to fit")
        if self.kind == "histogram":
            return hist_fit(samples, self.cell_width(n_nominal, samples.d), self.hist_form, region_mass)
        if self.kind == "knn":
            return knn_fit(samples, self.knn_k)
        return linear_fit(samples, self.linear_steps, self.linear_lr)
