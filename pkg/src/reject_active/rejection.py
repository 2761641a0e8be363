"""Uncertain regions defined by rejection thresholds on randomized scores.

Step k keeps the points of A_{k-1} whose randomized score
f_{k-1}(x) + zeta, zeta ~ U[0, u], does not exceed lambda_k, where lambda_k
is the eps_k-quantile of the randomized scores of an unlabeled sample from
A_{k-1}. A threshold of ``None`` marks an empty region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .estimators import EtaEstimator

DEFAULT_U = 1e-5


@dataclass(frozen=True)
class RandomizationConfig:
    u: float = DEFAULT_U

    def __post_init__(self):
        if not self.u >= 0:
            raise InputError(f"randomization width must be >= 0, got {self.u}")


def randomize_scores(scores, u: float, rng: np.random.Generator) -> np.ndarray:
    scores = np.asarray(scores, dtype=float)
    if u < 0:
        raise InputError(f"randomization width must be >= 0, got {u}")
    if u == 0:
        return scores.copy()
    return scores + rng.uniform(0.0, u, size=scores.shape)


def empirical_quantile(values, eps: float) -> float | None:
    """Largest order statistic t with empirical CDF F(t) <= eps.

    Returns the floor(eps * M)-th smallest value (1-indexed), or ``None`` when
    that index is zero and no sample value qualifies.
    """
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.size == 0:
        raise InputError("empirical quantile of an empty sample")
    if not 0 <= eps <= 1:
        raise InputError(f"eps must lie in [0, 1], got {eps}")
    k = math.floor(eps * values.size)
    if k == 0:
        return None
    return float(np.partition(values, k - 1)[k - 1])


@dataclass(frozen=True)
class RegionChain:
    """Nested regions A_0 ⊇ A_1 ⊇ ... as (estimator, threshold) stages.

    Stage j holds f_j and lambda_{j+1}; A_{j+1} is the part of A_j where
    f_j(x) + zeta_j <= lambda_{j+1}. The empty chain is the whole space.
    """

    stages: tuple = field(default_factory=tuple)

    def __len__(self):
        return len(self.stages)

    @property
    def thresholds(self) -> list:
        return [lam for _, lam in self.stages]

    @property
    def is_empty_region(self) -> bool:
        return any(lam is None for _, lam in self.stages)

    def extend(self, est: EtaEstimator, lam: float | None) -> "RegionChain":
        return RegionChain(self.stages + ((est, lam),))

    def prefix(self, n: int) -> "RegionChain":
        return RegionChain(self.stages[:n])

    def contains(self, X, u: float = 0.0, rng: np.random.Generator | None = None,
                 return_zeta: bool = False):
        """Membership mask for the rows of ``X``.

        With ``rng`` set, a fresh zeta ~ U[0, u] is drawn for every
        (point, stage) pair; otherwise zeta = 0.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n, L = X.shape[0], len(self.stages)
        if L and X.shape[1] != self.stages[0][0].d:
            raise InputError(
                f"expected points of dimension {self.stages[0][0].d}, got {X.shape[1]}"
            )
        if rng is not None and u > 0:
            zeta = rng.uniform(0.0, u, size=(n, L))
        else:
            zeta = np.zeros((n, L))
        inside = np.ones(n, dtype=bool)
        for j, (est, lam) in enumerate(self.stages):
            if lam is None:
                inside[:] = False
                break
            idx = np.flatnonzero(inside)
            if idx.size == 0:
                break
            s = np.asarray(est.score(X[idx])) + zeta[idx, j]
            inside[idx[s > lam]] = False
        return (inside, zeta) if return_zeta else inside

    def exit_stage(self, X) -> np.ndarray:
        """Index j of the first stage whose deterministic test x fails, else L."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.full(X.shape[0], len(self.stages), dtype=np.int64)
        active = np.arange(X.shape[0])
        for j, (est, lam) in enumerate(self.stages):
            if active.size == 0:
                break
            if lam is None:
                out[active] = j
                break
            leave = np.asarray(est.score(X[active])) > lam
            out[active[leave]] = j
            active = active[~leave]
        return out


def region_contains(chain: RegionChain, x, u: float = 0.0, rng: np.random.Generator | None = None):
    X = np.asarray(x, dtype=float)
    mask = chain.contains(X, u, rng)
    return bool(mask[0]) if X.ndim == 1 else mask


def region_extend(chain: RegionChain, est: EtaEstimator, unlabeled, eps: float,
                  u: float = DEFAULT_U, rng: np.random.Generator | None = None):
    """Append stage (est, lambda_hat) where lambda_hat is the eps-quantile of
    the randomized scores of ``unlabeled`` (a sample from the current region)."""
    X = np.atleast_2d(np.asarray(unlabeled, dtype=float))
    if X.shape[0] == 0 or X.size == 0:
        raise InputError("region_extend needs a non-empty unlabeled sample")
    if not 0 < eps <= 1:
        raise InputError(f"eps must lie in (0, 1], got {eps}")
    if rng is None:
        rng = np.random.default_rng()
    scores = randomize_scores(np.atleast_1d(est.score(X)), u, rng)
    lam = empirical_quantile(scores, eps)
    return chain.extend(est, lam), lam
