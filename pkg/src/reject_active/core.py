"""Shared records: labeled points, datasets, the label budget and the
(N_k, eps_k) schedule driving the active loop."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .errors import ConfigurationError, InputError

PRACTICAL = "practical"
THEORETICAL = "theoretical"
MODES = (PRACTICAL, THEORETICAL)


class LabeledPoint(NamedTuple):
    x: np.ndarray
    y: int


@dataclass
class Dataset:
    """Feature matrix ``X`` of shape (n, d) with binary labels ``y``.

    ``eta`` optionally carries the true regression function at each row, which
    synthetic sources know and which excess-risk evaluation needs.
    """

    X: np.ndarray
    y: np.ndarray
    eta: np.ndarray | None = None

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.y = np.asarray(self.y, dtype=np.int64).reshape(-1)
        if self.X.shape[0] != self.y.shape[0]:
            raise InputError(f"{self.X.shape[0]} feature rows but {self.y.shape[0]} labels")
        if not np.all(np.isfinite(self.X)):
            raise InputError("features must be finite")
        if self.y.size and not np.isin(self.y, (0, 1)).all():
            raise InputError("labels must be 0 or 1")
        if self.eta is not None:
            self.eta = np.asarray(self.eta, dtype=float).reshape(-1)
            if self.eta.shape[0] != self.y.shape[0]:
                raise InputError("eta length does not match the number of labels")

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.y.shape[0]

    def __iter__(self) -> Iterator[LabeledPoint]:
        for x, y in zip(self.X, self.y):
            yield LabeledPoint(x, int(y))

    @classmethod
    def from_points(cls, points) -> "Dataset":
        points = list(points)
        if not points:
            raise InputError("cannot infer the dimension of an empty point list")
        X = np.array([np.atleast_1d(np.asarray(p.x, dtype=float)) for p in points])
        return cls(X, np.array([p.y for p in points]))

    @classmethod
    def empty(cls, d: int) -> "Dataset":
        return cls(np.empty((0, d)), np.empty(0, dtype=np.int64))

    def concat(self, other: "Dataset") -> "Dataset":
        if self.d != other.d:
            raise InputError("cannot concatenate datasets of different dimension")
        eta = None
        if self.eta is not None and other.eta is not None:
            eta = np.concatenate([self.eta, other.eta])
        return Dataset(np.vstack([self.X, other.X]), np.concatenate([self.y, other.y]), eta)

    def subset(self, mask_or_index) -> "Dataset":
        eta = None if self.eta is None else self.eta[mask_or_index]
        return Dataset(self.X[mask_or_index], self.y[mask_or_index], eta)


@dataclass
class BudgetTracker:
    total: int
    used: int = 0

    def __post_init__(self):
        if self.total < 1:
            raise ConfigurationError("label budget must be a positive integer")

    @property
    def remaining(self) -> int:
        return self.total - self.used

    def can_spend(self, n: int) -> bool:
        return self.used + n <= self.total

    def spend(self, n: int) -> None:
        if n < 0:
            raise ValueError("cannot spend a negative number of labels")
        if not self.can_spend(n):
            raise ConfigurationError(
                f"spending {n} labels would exceed the budget ({self.used}/{self.total})"
            )
        self.used += n


@dataclass(frozen=True)
class Schedule:
    """Label counts N_k and rejection rates eps_k for the active loop.

    In ``practical`` mode eps_k = c_eps**k. In ``theoretical`` mode
    eps_k = min(1, ln(N/delta) ln(N) N_{k-1}**(-1/(2+d))), using the
    previous step's nominal count. N_k = floor(c_N N_{k-1}) in both modes.
    """

    mode: str
    N: int
    N0: int
    c_N: float = 1.2
    c_eps: float = 0.95
    delta: float = 0.05
    d: int = 1
    n0_multiplier: int = 1
    eps0: float = field(default=1.0, init=False)

    def step(self, k: int, N_prev: int) -> tuple[int, float]:
        return schedule_step(self, k, N_prev)

    def theoretical_eps(self, N_prev: int) -> float:
        """Un-clamped theoretical rejection rate."""
        return math.log(self.N / self.delta) * math.log(self.N) * N_prev ** (-1.0 / (2 + self.d))


def schedule_init(
    N: int,
    mode: str = PRACTICAL,
    c_N: float = 1.2,
    c_eps: float = 0.95,
    delta: float = 0.05,
    d: int = 1,
    n0_multiplier: int = 1,
) -> Schedule:
    if mode not in MODES:
        raise ConfigurationError(f"unknown schedule mode {mode!r}")
    if int(N) != N or N < 4:
        raise ConfigurationError(f"budget N must be an integer >= 4, got {N}")
    if not c_N > 1:
        raise ConfigurationError(f"c_N must exceed 1, got {c_N}")
    if mode == PRACTICAL and not 0 < c_eps < 1:
        raise ConfigurationError(f"c_eps must lie in (0, 1), got {c_eps}")
    if mode == THEORETICAL and not 0 < delta < 0.5:
        raise ConfigurationError(f"delta must lie in (0, 1/2), got {delta}")
    if int(d) != d or d < 1:
        raise ConfigurationError(f"dimension must be a positive integer, got {d}")
    if int(n0_multiplier) != n0_multiplier or n0_multiplier < 1:
        raise ConfigurationError("n0_multiplier must be a positive integer")
    N = int(N)
    N0 = min(int(n0_multiplier) * math.isqrt(N), N)
    return Schedule(mode, N, N0, float(c_N), float(c_eps), float(delta), int(d), int(n0_multiplier))


def schedule_step(s: Schedule, k: int, N_prev: int) -> tuple[int, float]:
    if k < 1 or N_prev < 1:
        raise InputError("schedule_step needs k >= 1 and N_prev >= 1")
    # guard against 1.2 * 15 = 17.999... style rounding
    N_k = math.floor(s.c_N * N_prev + 1e-9)
    if s.mode == PRACTICAL:
        eps = s.c_eps**k
    else:
        eps = min(1.0, s.theoretical_eps(N_prev))
    return N_k, eps
