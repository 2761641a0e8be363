"""Point and label sources.

Synthetic oracles draw from a known distribution and know eta, which makes
excess risk computable. Pool oracles serve a finite labeled dataset, revealing
each stored label at most once. ``sample_conditional`` turns either into a
sampler of Pi(. | A) by rejection against a :class:`RegionChain`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .core import Dataset
from .errors import ConfigurationError, InputError, LoadError, PoolExhaustionError, RegionStarvationError
from .rejection import RegionChain

SYNTHETIC = ("sine", "dasgupta1", "easyhard2", "gauss3")
DEFAULT_TEST_SIZE = 5000


class Oracle:
    """Common surface of synthetic and pool oracles."""

    d: int

    def eta_true(self, X):
        return None


# ---------------------------------------------------------------- synthetic


@dataclass(frozen=True)
class SyntheticSpec:
    """Name plus parameters of a synthetic distribution.

    ``d`` only applies to ``sine``; ``sigma`` only to ``gauss3``.
    """

    name: str
    d: int = 2
    sigma: float = 0.3

    def __post_init__(self):
        if self.name not in SYNTHETIC:
            raise ConfigurationError(f"unknown synthetic dataset {self.name!r}")
        if self.name != "sine" and self.d != 2:
            raise ConfigurationError(f"{self.name} is two-dimensional")
        if self.d < 1:
            raise ConfigurationError("dimension must be positive")
        if not self.sigma > 0:
            raise ConfigurationError("sigma must be positive")


class SyntheticOracle(Oracle):
    """Distribution oracle on [-1,1]^d exposed in [0,1]^d coordinates.

    The engine sees x = (t + 1) / 2 where t is the native point; eta is
    defined on t.
    """

    def __init__(self, spec: SyntheticSpec):
        self.spec = spec
        self.d = spec.d

    @property
    def name(self):
        return self.spec.name

    def _draw_native(self, rng, n):
        name = self.spec.name
        if name in ("sine", "easyhard2"):
            return rng.uniform(-1.0, 1.0, size=(n, self.d))
        if name == "dasgupta1":
            comp = rng.choice(3, size=n, p=[0.4, 0.4, 0.2])
            lo = np.array([-1.0, 0.2, -0.1])[comp]
            hi = np.array([-0.6, 1.0, 0.1])[comp]
            t1 = lo + (hi - lo) * rng.random(n)
            return np.column_stack([t1, rng.uniform(-1.0, 1.0, size=n)])
        comp = rng.random(n) < 0.5
        means = np.where(comp[:, None], [0.5, 0.0], [-0.5, 0.0])
        t = means + self.spec.sigma * rng.standard_normal((n, 2))
        return np.clip(t, -1.0, 1.0)

    def _eta_native(self, t):
        name = self.spec.name
        if name == "sine":
            return 0.5 * (1.0 + np.sin(np.pi * t[:, -1] / 2.0))
        if name == "dasgupta1":
            eta = (t[:, 0] >= -0.3).astype(float)
            eta[np.abs(t[:, 0]) <= 0.1] = 0.5
            return eta
        if name == "easyhard2":
            hard = np.clip(0.5 + (t[:, 1] - 0.4 * np.sin(2 * np.pi * t[:, 0])), 0.0, 1.0)
            return np.where(t[:, 0] < 0, (t[:, 1] > 0).astype(float), hard)
        # class 1 centered at (+0.5, 0), class 0 at (-0.5, 0), equal weights
        s2 = self.spec.sigma**2
        d1 = ((t - [0.5, 0.0]) ** 2).sum(axis=1)
        d0 = ((t - [-0.5, 0.0]) ** 2).sum(axis=1)
        return expit((d0 - d1) / (2.0 * s2))

    def draw_x(self, rng: np.random.Generator, n: int = 1) -> np.ndarray:
        return (self._draw_native(rng, n) + 1.0) / 2.0

    def eta_true(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.d:
            raise InputError(f"expected points of dimension {self.d}, got {X.shape[1]}")
        return self._eta_native(2.0 * X - 1.0)

    def label(self, X, rng: np.random.Generator) -> np.ndarray:
        return (rng.random(np.atleast_2d(X).shape[0]) < self.eta_true(X)).astype(np.int64)

    def sample(self, n: int, rng: np.random.Generator) -> Dataset:
        X = self.draw_x(rng, n)
        eta = self.eta_true(X)
        return Dataset(X, (rng.random(n) < eta).astype(np.int64), eta)

    def test_data(self, rng: np.random.Generator, size: int = DEFAULT_TEST_SIZE) -> Dataset:
        return self.sample(size, rng)


def synth_oracle(spec: SyntheticSpec | str, rng=None, **params) -> SyntheticOracle:
    """Build a synthetic oracle. ``rng`` is accepted for interface symmetry;
    randomness is supplied per draw."""
    if isinstance(spec, str):
        spec = SyntheticSpec(spec, **params)
    return SyntheticOracle(spec)


# ---------------------------------------------------------------- pools


class PoolOracle(Oracle):
    """Finite pool of labeled points. Labels are revealed without replacement."""

    def __init__(self, data: Dataset, test: Dataset | None = None, bounds=None, name: str = "pool"):
        if len(data) == 0:
            raise InputError("pool is empty")
        self.data = data
        self.test = test
        self.bounds = bounds
        self.name = name
        self.d = data.d
        self.available = np.ones(len(data), dtype=bool)

    def __len__(self):
        return len(self.data)

    @property
    def n_available(self) -> int:
        return int(self.available.sum())

    def eta_true(self, X):
        return None

    def reveal(self, indices) -> np.ndarray:
        indices = np.asarray(indices, dtype=np.int64)
        if not self.available[indices].all() or np.unique(indices).size != indices.size:
            raise InputError("pool label requested twice")
        self.available[indices] = False
        return self.data.y[indices]

    def reset(self):
        self.available[:] = True

    def split_test(self, fraction: float, rng: np.random.Generator) -> "PoolOracle":
        """Hold out ``fraction`` of the rows as a test set, fixed up front."""
        if not 0 < fraction < 1:
            raise ConfigurationError("test fraction must lie in (0, 1)")
        n = len(self.data)
        n_test = max(1, int(round(fraction * n)))
        if n_test >= n:
            raise ConfigurationError("pool too small for the requested test split")
        perm = rng.permutation(n)
        test_idx, train_idx = np.sort(perm[:n_test]), np.sort(perm[n_test:])
        return PoolOracle(self.data.subset(train_idx), self.data.subset(test_idx), self.bounds, self.name)

    def test_data(self, rng=None, size=None) -> Dataset:
        if self.test is None:
            raise ConfigurationError("pool has no held-out test set")
        return self.test


def make_pool(oracle: SyntheticOracle, size: int, rng: np.random.Generator,
              test_size: int = DEFAULT_TEST_SIZE) -> PoolOracle:
    """Realize a synthetic distribution as a finite pool plus an independent test set."""
    if size < 1:
        raise ConfigurationError("pool size must be positive")
    data = oracle.sample(size, rng)
    test = oracle.sample(test_size, rng)
    return PoolOracle(data, test, name=oracle.name)


def _parse_float(field, row):
    try:
        v = float(field)
    except ValueError:
        raise LoadError(f"non-numeric value {field!r}", row) from None
    if not math.isfinite(v):
        raise LoadError(f"non-finite value {field!r}", row)
    return v


def _is_number(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def load_csv(path, label_column=-1, normalize: bool = True) -> PoolOracle:
    """Read a comma-separated numeric file into a pool.

    A first row containing any non-numeric field is treated as a header.
    ``label_column`` is a header name or a 0-based (possibly negative) index.
    With ``normalize`` every feature column is min-max scaled to [0,1];
    constant columns map to 0. Row numbers in errors are 1-based file lines.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise LoadError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise LoadError(f"{path} is empty")
    header = None
    if not all(_is_number(c) for c in rows[0][1]):
        header = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
        if not rows:
            raise LoadError(f"{path} has a header but no data")
    width = len(rows[0][1])
    if width < 2:
        raise LoadError("need at least one feature column and a label column", rows[0][0])
    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if header is None or label_column not in header:
            raise LoadError(f"label column {label_column!r} not found in header")
        label_idx = header.index(label_column)
    else:
        label_idx = int(label_column)
        if not -width <= label_idx < width:
            raise LoadError(f"label column index {label_idx} out of range")
        label_idx %= width
    features, labels = [], []
    for lineno, row in rows:
        if len(row) != width:
            raise LoadError(f"expected {width} fields, got {len(row)}", lineno)
        vals = [_parse_float(c.strip(), lineno) for c in row]
        y = vals.pop(label_idx)
        if y not in (0.0, 1.0):
            raise LoadError(f"label {row[label_idx].strip()!r} is not 0 or 1", lineno)
        features.append(vals)
        labels.append(int(y))
    X = np.array(features, dtype=float)
    lo, hi = X.min(axis=0), X.max(axis=0)
    if normalize:
        span = hi - lo
        safe = np.where(span > 0, span, 1.0)
        X = np.where(span > 0, (X - lo) / safe, 0.0)
    return PoolOracle(Dataset(X, np.array(labels)), bounds=(lo, hi), name=path.stem)


# ---------------------------------------------------------------- conditional sampling


@dataclass
class ConditionalSample:
    """Accepted points, their labels (or None), the zeta used per stage,
    pool indices (pools only) and the number of candidates examined."""

    X: np.ndarray
    y: np.ndarray | None
    zeta: np.ndarray
    indices: np.ndarray | None
    attempts: int

    def __len__(self):
        return self.X.shape[0]

    def as_dataset(self, eta=None) -> Dataset:
        if self.y is None:
            raise InputError("sample is unlabeled")
        return Dataset(self.X, self.y, eta)


def _accept_in_order(inside, need):
    """Positions of the first ``need`` accepted candidates and the number of
    candidates examined to find them."""
    pos = np.flatnonzero(inside)[:need]
    examined = inside.size if pos.size < need else int(pos[-1]) + 1
    return pos, examined


def sample_conditional(oracle: Oracle, chain: RegionChain, m: int, u: float,
                       rng: np.random.Generator, labeled: bool = False,
                       max_attempts: int | None = None) -> ConditionalSample:
    """Draw ``m`` points from Pi(. | A) by rejection against ``chain``.

    Candidates come from Pi (synthetic) or uniformly from not-yet-labeled pool
    points without repetition; each candidate gets fresh zeta per stage.
    Labeled pool draws consume the revealed points.
    """
    if m < 1:
        raise InputError("m must be at least 1")
    if max_attempts is None:
        max_attempts = 200 * m
    if max_attempts < m:
        raise InputError("max_attempts must be at least m")
    if chain.is_empty_region:
        raise RegionStarvationError(0, m, 0)
    d = oracle.d
    L = len(chain)
    got_X, got_z, got_i = [], [], []
    accepted = attempts = 0
    is_pool = isinstance(oracle, PoolOracle)
    if is_pool:
        order = rng.permutation(np.flatnonzero(oracle.available))
        cursor = 0
    while accepted < m:
        room = max_attempts - attempts
        if room <= 0:
            raise RegionStarvationError(accepted, m, attempts)
        need = m - accepted
        rate = max(accepted / attempts, 0.01) if attempts else 1.0
        batch = int(min(room, max(64, math.ceil(1.25 * need / rate) + 16)))
        if is_pool:
            if cursor >= order.size:
                raise PoolExhaustionError(accepted, m)
            idx = order[cursor:cursor + batch]
            X = oracle.data.X[idx]
        else:
            idx = None
            X = oracle.draw_x(rng, batch)
        inside, zeta = chain.contains(X, u, rng, return_zeta=True)
        pos, examined = _accept_in_order(inside, need)
        attempts += examined
        if is_pool:
            cursor += examined
        accepted += pos.size
        got_X.append(X[pos])
        got_z.append(zeta[pos])
        if is_pool:
            got_i.append(idx[pos])
    X = np.vstack(got_X) if got_X else np.empty((0, d))
    zeta = np.vstack(got_z) if got_z else np.empty((0, L))
    indices = np.concatenate(got_i) if is_pool else None
    y = None
    if labeled:
        y = oracle.reveal(indices) if is_pool else oracle.label(X, rng)
    return ConditionalSample(X, y, zeta, indices, attempts)
