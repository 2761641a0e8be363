"""The active learning loop, its passive baseline and the piecewise model."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import PRACTICAL, BudgetTracker, Dataset, Schedule, schedule_init
from .errors import ConfigurationError, InputError, RunAborted
from .estimators import EtaEstimator, LearnerSpec
from .oracles import DEFAULT_TEST_SIZE, Oracle, PoolOracle, sample_conditional
from .rejection import DEFAULT_U, RegionChain, region_extend

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EngineConfig:
    schedule: Schedule
    learner: LearnerSpec = field(default_factory=LearnerSpec)
    m_k: int = 150
    u: float = DEFAULT_U
    recycle_labeled: bool = True
    recycle_unlabeled: bool = True
    recycled_count_toward_quota: bool = False
    eps_reading: str = "conditional"
    seed: int = 0
    test_size: int = DEFAULT_TEST_SIZE
    attempts_per_point: int = 200

    def __post_init__(self):
        if self.m_k < 1:
            raise ConfigurationError("m_k must be at least 1")
        if not self.u >= 0:
            raise ConfigurationError("u must be non-negative")
        if self.eps_reading not in ("conditional", "absolute"):
            raise ConfigurationError(f"unknown eps_reading {self.eps_reading!r}")
        if self.test_size < 1:
            raise ConfigurationError("test_size must be positive")

    @classmethod
    def build(cls, N: int, d: int, mode: str = PRACTICAL, c_N: float = 1.2, c_eps: float = 0.95,
              delta: float = 0.05, n0_multiplier: int | None = None, **kwargs) -> "EngineConfig":
        """Config with a schedule for budget ``N``. ``n0_multiplier`` defaults to
        2 in practical mode and 1 in theoretical mode."""
        if n0_multiplier is None:
            n0_multiplier = 2 if mode == PRACTICAL else 1
        sched = schedule_init(N, mode, c_N, c_eps, delta, d, n0_multiplier)
        return cls(schedule=sched, **kwargs)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["schedule"].pop("eps0", None)
        return out

    def replace(self, **changes) -> "EngineConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass
class PiecewiseModel:
    """eta_hat = eta_j on A_j minus A_{j+1} for j < L, and eta_L on A_L."""

    stages: list
    chain: RegionChain

    def __post_init__(self):
        if len(self.stages) != len(self.chain) + 1:
            raise InputError("a piecewise model needs one more estimator than thresholds")

    @property
    def d(self) -> int:
        return self.stages[0].d

    @property
    def thresholds(self) -> list:
        return self.chain.thresholds

    def stage_of(self, X) -> np.ndarray:
        return self.chain.exit_stage(X)

    def predict_eta(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.d:
            raise InputError(f"expected points of dimension {self.d}, got {X.shape[1]}")
        stage = self.stage_of(X)
        eta = np.empty(X.shape[0])
        for j in np.unique(stage):
            sel = stage == j
            eta[sel] = self.stages[j].predict_eta(X[sel])
        return eta

    def predict(self, X) -> np.ndarray:
        return (self.predict_eta(X) >= 0.5).astype(np.int64)


def piecewise_predict(model: PiecewiseModel, x) -> tuple[float, int, int]:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InputError("piecewise_predict takes a single point")
    if x.shape[0] != model.d:
        raise InputError(f"expected a point of dimension {model.d}, got {x.shape[0]}")
    stage = int(model.stage_of(x)[0])
    eta = float(model.stages[stage].predict_eta(x))
    return eta, int(eta >= 0.5), stage


def excess_risk(pred, eta) -> float:
    """2 E[|eta - 1/2| 1{g != g*}] on the given sample, g* = 1{eta >= 1/2}."""
    pred = np.asarray(pred)
    eta = np.asarray(eta, dtype=float)
    bayes = (eta >= 0.5).astype(np.int64)
    return float(2.0 * np.mean(np.abs(eta - 0.5) * (pred != bayes)))


def evaluate(model, test: Dataset, oracle: Oracle | None = None) -> dict:
    if len(test) == 0:
        raise InputError("empty test set")
    pred = model.predict(test.X)
    metrics = {"precision": float(np.mean(pred == test.y)), "excess_risk": None}
    eta = test.eta
    if eta is None and oracle is not None:
        eta = oracle.eta_true(test.X)
    if eta is not None:
        metrics["excess_risk"] = excess_risk(pred, eta)
    return metrics


@dataclass
class StepRecord:
    k: int
    N_k: int
    eps_k: float
    eps_hat_k: float
    lambda_k: float | None
    labels_requested: int
    budget_used: int
    n_train: int


TRACE_FIELDS = ("k", "N_k", "eps_k", "eps_hat_k", "lambda_k", "labels_requested", "budget_used")


@dataclass
class RunResult:
    mode: str
    budget: int
    steps: list = field(default_factory=list)
    model: PiecewiseModel | None = None
    metrics: dict = field(default_factory=dict)
    budget_used: int = 0
    complete: bool = True
    abort_reason: str | None = None
    seed: int = 0

    def to_dict(self) -> dict:
        """Plain-data view, without the fitted model."""
        return {
            "mode": self.mode,
            "budget": self.budget,
            "budget_used": self.budget_used,
            "complete": self.complete,
            "abort_reason": self.abort_reason,
            "seed": self.seed,
            "metrics": dict(self.metrics),
            "n_stages": 0 if self.model is None else len(self.model.stages),
            "steps": [asdict(s) for s in self.steps],
        }


def _rngs(seed):
    return np.random.default_rng([0, seed]), np.random.default_rng([1, seed])


def _finish(result: RunResult, oracle: Oracle, cfg: EngineConfig, test_rng):
    if result.model is not None:
        result.metrics = evaluate(result.model, oracle.test_data(test_rng, cfg.test_size), oracle)
    return result


def run_active(cfg: EngineConfig, oracle: Oracle) -> RunResult:
    """Run the rejection-based active learner until the budget test fails.

    A step that would break the budget, request zero labels or produce an
    empty region is discarded and ends the loop. Sampling failures end the run
    early with ``complete=False``; labels are only charged once delivered.
    """
    sched, learner = cfg.schedule, cfg.learner
    if oracle.d != sched.d:
        raise ConfigurationError(f"schedule built for d={sched.d} but oracle has d={oracle.d}")
    rng, test_rng = _rngs(cfg.seed)
    if isinstance(oracle, PoolOracle):
        oracle.reset()
    budget = BudgetTracker(sched.N)
    result = RunResult("active", sched.N, seed=cfg.seed)
    u = cfg.u
    chain = RegionChain()
    stages: list[EtaEstimator] = []

    def draw(region, m, labeled):
        return sample_conditional(oracle, region, m, u, rng, labeled, cfg.attempts_per_point * m)

    try:
        init = draw(chain, sched.N0, True)
        budget.spend(sched.N0)
        labeled = init.as_dataset()
        stages.append(learner.fit(labeled, sched.N0, 1.0))
        result.steps.append(StepRecord(0, sched.N0, 1.0, 1.0, None, sched.N0, budget.used, len(labeled)))
        mass = 1.0
        survivors = None
        N_prev, k = sched.N0, 1
        eps_prev = 1.0
        while True:
            N_k, eps_k = sched.step(k, N_prev)
            n_req = math.floor(N_k * eps_k)
            quota_shared = cfg.recycle_labeled and cfg.recycled_count_toward_quota
            if n_req == 0 or (not quota_shared and not budget.can_spend(n_req)):
                break
            if cfg.recycle_unlabeled and survivors is not None and len(survivors):
                cand = survivors[: cfg.m_k]
                if cand.shape[0] < cfg.m_k:
                    cand = np.vstack([cand, draw(chain, cfg.m_k - cand.shape[0], False).X])
            else:
                cand = draw(chain, cfg.m_k, False).X
            level = eps_k if cfg.eps_reading == "conditional" else min(1.0, eps_k / eps_prev)
            new_chain, lam = region_extend(chain, stages[-1], cand, level, u, rng)
            if lam is None:
                log.info("step %d: empty uncertain region, stopping", k)
                break
            fresh = np.asarray(stages[-1].score(cand)) + (rng.uniform(0, u, cand.shape[0]) if u > 0 else 0.0)
            accepted = fresh <= lam
            eps_hat = float(accepted.mean())
            survivors = cand[accepted]
            reused = Dataset.empty(oracle.d)
            if cfg.recycle_labeled:
                reused = labeled.subset(new_chain.contains(labeled.X))
            n_new = n_req
            if quota_shared:
                n_new = max(0, n_req - len(reused))
            if not budget.can_spend(n_new):
                break
            new_labels = Dataset.empty(oracle.d)
            if n_new:
                new_labels = draw(new_chain, n_new, True).as_dataset()
                budget.spend(n_new)
            train = new_labels.concat(reused)
            mass *= eps_hat
            est = learner.fit(train, N_k, mass)
            labeled = labeled.concat(new_labels)
            chain = new_chain
            stages.append(est)
            result.steps.append(StepRecord(k, N_k, eps_k, eps_hat, lam, n_new, budget.used, len(train)))
            log.debug("step %d: N_k=%d eps=%.4f eps_hat=%.4f lambda=%.6f used=%d",
                      k, N_k, eps_k, eps_hat, lam, budget.used)
            N_prev, k, eps_prev = N_k, k + 1, eps_k
    except RunAborted as exc:
        log.info("active run aborted: %s", exc)
        result.complete = False
        result.abort_reason = str(exc)
    result.budget_used = budget.used
    if stages:
        result.model = PiecewiseModel(stages, chain)
    return _finish(result, oracle, cfg, test_rng)


def run_passive(cfg: EngineConfig, oracle: Oracle) -> RunResult:
    """Spend the whole budget on one i.i.d. sample and fit a single estimator."""
    N = cfg.schedule.N
    if N < 1:
        raise ConfigurationError("budget must be positive")
    rng, test_rng = _rngs(cfg.seed)
    if isinstance(oracle, PoolOracle):
        oracle.reset()
        n = min(N, oracle.n_available)
    else:
        n = N
    budget = BudgetTracker(N)
    result = RunResult("passive", N, seed=cfg.seed)
    try:
        sample = sample_conditional(oracle, RegionChain(), n, cfg.u, rng, True, cfg.attempts_per_point * n)
        budget.spend(n)
        data = sample.as_dataset()
        result.model = PiecewiseModel([cfg.learner.fit(data, n, 1.0)], RegionChain())
        result.steps.append(StepRecord(0, n, 1.0, 1.0, None, n, budget.used, len(data)))
        if n < N:
            result.complete = False
            result.abort_reason = f"pool exhausted: {n} of {N} labels available"
    except RunAborted as exc:
        result.complete = False
        result.abort_reason = str(exc)
    result.budget_used = budget.used
    return _finish(result, oracle, cfg, test_rng)
