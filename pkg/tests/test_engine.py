import json

import numpy as np
import pytest

from reject_active.core import Dataset
from reject_active.errors import ConfigurationError, InputError
from reject_active.estimators import KnnEstimator, LearnerSpec, LinearEstimator, predict_eta
from reject_active.engine import (
    EngineConfig, PiecewiseModel, evaluate, excess_risk, piecewise_predict, run_active, run_passive,
)
from reject_active.oracles import PoolOracle, make_pool, synth_oracle
from reject_active.rejection import RegionChain


class Const:
    """Scores and probabilities fixed to one value."""

    def __init__(self, eta, d=1):
        self.eta, self.d = eta, d

    def predict_eta(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            return float(self.eta)
        return np.full(X.shape[0], float(self.eta))

    def score(self, X):
        v = self.predict_eta(X)
        return np.maximum(v, 1 - v) if np.ndim(v) else max(v, 1 - v)

    def predict(self, X):
        return (np.asarray(self.predict_eta(X)) >= 0.5).astype(np.int64)


def ones_pool(n=3000, d=2, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.random((n, d))
    T = rng.random((500, d))
    return PoolOracle(Dataset(X, np.ones(n, dtype=int)), Dataset(T, np.ones(500, dtype=int)))


@pytest.mark.parametrize("kind", ["histogram", "knn", "linear"])
def test_constant_label_pool_is_perfect(kind):
    cfg = EngineConfig.build(600, 2, learner=LearnerSpec(kind))
    res = run_active(cfg, ones_pool())
    assert res.complete
    assert res.metrics["precision"] == 1.0
    assert res.model.predict(np.random.default_rng(5).random((200, 2))).min() == 1


def test_accounting_identity():
    cfg = EngineConfig.build(2000, 2, learner=LearnerSpec("knn"), seed=3)
    res = run_active(cfg, synth_oracle("sine"))
    assert len(res.steps) > 1
    assert sum(s.labels_requested for s in res.steps) == res.budget_used <= 2000
    used = [s.budget_used for s in res.steps]
    assert used == sorted(used)
    assert all(0 <= s.eps_hat_k <= 1 for s in res.steps)


def test_lambdas_at_least_half():
    cfg = EngineConfig.build(3000, 2, learner=LearnerSpec("histogram"), seed=1)
    res = run_active(cfg, synth_oracle("gauss3"))
    lams = [s.lambda_k for s in res.steps[1:]]
    assert lams and min(lams) >= 0.5


def test_deterministic():
    cfg = EngineConfig.build(1500, 2, learner=LearnerSpec("knn"), seed=9)
    a = run_active(cfg, synth_oracle("easyhard2")).to_dict()
    b = run_active(cfg, synth_oracle("easyhard2")).to_dict()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_pool_run_never_repeats_a_label():
    pool = make_pool(synth_oracle("gauss3"), 3000, np.random.default_rng(0), test_size=500)
    cfg = EngineConfig.build(1500, 2, learner=LearnerSpec("knn"))
    res = run_active(cfg, pool)
    # reveal() refuses repeats, so the spent count equals the consumed mask
    assert res.budget_used == len(pool) - pool.n_available


@pytest.mark.parametrize("lab,unlab", [(False, False), (True, False), (False, True), (True, True)])
def test_recycling_variants_are_valid(lab, unlab):
    cfg = EngineConfig.build(1500, 2, learner=LearnerSpec("histogram"), recycle_labeled=lab,
                             recycle_unlabeled=unlab, seed=2)
    res = run_active(cfg, synth_oracle("sine"))
    assert res.complete and res.budget_used <= 1500
    assert sum(s.labels_requested for s in res.steps) == res.budget_used
    if not lab:
        assert all(s.n_train == s.labels_requested for s in res.steps)


def test_quota_sharing_spends_less_or_equal():
    base = EngineConfig.build(1500, 2, learner=LearnerSpec("histogram"), seed=4)
    shared = base.replace(recycled_count_toward_quota=True)
    res = run_active(shared, synth_oracle("sine"))
    assert res.budget_used <= 1500
    for s in res.steps[1:]:
        assert s.labels_requested <= int(np.floor(s.N_k * s.eps_k))


def test_dimension_mismatch():
    cfg = EngineConfig.build(600, 1)
    with pytest.raises(ConfigurationError):
        run_active(cfg, synth_oracle("sine"))


def test_passive_zero_budget():
    with pytest.raises(ConfigurationError):
        EngineConfig.build(0, 2)


def test_passive_spends_min_of_budget_and_pool():
    pool = ones_pool(n=300)
    res = run_passive(EngineConfig.build(1000, 2), pool)
    assert res.budget_used == 300 and not res.complete
    res = run_passive(EngineConfig.build(200, 2), pool)
    assert res.budget_used == 200 and res.complete


def test_passive_knn1_recalls_training_set():
    X = np.random.default_rng(0).random((200, 2))
    y = (X[:, 0] > 0.5).astype(int)
    pool = PoolOracle(Dataset(X, y), Dataset(X, y))
    res = run_passive(EngineConfig.build(200, 2, learner=LearnerSpec("knn", knn_k=1)), pool)
    assert res.metrics["precision"] == 1.0


def test_piecewise_single_stage():
    m = PiecewiseModel([Const(0.3)], RegionChain())
    for x in ([0.1], [0.9]):
        assert piecewise_predict(m, x) == (0.3, 0, 0)


def test_piecewise_two_stages():
    chain = RegionChain().extend(Const(0.9), 0.7)
    m = PiecewiseModel([Const(0.9), Const(0.2)], chain)
    assert piecewise_predict(m, [0.5]) == (0.9, 1, 0)
    chain = RegionChain().extend(Const(0.6), 0.7)
    m = PiecewiseModel([Const(0.6), Const(0.2)], chain)
    assert piecewise_predict(m, [0.5]) == (0.2, 0, 1)


def test_piecewise_errors():
    m = PiecewiseModel([Const(0.3)], RegionChain())
    with pytest.raises(InputError):
        piecewise_predict(m, [0.1, 0.2])
    with pytest.raises(InputError):
        PiecewiseModel([Const(0.3)], RegionChain().extend(Const(0.3), 0.7))


def test_excess_risk_examples():
    eta = np.array([0.2, 0.7, 0.9])
    assert excess_risk((eta >= 0.5).astype(int), eta) == 0.0
    assert excess_risk(np.zeros(4, int), np.ones(4)) == 1.0
    test = Dataset(np.zeros((3, 1)), np.ones(3, dtype=int), eta=np.ones(3))
    m = PiecewiseModel([Const(0.1)], RegionChain())
    assert evaluate(m, test) == {"precision": 0.0, "excess_risk": 1.0}


def test_excess_risk_double_implementation():
    oracle = synth_oracle("sine")
    test = oracle.test_data(np.random.default_rng(0))
    pred = np.random.default_rng(1).integers(0, 2, len(test))
    total = 0.0
    for p, e in zip(pred.tolist(), test.eta.tolist()):
        bayes = 1 if e >= 0.5 else 0
        if p != bayes:
            total += abs(e - 0.5)
    assert excess_risk(pred, test.eta) == pytest.approx(2 * total / len(test), abs=1e-12)


def test_evaluate_empty_test():
    with pytest.raises(InputError):
        evaluate(PiecewiseModel([Const(0.3)], RegionChain()), Dataset.empty(1))


def early_misclassified(res, oracle, rng):
    """Fraction of test points leaving the chain before the last stage whose label differs from g*."""
    test = oracle.test_data(rng, 5000)
    stage = res.model.stage_of(test.X)
    early = stage < len(res.model.stages) - 1
    if not early.any():
        return 0.0
    pred = res.model.predict(test.X[early])
    return float(np.mean(pred != (test.eta[early] >= 0.5)))


@pytest.mark.slow
def test_correct_classification_outside_last_region():
    oracle = synth_oracle("sine", d=1)
    fracs = []
    for seed in range(10):
        cfg = EngineConfig.build(16000, 1, mode="theoretical", learner=LearnerSpec("histogram"), seed=seed)
        res = run_active(cfg, oracle)
        fracs.append(early_misclassified(res, oracle, np.random.default_rng([3, seed])))
    assert np.mean(fracs) <= 0.05
