import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reject_active.core import Dataset
from reject_active.errors import ConfigurationError, LoadError, PoolExhaustionError, RegionStarvationError
from reject_active.estimators import LinearEstimator
from reject_active.oracles import (
    PoolOracle, SyntheticSpec, load_csv, make_pool, sample_conditional, synth_oracle,
)
from reject_active.rejection import RegionChain


def native_to_unit(t):
    return (np.asarray(t, dtype=float) + 1) / 2


def test_sine_endpoints():
    o = synth_oracle("sine")
    eta = o.eta_true(native_to_unit([[0.3, 1.0], [-0.7, 0.0], [0.0, -1.0]]))
    np.testing.assert_allclose(eta, [1.0, 0.5, 0.0], atol=1e-15)


def test_sine_one_dimensional():
    o = synth_oracle("sine", d=1)
    assert o.d == 1
    np.testing.assert_allclose(o.eta_true(native_to_unit([[1.0], [0.0]])), [1.0, 0.5])


def test_gauss3_midpoint_and_mean():
    o = synth_oracle("gauss3")
    assert o.eta_true(native_to_unit([[0.0, 0.0]]))[0] == pytest.approx(0.5)
    # posterior from the two normal densities at the class-1 mean
    x = np.array([0.5, 0.0])
    dens = [math.exp(-np.sum((x - m) ** 2) / (2 * 0.09)) for m in ([0.5, 0.0], [-0.5, 0.0])]
    expected = dens[0] / (dens[0] + dens[1])
    got = o.eta_true(native_to_unit([x]))[0]
    assert got == pytest.approx(expected, rel=1e-12)
    assert got > 0.99


def test_dasgupta_structure():
    o = synth_oracle("dasgupta1")
    eta = o.eta_true(native_to_unit([[-0.8, 0.1], [0.5, -0.4], [0.05, 0.9]]))
    np.testing.assert_array_equal(eta, [0.0, 1.0, 0.5])
    x = o.draw_x(np.random.default_rng(0), 20000) * 2 - 1
    in_slabs = ((x[:, 0] >= -1) & (x[:, 0] <= -0.6)) | ((x[:, 0] >= 0.2) & (x[:, 0] <= 1))
    assert in_slabs.mean() == pytest.approx(0.8, abs=0.02)
    assert (np.abs(x[:, 0]) <= 0.1).mean() == pytest.approx(0.2, abs=0.02)


def test_easyhard_halves():
    o = synth_oracle("easyhard2")
    eta = o.eta_true(native_to_unit([[-0.5, 0.3], [-0.5, -0.3], [0.25, 0.4], [0.75, -0.4]]))
    np.testing.assert_allclose(eta, [1.0, 0.0, 0.5, 0.5], atol=1e-12)


def test_unknown_dataset():
    with pytest.raises(ConfigurationError):
        SyntheticSpec("spiral")
    with pytest.raises(ConfigurationError):
        SyntheticSpec("gauss3", d=3)


@pytest.mark.parametrize("name", ["sine", "dasgupta1", "easyhard2", "gauss3"])
def test_labels_follow_eta(name):
    o = synth_oracle(name)
    rng = np.random.default_rng(42)
    data = o.sample(10_000, rng)
    assert np.all((data.eta >= 0) & (data.eta <= 1))
    assert np.all((data.X >= 0) & (data.X <= 1))
    mean_eta = o.eta_true(o.draw_x(np.random.default_rng(43), 10_000)).mean()
    se = math.sqrt(0.25 / 10_000) * math.sqrt(2)
    assert abs(data.y.mean() - mean_eta) <= 3 * se


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_load_two_rows(tmp_path):
    pool = load_csv(write(tmp_path, "0.0,1.0,0\n1.0,3.0,1\n"), -1)
    assert pool.d == 2
    np.testing.assert_array_equal(pool.data.X, [[0, 0], [1, 1]])
    np.testing.assert_array_equal(pool.data.y, [0, 1])


def test_load_header_and_named_label(tmp_path):
    pool = load_csv(write(tmp_path, "label,a,b\n1,2,5\n0,4,5\n"), "label")
    np.testing.assert_array_equal(pool.data.X, [[0, 0], [1, 0]])  # b is constant
    np.testing.assert_array_equal(pool.data.y, [1, 0])
    assert load_csv(write(tmp_path, "label,a\n1,2\n0,4\n", "e.csv"), "0").data.y.tolist() == [1, 0]


def test_load_bad_label_names_row(tmp_path):
    with pytest.raises(LoadError) as err:
        load_csv(write(tmp_path, "0.1,0\n0.2,1\n0.3,2\n"))
    assert err.value.row == 3 and "row 3" in str(err.value)


@pytest.mark.parametrize("text", ["", "\n\n", "a,b\n"])
def test_load_empty(tmp_path, text):
    with pytest.raises(LoadError):
        load_csv(write(tmp_path, text))


def test_load_unparseable_row(tmp_path):
    with pytest.raises(LoadError) as err:
        load_csv(write(tmp_path, "x,y\n0.1,0\nfoo,1\n"))
    assert err.value.row == 3
    with pytest.raises(LoadError):
        load_csv(write(tmp_path, "0.1,0\n0.2\n", "short.csv"))
    with pytest.raises(LoadError):
        load_csv(tmp_path / "missing.csv")


@settings(max_examples=50, deadline=None)
@given(rows=st.lists(
    st.tuples(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6), st.integers(0, 1)), min_size=1, max_size=30))
def test_loaded_features_in_unit_cube(tmp_path_factory, rows):
    p = tmp_path_factory.mktemp("csv") / "r.csv"
    p.write_text("".join(f"{a!r},{b!r},{y}\n" for a, b, y in rows), encoding="utf-8")
    pool = load_csv(p)
    assert pool.data.X.shape == (len(rows), 2)
    assert np.all((pool.data.X >= 0) & (pool.data.X <= 1))
    assert pool.data.y.tolist() == [y for _, _, y in rows]


def small_pool(n=5):
    X = np.linspace(0, 1, n)[:, None]
    return PoolOracle(Dataset(X, (X[:, 0] > 0.5).astype(int)))


def test_empty_chain_pool_draws_distinct():
    pool = small_pool()
    s = sample_conditional(pool, RegionChain(), 3, 1e-5, np.random.default_rng(0), labeled=True)
    assert len(set(s.indices.tolist())) == 3 and s.attempts == 3
    assert pool.n_available == 2
    np.testing.assert_array_equal(s.y, pool.data.y[s.indices])


def test_pool_without_replacement_then_exhausted():
    pool = small_pool()
    rng = np.random.default_rng(0)
    a = sample_conditional(pool, RegionChain(), 3, 0, rng, labeled=True)
    b = sample_conditional(pool, RegionChain(), 2, 0, rng, labeled=True)
    assert not set(a.indices) & set(b.indices)
    with pytest.raises(PoolExhaustionError):
        sample_conditional(pool, RegionChain(), 1, 0, rng, labeled=True)


def test_empty_threshold_starves_immediately():
    chain = RegionChain().extend(LinearEstimator([0.0], 0.0), None)
    with pytest.raises(RegionStarvationError) as err:
        sample_conditional(synth_oracle("sine", d=1), chain, 4, 1e-5, np.random.default_rng(0))
    assert err.value.accepted == 0


def test_starvation_after_max_attempts():
    # keeps only x < 0.001 of the unit interval
    est = LinearEstimator([-50.0], 0.0)
    chain = RegionChain().extend(est, float(est.score(np.array([0.001]))))
    with pytest.raises(RegionStarvationError) as err:
        sample_conditional(synth_oracle("sine", d=1), chain, 5, 0.0, np.random.default_rng(1), max_attempts=50)
    assert err.value.attempts == 50


def test_accepted_points_satisfy_membership():
    est = LinearEstimator([4.0, 0.0], -2.0)
    chain = RegionChain().extend(est, 0.8)
    s = sample_conditional(synth_oracle("sine"), chain, 200, 1e-3, np.random.default_rng(3), labeled=True)
    scores = est.score(s.X) + s.zeta[:, 0]
    assert np.all(scores <= 0.8)
    assert chain.contains(s.X).all()
    assert s.y.shape == (200,)


def test_attempts_are_geometric():
    # region keeps x1 in [0.4, 0.6] approximately: mass eps = P(score <= lam)
    est = LinearEstimator([6.0], -3.0)
    lam = float(est.score(np.array([0.6])))
    chain = RegionChain().extend(est, lam)
    oracle = synth_oracle("sine", d=1)
    attempts = accepted = 0
    for seed in range(40):
        s = sample_conditional(oracle, chain, 50, 0.0, np.random.default_rng(seed))
        attempts += s.attempts
        accepted += len(s)
    assert accepted >= 1000
    eps = 0.2
    assert attempts / accepted == pytest.approx(1 / eps, rel=0.1)


def test_make_pool_has_independent_test():
    pool = make_pool(synth_oracle("gauss3"), 1000, np.random.default_rng(0), test_size=300)
    assert len(pool) == 1000 and len(pool.test) == 300
    assert pool.data.eta is not None


def test_split_test_is_disjoint_and_fixed():
    pool = PoolOracle(Dataset(np.arange(10.0)[:, None] / 10, np.arange(10) % 2))
    a = pool.split_test(0.2, np.random.default_rng(3))
    b = pool.split_test(0.2, np.random.default_rng(3))
    assert len(a) == 8 and len(a.test) == 2
    np.testing.assert_array_equal(a.test.X, b.test.X)
    assert not set(a.test.X[:, 0]) & set(a.data.X[:, 0])
