import numpy as np
import pytest

from scalevo.stats import jensen_shannon, log_mean_exp, log_mean_exp_with_stderr


def test_jsd_symmetric_and_bounded():
    rng = np.random.default_rng(2)
    for _ in range(25):
        p = rng.dirichlet(np.ones(10))
        q = rng.dirichlet(np.ones(10))
        d = jensen_shannon(p, q)
        assert d == pytest.approx(jensen_shannon(q, p))
        assert 0.0 <= d <= np.log(2) + 1e-12


def test_jsd_zero_iff_equal():
    p = np.array([0.2, 0.3, 0.5])
    assert jensen_shannon(p, p) == 0.0
    q = np.array([0.2, 0.5, 0.3])
    assert jensen_shannon(p, q) > 0.0


def test_jsd_attains_upper_bound_on_disjoint_support():
    p = np.array([1.0, 0.0])
    q = np.array([0.0, 1.0])
    assert jensen_shannon(p, q) == pytest.approx(np.log(2))


def test_jsd_normalizes_inputs():
    p = np.array([2.0, 3.0, 5.0])
    assert jensen_shannon(p, p / p.sum()) == pytest.approx(0.0)


def test_log_mean_exp_matches_direct():
    rng = np.random.default_rng(3)
    v = rng.normal(size=200)
    assert log_mean_exp(v) == pytest.approx(np.log(np.mean(np.exp(v))))


def test_log_mean_exp_stable_for_large_values():
    v = np.array([1000.0, 1000.0 + np.log(3.0)])
    assert log_mean_exp(v) == pytest.approx(1000.0 + np.log(2.0), abs=1e-9)


def test_log_mean_exp_stderr_shrinks():
    rng = np.random.default_rng(4)
    _, se_small = log_mean_exp_with_stderr(rng.normal(size=100))
    _, se_big = log_mean_exp_with_stderr(rng.normal(size=100_000))
    assert se_big < se_small


def test_log_mean_exp_all_minus_inf():
    assert log_mean_exp(np.array([-np.inf, -np.inf])) == -np.inf
