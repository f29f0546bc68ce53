import numpy as np
import pytest
from scipy.stats import binom, norm

from scalevo.compare import (
    benjamini_hochberg,
    beta_scan_from_costs,
    bootstrap_regions,
    estimate_log_mean_likelihood,
    gini,
    interval_significance,
    kish_effective_size,
    llr_significance,
    melody_null_interval_sets,
    optimize_beta,
    region_weights,
    scale_llr,
    weighted_mean_llr,
)
from scalevo.core import IntervalSet, Scale, interval_set
from scalevo.generate import melody_population


class ConstantCost:
    name = "constant"

    def __init__(self, value):
        self.value = value

    def __call__(self, scale):
        return self.value

    def costs_for_steps(self, steps, octave):
        return np.full(steps.shape[0], self.value)


def test_logz_zero_beta_is_exact_zero(toy_space):
    entry = estimate_log_mean_likelihood(toy_space.cost_model, 0.0, 2,
                                         toy_space.dist, 2000, seed=1)
    assert entry.log_z == 0.0
    assert entry.stderr == 0.0


def test_logz_constant_cost():
    entry = estimate_log_mean_likelihood(ConstantCost(3.7), 2.0, 2,
                                         _toy_dist(), 2000, seed=1)
    assert entry.log_z == pytest.approx(-2.0 * 3.7, abs=1e-12)
    assert entry.stderr == pytest.approx(0.0, abs=1e-12)


def _toy_dist():
    from scalevo.melody import StepDistribution

    return StepDistribution(np.array([100.0, 200.0, 300.0]), np.array([0.5, 0.5]))


def test_logz_matches_exact_enumeration(toy_space):
    for beta in (0.5, 2.0):
        entry = estimate_log_mean_likelihood(toy_space.cost_model, beta, 2,
                                             toy_space.dist, 100_000, seed=5)
        exact = toy_space.exact_log_z(beta)
        assert abs(entry.log_z - exact) < 3 * entry.stderr


def test_scale_llr_against_exact(toy_space):
    beta = 1.5
    entry = estimate_log_mean_likelihood(toy_space.cost_model, beta, 2,
                                         toy_space.dist, 200_000, seed=6)
    scale = Scale((125.0, 333.0))
    cost = toy_space.cost_model(scale)
    exact = -beta * cost - toy_space.exact_log_z(beta)
    got = scale_llr(scale, toy_space.cost_model, beta, entry)
    assert got == pytest.approx(-beta * cost - entry.log_z, abs=1e-12)
    assert abs(got - exact) < 3 * entry.stderr + 1e-6


def test_logz_table_computes_on_demand(toy_space):
    from scalevo.compare import LogZTable

    table = LogZTable()
    entry = table.ensure(toy_space.cost_model, 1.0, 2, toy_space.dist,
                         n_samples=2000, seed=3)
    assert entry.n_steps == 2
    again = table.ensure(toy_space.cost_model, 1.0, 2, toy_space.dist,
                         n_samples=2000, seed=99)  # cached: seed ignored
    assert again is entry
    assert len(table.entries()) == 1


def test_scale_llr_zero_beta_and_mismatch(toy_space):
    entry = estimate_log_mean_likelihood(toy_space.cost_model, 0.0, 2,
                                         toy_space.dist, 2000, seed=2)
    assert scale_llr(Scale((100.0, 100.0)), toy_space.cost_model, 0.0, entry) == 0.0
    with pytest.raises(ValueError, match="steps"):
        scale_llr(Scale((100.0, 100.0, 100.0)), toy_space.cost_model, 0.0, entry)


def test_low_cost_scale_has_positive_llr_at_small_beta(toy_space):
    beta = 0.1
    entry = estimate_log_mean_likelihood(toy_space.cost_model, beta, 2,
                                         toy_space.dist, 100_000, seed=7)
    # a scale whose cost sits below the sampled mean must beat the baseline
    best_bin = int(np.argmax(toy_space.bin_scores))
    mid = toy_space.dist.midpoints[best_bin]
    cheap = Scale((float(mid), float(mid)))
    assert scale_llr(cheap, toy_space.cost_model, beta, entry) > 0


def test_weighted_mean_llr():
    assert weighted_mean_llr([1.0, 3.0], [1.0, 1.0]) == 2.0
    assert weighted_mean_llr([1.0, 3.0], [0.0, 2.0]) == 3.0
    assert weighted_mean_llr([0.0, 2.0], [1.0, 1.0]) == 1.0
    with pytest.raises(ValueError):
        weighted_mean_llr([1.0], [0.0])


def test_beta_scan_constant_cost_breaks_ties_low():
    rng = np.random.default_rng(0)
    scan = beta_scan_from_costs(np.full(50, 2.0), np.ones(50), np.full(10_000, 2.0))
    assert np.allclose(scan.mean_llrs, 0.0, atol=1e-10)
    assert scan.beta_star == pytest.approx(0.01)


def test_optimize_beta_recovers_generating_bias(toy_space):
    rng = np.random.default_rng(9)
    beta0 = 5.0
    target = toy_space.exact_cell_target(beta0).ravel()
    cells = rng.choice(target.size, size=600, p=target)
    costs = toy_space.cell_costs().ravel()[cells]
    null = rng.choice(toy_space.cell_costs().ravel(), size=200_000,
                      p=np.outer(toy_space.dist.probabilities,
                                 toy_space.dist.probabilities).ravel())
    scan = beta_scan_from_costs(costs, np.ones(costs.size), null)
    # grid neighbors of 5 on the 25-point log grid are 3.16 and 5.62
    assert abs(np.log10(scan.beta_star) - np.log10(beta0)) <= 0.26
    assert scan.best_llr > 2 / np.sqrt(costs.size)
    assert not scan.at_boundary


def test_optimize_beta_entry_point(toy_space):
    pop = melody_population(2, toy_space.dist, False, 200, seed=3)
    scan = optimize_beta(toy_space.cost_model, pop.scales, np.ones(200),
                         toy_space.dist, n_samples=50_000, seed=4)
    # melody-sampled data should not look significantly biased
    assert scan.best_llr <= 2 / np.sqrt(200)


def test_random_cost_null_rarely_significant():
    rng = np.random.default_rng(2024)
    k = 100
    exceed = 0
    n_seeds = 120
    null = rng.normal(size=20_000)
    for _ in range(n_seeds):
        data = rng.normal(size=k)
        scan = beta_scan_from_costs(data, np.ones(k), null)
        if scan.best_llr > 2 / np.sqrt(k):
            exceed += 1
    assert exceed / n_seeds <= 0.08


def test_llr_significance_values():
    assert llr_significance(0.0, 100) == pytest.approx(0.5)
    assert llr_significance(2 / np.sqrt(100), 100) == pytest.approx(
        1 - norm.cdf(2.0), rel=1e-9)
    assert llr_significance(-0.5, 100) > 0.5


def test_region_weights():
    scales = (
        [Scale((200.0, 300.0), region="Africa", id=f"a{i}") for i in range(5)]
        + [Scale((200.0, 300.0), region="Europe", id=f"e{i}") for i in range(100)]
    )
    w = region_weights(scales, region_cap=20)
    assert np.allclose(w[:5], 1 / 5)
    assert np.allclose(w[5:], 1 / 20)
    single = region_weights(scales[:5], region_cap=20)
    assert np.allclose(single, single[0])


def test_gini_values():
    assert gini([4, 4, 4, 4]) == pytest.approx(0.0)
    assert gini([1, 3]) == pytest.approx(0.25)
    n = 50
    counts = np.zeros(n)
    counts[-1] = 1000
    assert gini(counts) == pytest.approx(1 - 1 / n)


def test_gini_capping_never_increases_inequality():
    rng = np.random.default_rng(4)
    counts = rng.integers(1, 200, size=12)
    for cap in (5, 20, 50):
        assert gini(np.minimum(counts, cap)) <= gini(counts) + 1e-12


def test_bootstrap_regions():
    scales = (
        [Scale((200.0, 300.0), region="Africa", id=f"a{i}") for i in range(5)]
        + [Scale((200.0, 300.0), region="Europe", id=f"e{i}") for i in range(100)]
    )
    sample = bootstrap_regions(scales, region_cap=20, rng=np.random.default_rng(8))
    ids = [s.id for s in sample]
    assert len([i for i in ids if i.startswith("a")]) == 5
    assert len([i for i in ids if i.startswith("e")]) == 20
    assert len(set(ids)) == len(ids)  # no duplicates
    again = bootstrap_regions(scales, region_cap=20, rng=np.random.default_rng(8))
    assert [s.id for s in again] == ids


def test_bootstrap_weighting_invariant_to_region_duplication():
    # Under the capped bootstrap, inflating one region's count beyond the cap
    # does not move the weighted mean (exactly so when ratios are constant
    # within regions, which is the expectation statement).
    def weighted_mean(sample, llr_by_region):
        llrs = np.array([llr_by_region[s.region] for s in sample])
        return weighted_mean_llr(llrs, region_weights(sample, region_cap=20))

    llr_by_region = {"Africa": 0.4, "Europe": -0.2}
    base = [Scale((200.0, 300.0), region="Africa", id=f"a{i}") for i in range(20)]
    base += [Scale((200.0, 300.0), region="Europe", id=f"e{i}") for i in range(20)]
    before = weighted_mean(bootstrap_regions(base, 20, np.random.default_rng(1)),
                           llr_by_region)
    inflated = base + [Scale((200.0, 300.0), region="Europe", id=f"x{i}")
                       for i in range(40)]
    after = weighted_mean(bootstrap_regions(inflated, 20, np.random.default_rng(2)),
                          llr_by_region)
    assert after == pytest.approx(before)


def test_kish_effective_size():
    assert kish_effective_size(np.ones(8)) == pytest.approx(8.0)
    assert kish_effective_size([1.0, 0.0, 0.0]) == pytest.approx(1.0)


def test_benjamini_hochberg_examples():
    mask = benjamini_hochberg([0.01, 0.02, 0.03, 0.04, 0.05], alpha=0.05)
    assert mask.all()
    mask2 = benjamini_hochberg([0.001, 0.8, 0.9, 0.95], alpha=0.05)
    assert mask2.tolist() == [True, False, False, False]
    assert not benjamini_hochberg([0.2, 0.5, 0.9], alpha=0.05).any()


def test_interval_significance_binomial_spot_check():
    # empirical: 4 observations, all in the 700-720 bin; null: half the mass
    # there. Binomial tail P(X >= 4 | n=4, p=0.5) = 0.0625.
    empirical = [IntervalSet((710.0, 711.0, 712.0, 713.0), "non_octave")]
    null = [[IntervalSet((710.0, 100.0), "non_octave")] * 50]
    rows = interval_significance(empirical, null, bin_cents=20.0)
    row = next(r for r in rows if r.bin_low == 700.0)
    assert row.p_value == pytest.approx(0.0625)
    assert row.direction == "frequent"
    assert binom.sf(3, 4, 0.5) == pytest.approx(0.0625)  # oracle


def test_interval_significance_central_case_not_significant():
    empirical = [IntervalSet((710.0, 710.0, 100.0, 100.0), "non_octave")]
    null = [[IntervalSet((710.0, 100.0), "non_octave")] * 50]
    rows = interval_significance(empirical, null, bin_cents=20.0)
    row = next(r for r in rows if r.bin_low == 700.0)
    assert row.p_value >= 0.5
    assert row.direction == "none"
    assert not row.significant_after_bh


def test_interval_significance_requires_data(toy_space):
    with pytest.raises(ValueError):
        interval_significance([], [[]])


def test_melody_null_sets_match_composition(toy_space):
    scales = [
        Scale((150.0, 150.0), id="a"),
        Scale((150.0, 150.0, 150.0), id="b"),
        Scale((300.0, 300.0, 300.0, 300.0), scale_type="Theory", id="c"),
    ]
    pops = melody_null_interval_sets(scales, toy_space.dist, n_resamples=3, seed=5)
    assert len(pops) == 3
    for pop in pops:
        assert len(pop) == 3
        # non-octave sets have n(n+1)/2 intervals, octave sets n(n-1)
        assert len(pop[0]) == 3
        assert len(pop[1]) == 6
        assert len(pop[2]) == 12
        assert pop[2].mode == "octave"
