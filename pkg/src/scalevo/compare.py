"""Likelihood-ratio evaluation of cost-biased models against the baseline.

A biased model assigns a scale the unnormalized likelihood exp(-beta * C(S))
on top of the baseline step-sampling probability. Its normalization constant
is the mean likelihood under baseline-sampled scales, estimated by Monte
Carlo; the per-scale log-likelihood ratio is then -beta * C(S) - log Z. The
module also provides region weighting, the Gini index of region counts,
region-capped bootstrap sampling, and the binomial interval-significance
test with Benjamini-Hochberg correction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from scipy.stats import binom

from .core import IntervalSet, Scale, interval_set
from .costs import evaluate_costs
from .generate import sample_melody_steps
from .stats import log_mean_exp_with_stderr

DEFAULT_REGION_CAP = 20
DEFAULT_BETA_GRID = np.logspace(-2, 4, 25)
DEFAULT_LOGZ_SAMPLES = 1_000_000


# ---------------------------------------------------------------------------
# Normalization constants and log-likelihood ratios
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogZEntry:
    model_name: str
    beta: float
    n_steps: int
    octave: bool
    log_z: float
    stderr: float
    n_samples: int


class LogZTable:
    """Cache of log normalization constants per (model, beta, n_steps)."""

    def __init__(self):
        self._entries: dict[tuple[str, float, int, bool], LogZEntry] = {}

    def add(self, entry: LogZEntry) -> None:
        self._entries[(entry.model_name, entry.beta, entry.n_steps, entry.octave)] = entry

    def get(self, model_name: str, beta: float, n_steps: int, octave: bool) -> LogZEntry:
        return self._entries[(model_name, beta, n_steps, octave)]

    def ensure(self, cost_model, beta: float, n_steps: int, dist, octave: bool = False,
               n_samples: int = DEFAULT_LOGZ_SAMPLES, seed: int = 0) -> LogZEntry:
        """Return the cached entry, estimating it on demand when absent."""
        key = (getattr(cost_model, "name", str(cost_model)), beta, n_steps, octave)
        if key not in self._entries:
            self.add(estimate_log_mean_likelihood(cost_model, beta, n_steps, dist,
                                                  n_samples, seed, octave))
        return self._entries[key]

    def entries(self) -> list[LogZEntry]:
        return list(self._entries.values())


def _log_weights(beta: float, costs: np.ndarray) -> np.ndarray:
    """-beta * costs with the beta = 0 and infinite-cost corners pinned."""
    if beta == 0.0:
        return np.zeros_like(costs)
    return np.where(np.isinf(costs), -np.inf, -beta * costs)


def estimate_log_mean_likelihood(cost_model, beta: float, n_steps: int, dist,
                                 n_samples: int, seed: int, octave: bool = False
                                 ) -> LogZEntry:
    """Monte Carlo log of the mean likelihood under baseline-sampled scales.

    Computed by log-mean-exp with max-subtraction; the standard error comes
    from the delta method on the sample variance of the weights. At beta = 0
    the result is exactly 0.
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be >= 1000")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    steps = sample_melody_steps(n_steps, dist, octave, rng, n_samples)
    costs = evaluate_costs(cost_model, steps, octave)
    return _logz_from_costs(cost_model, beta, n_steps, octave, costs)


def _logz_from_costs(cost_model, beta, n_steps, octave, costs) -> LogZEntry:
    if beta == 0.0:
        return LogZEntry(getattr(cost_model, "name", str(cost_model)), 0.0, n_steps,
                         octave, 0.0, 0.0, costs.size)
    values = _log_weights(beta, costs)
    if np.all(values == -np.inf):
        raise ValueError("all sampled costs are infinite; cannot normalize")
    log_z, stderr = log_mean_exp_with_stderr(values)
    return LogZEntry(getattr(cost_model, "name", str(cost_model)), float(beta),
                     n_steps, octave, log_z, stderr, costs.size)


def scale_llr(scale: Scale, cost_model, beta: float, entry: LogZEntry) -> float:
    """Per-scale log-likelihood ratio over the baseline: -beta*C(S) - logZ."""
    if scale.n_steps != entry.n_steps or bool(scale.octave) != entry.octave:
        raise ValueError(
            f"scale has {scale.n_steps} steps (octave={scale.octave}) but the "
            f"normalization entry is for {entry.n_steps} (octave={entry.octave})"
        )
    if beta != entry.beta:
        raise ValueError(f"beta mismatch: {beta} vs table entry {entry.beta}")
    if beta == 0.0:
        return 0.0
    return float(-beta * cost_model(scale) - entry.log_z)


def weighted_mean_llr(llrs, weights) -> float:
    llrs = np.asarray(llrs, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if llrs.shape != weights.shape:
        raise ValueError("llrs and weights must have equal lengths")
    if np.any(weights < 0):
        raise ValueError("weights must be >= 0")
    total = weights.sum()
    if total <= 0:
        raise ValueError("total weight must be > 0")
    return float((weights * llrs).sum() / total)


@dataclass(frozen=True, eq=False)
class BetaScan:
    """Grid trace of the weighted mean log-likelihood ratio over beta."""

    betas: np.ndarray
    mean_llrs: np.ndarray
    log_zs: np.ndarray
    logz_stderrs: np.ndarray
    beta_star: float
    best_llr: float
    at_boundary: bool


def beta_scan_from_costs(data_costs, weights, null_costs, betas=None) -> BetaScan:
    """Scan beta over a grid given data costs and baseline-sampled costs.

    For each beta the normalization is the log-mean-exp of -beta * null_costs
    and the objective is the weighted mean of -beta * cost - logZ over the
    data. Ties prefer the smallest beta.
    """
    betas = DEFAULT_BETA_GRID if betas is None else np.asarray(betas, dtype=float)
    data_costs = np.asarray(data_costs, dtype=float)
    weights = np.asarray(weights, dtype=float)
    null_costs = np.asarray(null_costs, dtype=float)
    mean_llrs = np.empty(betas.size)
    log_zs = np.empty(betas.size)
    stderrs = np.empty(betas.size)
    for i, beta in enumerate(betas):
        if beta == 0.0:
            log_zs[i], stderrs[i] = 0.0, 0.0
            mean_llrs[i] = 0.0
            continue
        log_z, se = log_mean_exp_with_stderr(_log_weights(beta, null_costs))
        log_zs[i], stderrs[i] = log_z, se
        llrs = _log_weights(beta, data_costs) - log_z
        mean_llrs[i] = weighted_mean_llr(llrs, weights)
    best = int(np.argmax(mean_llrs))  # argmax keeps the first (smallest beta) on ties
    return BetaScan(
        betas=betas, mean_llrs=mean_llrs, log_zs=log_zs, logz_stderrs=stderrs,
        beta_star=float(betas[best]), best_llr=float(mean_llrs[best]),
        at_boundary=best in (0, betas.size - 1),
    )


def optimize_beta(cost_model, scales, weights, dist, betas=None,
                  n_samples: int = 100_000, seed: int = 0) -> BetaScan:
    """Grid-search the bias strength maximizing the weighted mean LLR.

    All scales must share one (n_steps, octave) signature; use
    `ComparisonRunner` for mixed datasets.
    """
    sigs = {(s.n_steps, bool(s.octave)) for s in scales}
    if len(sigs) != 1:
        raise ValueError("optimize_beta needs scales with one (n_steps, octave) signature")
    (n_steps, octave), = sigs
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    null_steps = sample_melody_steps(n_steps, dist, octave, rng, n_samples)
    null_costs = evaluate_costs(cost_model, null_steps, octave)
    data_costs = np.array([cost_model(s) for s in scales])
    return beta_scan_from_costs(data_costs, weights, null_costs, betas)


@dataclass(frozen=True, eq=False)
class ComparisonResult:
    """Full model-comparison output for a (possibly mixed-size) dataset."""

    betas: np.ndarray
    mean_llrs: np.ndarray
    beta_star: float
    best_llr: float
    at_boundary: bool
    llrs: np.ndarray  # per scale, at beta_star
    weights: np.ndarray
    frac_positive: float
    k_raw: int
    k_kish: float
    p_value_raw: float
    p_value_kish: float
    logz_entries: list


def run_comparison(cost_model, scales, weights, dist, betas=None,
                   n_samples: int = 100_000, seed: int = 0) -> ComparisonResult:
    """Optimize the bias strength over a dataset with mixed scale sizes.

    Normalization constants are estimated separately for every
    (n_steps, octave) signature present in the data, from one shared sample
    per signature reused across the whole beta grid. Missing signatures are
    computed on demand; ties in the grid search prefer the smallest beta.
    """
    scales = list(scales)
    if not scales:
        raise ValueError("need at least one scale")
    betas = DEFAULT_BETA_GRID if betas is None else np.asarray(betas, dtype=float)
    weights = np.asarray(weights, dtype=float)
    data_costs = np.array([cost_model(s) for s in scales])
    signatures = sorted({(s.n_steps, bool(s.octave)) for s in scales})
    null_costs: dict[tuple[int, bool], np.ndarray] = {}
    for n_steps, octave in signatures:
        rng = np.random.default_rng(np.random.SeedSequence((seed, n_steps, int(octave))))
        steps = sample_melody_steps(n_steps, dist, octave, rng, n_samples)
        null_costs[(n_steps, octave)] = evaluate_costs(cost_model, steps, octave)

    sig_of = [(s.n_steps, bool(s.octave)) for s in scales]
    mean_llrs = np.empty(betas.size)
    log_z_by_beta: list[dict] = []
    for i, beta in enumerate(betas):
        log_z = {}
        for sig in signatures:
            if beta == 0.0:
                log_z[sig] = (0.0, 0.0)
            else:
                lz, se = log_mean_exp_with_stderr(_log_weights(beta, null_costs[sig]))
                log_z[sig] = (lz, se)
        log_z_by_beta.append(log_z)
        llrs = _log_weights(beta, data_costs) - np.array([log_z[s][0] for s in sig_of])
        mean_llrs[i] = weighted_mean_llr(llrs, weights)
    best = int(np.argmax(mean_llrs))
    beta_star = float(betas[best])
    star_z = log_z_by_beta[best]
    llrs = _log_weights(beta_star, data_costs) - np.array([star_z[s][0] for s in sig_of])
    k_raw = len(scales)
    k_kish = kish_effective_size(weights)
    best_llr = float(mean_llrs[best])
    entries = [
        LogZEntry(getattr(cost_model, "name", str(cost_model)), beta_star, n, o,
                  star_z[(n, o)][0], star_z[(n, o)][1], n_samples)
        for n, o in signatures
    ]
    return ComparisonResult(
        betas=betas, mean_llrs=mean_llrs, beta_star=beta_star, best_llr=best_llr,
        at_boundary=best in (0, betas.size - 1),
        llrs=llrs, weights=weights,
        frac_positive=float(np.mean(llrs > 0)),
        k_raw=k_raw, k_kish=k_kish,
        p_value_raw=llr_significance(best_llr, k_raw),
        p_value_kish=llr_significance(best_llr, k_kish),
        logz_entries=entries,
    )


def llr_significance(mean_llr: float, k: float) -> float:
    """One-sided normal tail probability of a weighted mean LLR.

    Under a random cost the optimized mean LLR is approximately normal with
    variance 1/k, so p = 1 - Phi(mean_llr * sqrt(k)); mean_llr = 2/sqrt(k)
    gives p ~= 0.023.
    """
    if k <= 0:
        raise ValueError("k must be > 0")
    return float(ndtr(-mean_llr * np.sqrt(k)))


# ---------------------------------------------------------------------------
# Region weighting
# ---------------------------------------------------------------------------


def region_counts(scales) -> dict[str, int]:
    counts: dict[str, int] = {}
    for s in scales:
        counts[s.region] = counts.get(s.region, 0) + 1
    return counts


def region_weights(scales, region_cap: int = DEFAULT_REGION_CAP) -> np.ndarray:
    """Per-scale weight 1 / min(region count, cap)."""
    if region_cap < 1:
        raise ValueError("region_cap must be >= 1")
    counts = region_counts(scales)
    return np.array([1.0 / min(counts[s.region], region_cap) for s in scales])


def gini(counts) -> float:
    """Gini index of a count distribution: 0 for uniform, up to 1 - 1/n."""
    x = np.sort(np.asarray(counts, dtype=float))
    if np.any(x < 0):
        raise ValueError("counts must be >= 0")
    total = x.sum()
    if total <= 0:
        raise ValueError("counts must have positive total")
    n = x.size
    # half the relative mean absolute difference, via the sorted identity
    return float((2.0 * np.sum(np.arange(1, n + 1) * x)) / (n * total) - (n + 1) / n)


def bootstrap_regions(scales, region_cap: int = DEFAULT_REGION_CAP,
                      rng: np.random.Generator | None = None) -> list[Scale]:
    """Per region, min(count, cap) scales sampled without replacement."""
    rng = rng or np.random.default_rng(0)
    by_region: dict[str, list[Scale]] = {}
    for s in scales:
        by_region.setdefault(s.region, []).append(s)
    out: list[Scale] = []
    for region in sorted(by_region):
        group = by_region[region]
        take = min(len(group), region_cap)
        idx = rng.choice(len(group), size=take, replace=False)
        out.extend(group[i] for i in sorted(idx))
    return out


def kish_effective_size(weights) -> float:
    w = np.asarray(weights, dtype=float)
    return float(w.sum() ** 2 / (w**2).sum())


# ---------------------------------------------------------------------------
# Interval significance with multiple-testing control
# ---------------------------------------------------------------------------


def benjamini_hochberg(p_values, alpha: float = 0.05) -> np.ndarray:
    """Boolean rejection mask controlling the false discovery rate at alpha."""
    p = np.asarray(p_values, dtype=float)
    m = p.size
    order = np.argsort(p, kind="stable")
    thresholds = alpha * (np.arange(1, m + 1) / m)
    passing = np.nonzero(p[order] <= thresholds)[0]
    mask = np.zeros(m, dtype=bool)
    if passing.size:
        mask[order[: passing[-1] + 1]] = True
    return mask


@dataclass(frozen=True)
class SignificanceRow:
    bin_low: float
    bin_high: float
    empirical_count: int
    empirical_freq: float
    null_freq: float
    p_value: float
    significant_after_bh: bool
    direction: str  # "frequent" | "rare" | "none"


def interval_significance(empirical_sets: list[IntervalSet],
                          null_populations: list[list[IntervalSet]],
                          bin_cents: float = 20.0, alpha: float = 0.05
                          ) -> list[SignificanceRow]:
    """Binomial per-bin test of empirical interval counts against a null.

    The null bin probabilities are pooled over the resampled populations
    (which must match the empirical scale-size composition). For each bin the
    tail probability of seeing a count at least as frequent (or at least as
    rare) as observed is corrected across bins with Benjamini-Hochberg.
    """
    if not empirical_sets:
        raise ValueError("need at least one empirical interval set")
    emp = np.concatenate([s.as_array() for s in empirical_sets])
    null_vals = np.concatenate([
        s.as_array() for pop in null_populations for s in pop
    ]) if null_populations else np.empty(0)
    if null_vals.size == 0:
        raise ValueError("null populations are empty")
    top = max(emp.max(), null_vals.max())
    edges = np.arange(0.0, top + 2 * bin_cents, bin_cents)
    emp_counts, _ = np.histogram(emp, bins=edges)
    null_counts, _ = np.histogram(null_vals, bins=edges)
    p_null = null_counts / null_counts.sum()
    total = int(emp_counts.sum())

    p_values = np.empty(edges.size - 1)
    directions = []
    for i, k in enumerate(emp_counts):
        freq = k / total
        if freq > p_null[i]:
            p_values[i] = float(binom.sf(k - 1, total, p_null[i]))  # P(X >= k)
            directions.append("frequent")
        elif freq < p_null[i]:
            p_values[i] = float(binom.cdf(k, total, p_null[i]))  # P(X <= k)
            directions.append("rare")
        else:
            p_values[i] = float(binom.sf(k - 1, total, p_null[i]))
            directions.append("none")
    significant = benjamini_hochberg(p_values, alpha)
    return [
        SignificanceRow(
            bin_low=float(edges[i]), bin_high=float(edges[i + 1]),
            empirical_count=int(emp_counts[i]), empirical_freq=float(emp_counts[i] / total),
            null_freq=float(p_null[i]), p_value=float(p_values[i]),
            significant_after_bh=bool(significant[i]), direction=directions[i],
        )
        for i in range(edges.size - 1)
    ]


def melody_null_interval_sets(scales, dist, n_resamples: int, seed: int
                              ) -> list[list[IntervalSet]]:
    """Baseline-sampled interval-set populations matching a dataset's sizes.

    Each resample draws one scale per empirical scale with the same step
    count and octave flag, so the null composition matches the data.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    signature = [(s.n_steps, bool(s.octave)) for s in scales]
    populations = []
    for _ in range(n_resamples):
        pop = []
        for n_steps, octave in signature:
            steps = sample_melody_steps(n_steps, dist, octave, rng, 1)[0]
            pop.append(interval_set(Scale(
                tuple(steps), scale_type="Theory" if octave else "Vocal",
                octave=octave, region="synthetic")))
        populations.append(pop)
    return populations
