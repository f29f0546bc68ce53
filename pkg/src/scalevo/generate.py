"""Scale-population generation: i.i.d. baseline sampling, a range-constrained
null chain, and Metropolis-style biased sampling against a cost model.

The biased sampler proposes candidates with three moves (regenerate a fresh
scale, perturb one degree, shuffle the step order) and accepts with
probability min(1, exp(-beta * dC) * P(new steps) / P(old steps)), where P is
the product of baseline step probabilities. Every post-decision state, i.e.
the accepted candidate or the retained incumbent, joins the population.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .complexity import complexity_cost
from .core import CENTS_PER_OCTAVE, Scale
from .harmonicity import EmptyIntervalSetError, scale_intervals_for_cost
from .melody import StepDistribution
from .stats import jensen_shannon

DEFAULT_RANGE_CENTS = 1700.0


@dataclass(frozen=True)
class GeneratorConfig:
    """Configuration of a biased-sampling run.

    ``population_size`` scales are produced per chain and ``n_repeats``
    independent chains are concatenated.
    """

    n_steps: int
    beta: float = 0.0
    octave: bool = False
    population_size: int = 10_000
    n_repeats: int = 10
    seed: int = 0
    move_probs: tuple[float, float, float] = (0.5, 0.4, 0.1)
    perturb_width: float = 50.0

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.population_size < 1:
            raise ValueError("population_size must be >= 1")
        if self.n_repeats < 1:
            raise ValueError("n_repeats must be >= 1")
        if abs(sum(self.move_probs) - 1.0) > 1e-9 or any(p < 0 for p in self.move_probs):
            raise ValueError("move_probs must be non-negative and sum to 1")
        if self.perturb_width <= 0:
            raise ValueError("perturb_width must be > 0")


@dataclass(frozen=True, eq=False)
class Population:
    """Generated scales with their costs (costs may be None for null chains)."""

    scales: tuple[Scale, ...]
    costs: np.ndarray | None
    config: GeneratorConfig | None = None

    def __post_init__(self):
        if self.costs is not None:
            costs = np.asarray(self.costs, dtype=float)
            object.__setattr__(self, "costs", costs)
            if costs.shape != (len(self.scales),):
                raise ValueError("scales and costs must have equal lengths")

    def __len__(self) -> int:
        return len(self.scales)

    def steps_matrix(self) -> np.ndarray:
        return np.array([s.steps for s in self.scales])


def _chain_rngs(seed: int, n_chains: int) -> list[np.random.Generator]:
    """Independent per-chain generators derived from one seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n_chains)]


def sample_melody_steps(n_steps: int, dist, octave: bool,
                        rng: np.random.Generator, size: int) -> np.ndarray:
    """Matrix of i.i.d. step draws; octave rows rescale to sum to 1200."""
    steps = dist.sample(rng, (size, n_steps))
    if octave:
        steps = steps * (CENTS_PER_OCTAVE / steps.sum(axis=1, keepdims=True))
    return steps


def sample_melody_scale(n_steps: int, dist, octave: bool,
                        rng: np.random.Generator, scale_id: str = "") -> Scale:
    """One scale of i.i.d. steps from the baseline distribution."""
    steps = sample_melody_steps(n_steps, dist, octave, rng, 1)[0]
    return _make_scale(steps, octave, scale_id)


def _make_scale(steps, octave: bool, scale_id: str = "") -> Scale:
    return Scale(tuple(float(s) for s in steps),
                 scale_type="Theory" if octave else "Vocal",
                 region="synthetic", octave=octave, id=scale_id)


def melody_population(n_steps: int, dist, octave: bool, size: int, seed: int) -> Population:
    """Unbiased baseline population of i.i.d. melody-sampled scales."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    steps = sample_melody_steps(n_steps, dist, octave, rng, size)
    scales = tuple(_make_scale(steps[i], octave, scale_id=f"melody-{i}")
                   for i in range(size))
    return Population(scales, None, None)


def range_filtered_population(n_steps: int, dist, range_cents: float = DEFAULT_RANGE_CENTS,
                              size: int = 10_000, seed: int = 0,
                              min_acceptance: float = 1e-6) -> Population:
    """Rejection-sample scales until ``size`` of them have range <= range_cents."""
    if range_cents <= 0:
        raise ValueError("range_cents must be > 0")
    if n_steps * dist.support_min > range_cents:
        raise RuntimeError(
            f"impossible constraint: {n_steps} steps of at least {dist.support_min} "
            f"cents cannot fit a range of {range_cents} cents"
        )
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    kept: list[np.ndarray] = []
    drawn = accepted = 0
    while accepted < size:
        batch = max(size, 1000)
        steps = dist.sample(rng, (batch, n_steps))
        ok = steps.sum(axis=1) <= range_cents
        drawn += batch
        accepted += int(ok.sum())
        kept.append(steps[ok])
        if drawn >= 1_000_000 and accepted / drawn < min_acceptance:
            raise RuntimeError(
                f"acceptance rate {accepted / drawn:.2e} below {min_acceptance:.0e} "
                f"after {drawn} draws (range {range_cents} cents, {n_steps} steps)"
            )
    steps = np.concatenate(kept)[:size]
    scales = tuple(_make_scale(steps[i], False, scale_id=f"range-{i}") for i in range(size))
    return Population(scales, None, None)


# ---------------------------------------------------------------------------
# Null model: all scales with range <= R equally likely
# ---------------------------------------------------------------------------


def _null_range_init(n_steps: int, range_cents: float, rng, n_walkers: int) -> np.ndarray:
    """Initial degree sets: uniform steps rescaled so range ~ U(0, R)."""
    steps = rng.uniform(0.0, 1.0, size=(n_walkers, n_steps))
    target = rng.uniform(0.0, range_cents, size=(n_walkers, 1))
    steps = steps * (target / steps.sum(axis=1, keepdims=True))
    return np.cumsum(steps, axis=1)


def _null_range_sweep(degrees: np.ndarray, range_cents: float, rng,
                      perturb_cents: float = 100.0) -> np.ndarray:
    """One move per walker: perturb a random degree, wrap mod R, re-sort."""
    n_walkers, n = degrees.shape
    idx = rng.integers(0, n, size=n_walkers)
    delta = rng.uniform(-perturb_cents, perturb_cents, size=n_walkers)
    degrees[np.arange(n_walkers), idx] = (
        degrees[np.arange(n_walkers), idx] + delta
    ) % range_cents
    degrees.sort(axis=1)
    return degrees


def null_range_population(n_steps: int, range_cents: float, chain_length: int,
                          seed: int = 0) -> Population:
    """Monte Carlo chain over equally-likely scales with range <= R.

    Steps are recovered from the sorted degrees by differencing against an
    anchored 0, so every state keeps exactly ``n_steps`` steps and a range at
    most R. Costs are not defined for the null model.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    degrees = _null_range_init(n_steps, range_cents, rng, 1)
    scales = []
    for t in range(chain_length):
        degrees = _null_range_sweep(degrees, range_cents, rng)
        steps = np.diff(np.concatenate([[0.0], degrees[0]]))
        if np.any(steps <= 0):  # coincident degrees have measure zero; retry move
            continue
        scales.append(_make_scale(steps, False, scale_id=f"null-{t}"))
    return Population(tuple(scales), None, None)


@dataclass(frozen=True)
class NullRangeRow:
    n_steps: int
    mc_mean_min_step: float
    mc_stderr_min_step: float
    mc_mean_max_step: float
    mc_stderr_max_step: float
    formula_min_step: float  # R / (N (N - 1)), recorded for comparison


def null_range_study(n_steps_values, range_cents: float = DEFAULT_RANGE_CENTS,
                     seed: int = 0, n_walkers: int = 256, chain_length: int = 8000,
                     burn_in: int = 2000) -> list[NullRangeRow]:
    """Min/max step statistics of the null chain versus the closed-form value.

    Runs ``n_walkers`` independent chains per scale size; the standard error
    comes from the spread of per-walker means, which is robust to
    within-chain autocorrelation. The closed-form column R/(N(N-1)) is
    recorded alongside the Monte Carlo estimate rather than asserted.
    """
    rows = []
    for n_steps in n_steps_values:
        rng = np.random.default_rng(np.random.SeedSequence((seed, n_steps)))
        degrees = _null_range_init(n_steps, range_cents, rng, n_walkers)
        sum_min = np.zeros(n_walkers)
        sum_max = np.zeros(n_walkers)
        kept = 0
        for t in range(chain_length):
            degrees = _null_range_sweep(degrees, range_cents, rng)
            if t < burn_in:
                continue
            steps = np.diff(np.concatenate(
                [np.zeros((n_walkers, 1)), degrees], axis=1), axis=1)
            sum_min += steps.min(axis=1)
            sum_max += steps.max(axis=1)
            kept += 1
        mean_min = sum_min / kept
        mean_max = sum_max / kept
        rows.append(NullRangeRow(
            n_steps=n_steps,
            mc_mean_min_step=float(mean_min.mean()),
            mc_stderr_min_step=float(mean_min.std(ddof=1) / math.sqrt(n_walkers)),
            mc_mean_max_step=float(mean_max.mean()),
            mc_stderr_max_step=float(mean_max.std(ddof=1) / math.sqrt(n_walkers)),
            formula_min_step=range_cents / (n_steps * (n_steps - 1)) if n_steps > 1
            else float("nan"),
        ))
    return rows


# ---------------------------------------------------------------------------
# Metropolis-style biased sampling
# ---------------------------------------------------------------------------


class _ChainState:
    __slots__ = ("steps", "log_pi", "cost")

    def __init__(self, steps: np.ndarray, log_pi: float, cost: float):
        self.steps = steps
        self.log_pi = log_pi
        self.cost = cost


def _state_cost(cost_model, steps: np.ndarray, octave: bool) -> float:
    fast = getattr(cost_model, "cost_of_steps", None)
    try:
        if fast is not None:
            return float(fast(steps, octave))
        return float(cost_model(_make_scale(steps, octave)))
    except EmptyIntervalSetError:
        return float("inf")
    except Exception as exc:  # surface the failing scale for diagnosis
        raise RuntimeError(
            f"cost model {getattr(cost_model, 'name', cost_model)!r} failed on "
            f"steps {np.round(steps, 3).tolist()}: {exc}"
        ) from exc


def _initial_state(cost_model, n_steps, step_source, octave, rng, max_tries=1000):
    for _ in range(max_tries):
        steps = sample_melody_steps(n_steps, step_source, octave, rng, 1)[0]
        log_pi = step_source.log_prob_of_steps(steps)
        if not np.isfinite(log_pi):
            continue
        cost = _state_cost(cost_model, steps, octave)
        if np.isfinite(cost):
            return _ChainState(steps, log_pi, cost)
    raise RuntimeError("could not draw an initial scale with finite cost and probability")


def _perturb_steps(steps: np.ndarray, octave: bool, width: float,
                   rng: np.random.Generator) -> np.ndarray:
    """Move one degree by U(-width, width); wrap octave degrees mod 1200.

    Non-octave proposals that would push a degree negative are redrawn, per
    the sampling scheme. Degrees are re-sorted and differenced back to steps.
    Small scales dominate usage, so this runs on plain Python lists.
    """
    degrees = []
    acc = 0.0
    for s in steps:
        acc += s
        degrees.append(acc)
    if octave:
        if len(degrees) == 1:
            return steps.copy()  # no interior degree to move
        interior = degrees[:-1]
        i = rng.integers(0, len(interior))
        interior[i] = (interior[i] + rng.uniform(-width, width)) % CENTS_PER_OCTAVE
        interior.sort()
        interior.append(CENTS_PER_OCTAVE)
        moved = interior
    else:
        while True:
            i = rng.integers(0, len(degrees))
            candidate = degrees[i] + rng.uniform(-width, width)
            if candidate >= 0:
                break
        moved = degrees.copy()
        moved[i] = candidate
        moved.sort()
    out = np.empty(len(moved))
    prev = 0.0
    for j, d in enumerate(moved):
        out[j] = d - prev
        prev = d
    return out


def _run_chain(cost_model, config: GeneratorConfig, step_source,
               rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    p_regen, p_perturb, _ = config.move_probs
    beta = config.beta
    octave = config.octave
    state = _initial_state(cost_model, config.n_steps, step_source, octave, rng)
    steps_out = np.empty((config.population_size, config.n_steps))
    costs_out = np.empty(config.population_size)
    log_prob = step_source.log_prob_of_steps
    for t in range(config.population_size):
        u = rng.random()
        if u < p_regen:
            cand = sample_melody_steps(config.n_steps, step_source, octave, rng, 1)[0]
        elif u < p_regen + p_perturb:
            cand = _perturb_steps(state.steps, octave, config.perturb_width, rng)
        else:
            cand = rng.permutation(state.steps)
        cand_log_pi = log_prob(cand)
        accept = False
        if cand_log_pi > -math.inf and cand.min() > 0:
            cand_cost = _state_cost(cost_model, cand, octave)
            if cand_cost < math.inf:
                log_acc = -beta * (cand_cost - state.cost) + cand_log_pi - state.log_pi
                accept = log_acc >= 0 or math.log(rng.random()) < log_acc
        if accept:
            state = _ChainState(cand, cand_log_pi, cand_cost)
        steps_out[t] = state.steps
        costs_out[t] = state.cost
    return steps_out, costs_out


def mcmc_chain_arrays(cost_model, config: GeneratorConfig, step_source
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Array form of `mcmc_generate`: (steps matrix, costs), chains stacked.

    Same chain states in the same order as `mcmc_generate`, without the
    per-scale object construction; suited to bulk analyses of long chains.
    """
    parts = [
        _run_chain(cost_model, config, step_source, rng)
        for rng in _chain_rngs(config.seed, config.n_repeats)
    ]
    return (np.concatenate([p[0] for p in parts]),
            np.concatenate([p[1] for p in parts]))


def mcmc_generate(cost_model, config: GeneratorConfig, step_source) -> Population:
    """Generate a biased population of scales against a cost model.

    ``step_source`` is a `StepDistribution` or `UniformStepSource`. The run is
    bit-reproducible from (config, cost model): chains draw from generators
    spawned deterministically from the seed and are concatenated in chain
    order.
    """
    steps, costs = mcmc_chain_arrays(cost_model, config, step_source)
    per_chain = config.population_size
    scales = tuple(
        _make_scale(steps[i], config.octave,
                    scale_id=f"{i // per_chain}-{i % per_chain}")
        for i in range(steps.shape[0])
    )
    return Population(scales, costs, config)


# ---------------------------------------------------------------------------
# Population summaries and trait trajectories
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PopulationSummary:
    size: int
    step_bin_edges: np.ndarray
    step_probs: np.ndarray
    degree_bin_edges: np.ndarray
    degree_probs: np.ndarray
    mean_cost: float | None
    mean_of_score: float | None
    mean_interval_categories: float | None
    jsd_steps: float | None
    jsd_degrees: float | None


def population_summary(pop: Population, bin_cents: float = 20.0,
                       max_cents: float = 1700.0,
                       reference_steps: StepDistribution | None = None,
                       reference_degrees: np.ndarray | None = None,
                       of_table=None, complexity_w: float | None = None
                       ) -> PopulationSummary:
    """Histogram and mean-trait summary of a generated population.

    ``reference_degrees`` must be probabilities on the same degree binning if
    supplied. Mean octave-fifth score and mean interval-category counts are
    computed only when ``of_table`` / ``complexity_w`` are given.
    """
    steps = np.concatenate([s.steps for s in pop.scales])
    edges = np.arange(0.0, max_cents + bin_cents, bin_cents)
    step_hist, _ = np.histogram(steps, bins=edges)
    step_probs = step_hist / max(step_hist.sum(), 1)

    degrees = np.concatenate([
        s.degrees[1:-1] if s.octave else s.degrees[1:] for s in pop.scales
    ]) if pop.scales else np.empty(0)
    degree_hist, _ = np.histogram(degrees, bins=edges)
    degree_probs = degree_hist / max(degree_hist.sum(), 1)

    mean_of = None
    if of_table is not None:
        mean_of = float(np.mean([
            of_table.raw_at(scale_intervals_for_cost(s)).mean() for s in pop.scales
        ]))
    mean_cat = None
    if complexity_w is not None:
        mean_cat = float(np.mean([complexity_cost(s, complexity_w) for s in pop.scales]))
    jsd_steps = None
    if reference_steps is not None:
        ref_hist, _ = np.histogram(reference_steps.midpoints, bins=edges,
                                   weights=reference_steps.probabilities)
        jsd_steps = jensen_shannon(step_probs, ref_hist)
    jsd_degrees = None
    if reference_degrees is not None:
        jsd_degrees = jensen_shannon(degree_probs, reference_degrees)
    return PopulationSummary(
        size=len(pop),
        step_bin_edges=edges, step_probs=step_probs,
        degree_bin_edges=edges, degree_probs=degree_probs,
        mean_cost=float(pop.costs.mean()) if pop.costs is not None else None,
        mean_of_score=mean_of,
        mean_interval_categories=mean_cat,
        jsd_steps=jsd_steps,
        jsd_degrees=jsd_degrees,
    )


@dataclass(frozen=True)
class TraitRow:
    model_name: str
    beta: float
    mean_of_score: float
    mean_interval_categories: float


def trait_trajectory(cost_models, betas, base_config: GeneratorConfig, step_source,
                     of_table, complexity_w: float = 20.0) -> list[TraitRow]:
    """Mean octave-fifth score and interval-category count along a beta sweep.

    Populations are generated for every (cost model, beta) pair from the same
    base configuration; both traits are reported for each population so that
    selecting on one trait exposes its effect on the other.
    """
    rows = []
    for model in cost_models:
        for beta in betas:
            config = replace(base_config, beta=float(beta))
            pop = mcmc_generate(model, config, step_source)
            summary = population_summary(pop, of_table=of_table, complexity_w=complexity_w)
            rows.append(TraitRow(
                model_name=model.name, beta=float(beta),
                mean_of_score=summary.mean_of_score,
                mean_interval_categories=summary.mean_interval_categories,
            ))
    return rows
