"""Interval-spacing and motor-constraint step scoring, and their product.

The melody model scores a step interval by the probability that it survives
repeated production and perception errors (interval spacing) times an
exponential penalty on large intervals (motor constraint):

    p_is(I) = Phi(I / (2 sigma))^L        p_mc(I) = exp(-I / I0)

The normalized product over a grid gives a step-size distribution. Fitting
routines recover the parameters from melodic corpora, empirical step
histograms, and interval-discrimination accuracy data.
"""

from __future__ import annotations

import csv
import warnings
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .core import DataFormatError
from .stats import jensen_shannon, normal_cdf

CENTS_PER_SEMITONE = 100.0


@dataclass(frozen=True)
class MelodyParams:
    """Melody-model parameters (all interval quantities in cents).

    sigma_is is the combined production+perception standard deviation,
    melody_length the number of notes transmitted without error, and i0 the
    inverse rate of the exponential large-interval penalty.
    """

    sigma_is: float
    melody_length: int
    i0: float

    def __post_init__(self):
        if self.sigma_is <= 0:
            raise ValueError("sigma_is must be > 0")
        if self.melody_length < 1:
            raise ValueError("melody_length must be >= 1")
        if self.i0 <= 0:
            raise ValueError("i0 must be > 0")


#: Default constants: corpus-constrained fit (sigma 31 cents, L 14, I0 2.1 st).
DEFAULT_MELODY_PARAMS = MelodyParams(sigma_is=31.0, melody_length=14, i0=210.0)
#: Alternative constrained fit with the wider sigma estimate (61 cents).
WIDE_SIGMA_MELODY_PARAMS = MelodyParams(sigma_is=61.0, melody_length=14, i0=210.0)
#: Unconstrained three-parameter fit to the vocal step distribution.
UNCONSTRAINED_MELODY_PARAMS = MelodyParams(sigma_is=53.0, melody_length=15, i0=70.0)


def p_is(interval, sigma_is: float, melody_length: int):
    """Probability of error-free transmission: Phi(I/2, sigma)^L."""
    return normal_cdf(np.asarray(interval, dtype=float) / 2.0, sigma_is) ** melody_length


def p_mc(interval, i0: float):
    """Motor-constraint likelihood exp(-I / I0)."""
    return np.exp(-np.asarray(interval, dtype=float) / i0)


def p_melody(interval, params: MelodyParams):
    """Unnormalized melody score p_is * p_mc."""
    return p_is(interval, params.sigma_is, params.melody_length) * p_mc(interval, params.i0)


def melody_step_pmf(params: MelodyParams, bin_edges) -> np.ndarray:
    """Normalized melody-model probabilities at bin midpoints."""
    edges = np.asarray(bin_edges, dtype=float)
    mids = 0.5 * (edges[:-1] + edges[1:])
    y = p_melody(mids, params)
    total = y.sum()
    if total <= 0:
        raise ValueError("melody curve has zero mass on the given bins")
    return y / total


# ---------------------------------------------------------------------------
# Step-size distributions
# ---------------------------------------------------------------------------

DEFAULT_BIN_CENTS = 20.0
DEFAULT_MAX_STEP_CENTS = 1700.0


@dataclass(frozen=True, eq=False)
class StepDistribution:
    """A binned probability distribution over step sizes in cents."""

    bin_edges: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        probs = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "probabilities", probs)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("bin_edges must be ascending with at least two values")
        if probs.shape != (edges.size - 1,):
            raise ValueError("need one probability per bin")
        if np.any(probs < 0):
            raise ValueError("probabilities must be non-negative")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1")
        # lookup caches for the samplers' hot paths
        with np.errstate(divide="ignore"):
            object.__setattr__(self, "_log_probs",
                               np.where(probs > 0, np.log(np.maximum(probs, 1e-300)),
                                        -np.inf).tolist())
        object.__setattr__(self, "_edges_list", edges.tolist())
        object.__setattr__(self, "_cum_probs", np.cumsum(probs))

    @classmethod
    def from_steps(cls, steps, weights=None, bin_cents: float = DEFAULT_BIN_CENTS,
                   max_cents: float = DEFAULT_MAX_STEP_CENTS) -> "StepDistribution":
        """Histogram step values (optionally weighted) on a regular binning."""
        edges = np.arange(0.0, max_cents + bin_cents, bin_cents)
        hist, _ = np.histogram(np.asarray(steps, dtype=float), bins=edges, weights=weights)
        total = hist.sum()
        if total <= 0:
            raise ValueError("no steps fall inside the binning")
        return cls(edges, hist / total)

    @classmethod
    def uniform(cls, max_cents: float = 600.0, bin_cents: float = DEFAULT_BIN_CENTS
                ) -> "StepDistribution":
        edges = np.arange(0.0, max_cents + bin_cents, bin_cents)
        n = edges.size - 1
        return cls(edges, np.full(n, 1.0 / n))

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def support_min(self) -> float:
        nz = np.nonzero(self.probabilities)[0]
        return float(self.bin_edges[nz[0]]) if nz.size else float("inf")

    def prob_of(self, values) -> np.ndarray:
        """Bin probability containing each value; 0 outside the support."""
        v = np.atleast_1d(np.asarray(values, dtype=float))
        idx = np.searchsorted(self.bin_edges, v, side="right") - 1
        ok = (idx >= 0) & (idx < self.probabilities.size) & (v <= self.bin_edges[-1])
        # values exactly on the top edge belong to the last bin
        idx = np.clip(idx, 0, self.probabilities.size - 1)
        return np.where(ok, self.probabilities[idx], 0.0)

    def log_prob_of_steps(self, steps) -> float:
        """Sum of log bin probabilities over a step list (-inf off support)."""
        edges = self._edges_list
        logs = self._log_probs
        n = len(logs)
        total = 0.0
        for x in steps:
            if x == edges[-1]:  # the top edge belongs to the last bin
                i = n - 1
            else:
                i = bisect_right(edges, x) - 1
                if i < 0 or i >= n:
                    return float("-inf")
            lp = logs[i]
            if lp == -np.inf:
                return float("-inf")
            total += lp
        return total

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Inverse-CDF sampling with uniform jitter within each bin."""
        u = rng.random(size)
        idx = np.minimum(np.searchsorted(self._cum_probs, u, side="right"),
                         self.probabilities.size - 1)
        lo = self.bin_edges[idx]
        width = self.bin_edges[idx + 1] - self.bin_edges[idx]
        return lo + width * rng.random(np.shape(idx))


class UniformStepSource:
    """Uniform(0, max_cents) step source for the generative model.

    Unlike an empirical `StepDistribution`, the baseline-probability ratio of
    a uniform source is defined as exactly 1 for every candidate scale, so
    acceptance depends on the cost alone.
    """

    def __init__(self, max_cents: float = 600.0):
        if max_cents <= 0:
            raise ValueError("max_cents must be > 0")
        self.max_cents = float(max_cents)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.uniform(0.0, self.max_cents, size=size)

    def log_prob_of_steps(self, steps) -> float:
        return 0.0


def write_step_distribution(path, dist: StepDistribution) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bin_low", "bin_high", "probability"])
        for lo, hi, p in zip(dist.bin_edges[:-1], dist.bin_edges[1:], dist.probabilities):
            writer.writerow([repr(float(lo)), repr(float(hi)), repr(float(p))])


def read_step_distribution(path) -> StepDistribution:
    lows, highs, probs = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["bin_low", "bin_high", "probability"]:
            raise DataFormatError(f"{path}: expected header bin_low,bin_high,probability")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                lows.append(float(row[0])); highs.append(float(row[1])); probs.append(float(row[2]))
            except (ValueError, IndexError) as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
    if not lows:
        raise DataFormatError(f"{path}: empty distribution")
    edges = np.array(lows + [highs[-1]])
    return StepDistribution(edges, np.array(probs))


# ---------------------------------------------------------------------------
# Melodic corpus histograms and parameter fitting
# ---------------------------------------------------------------------------

N_CORPUS_BINS = 15  # absolute melodic-interval bins, 0..14 semitones


@dataclass(frozen=True, eq=False)
class CorpusHistogram:
    """Counts of absolute melodic intervals in 1-semitone bins 0..14."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.shape != (N_CORPUS_BINS,):
            raise ValueError(f"expected {N_CORPUS_BINS} bins, got {counts.shape}")
        if np.any(counts < 0) or not np.issubdtype(counts.dtype, np.number):
            raise ValueError("counts must be non-negative numbers")
        if counts.sum() <= 0:
            raise ValueError("histogram needs at least one positive count")
        object.__setattr__(self, "counts", counts.astype(float))

    @property
    def midpoints_semitones(self) -> np.ndarray:
        return np.arange(N_CORPUS_BINS) + 0.5


def read_corpus_histogram(path) -> CorpusHistogram:
    """Read a melodic corpus CSV with header semitone_bin,count (15 rows)."""
    counts = np.zeros(N_CORPUS_BINS)
    seen = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["semitone_bin", "count"]:
            raise DataFormatError(f"{path}: expected header semitone_bin,count")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                b = int(row[0]); c = float(row[1])
            except (ValueError, IndexError) as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
            if not 0 <= b < N_CORPUS_BINS:
                raise DataFormatError(f"{path}:{lineno}: bin {b} outside 0..14")
            if b in seen:
                raise DataFormatError(f"{path}:{lineno}: duplicate bin {b}")
            seen.add(b)
            counts[b] = c
    if len(seen) != N_CORPUS_BINS:
        raise DataFormatError(f"{path}: expected {N_CORPUS_BINS} rows, got {len(seen)}")
    return CorpusHistogram(counts)


def fit_mc(hist: CorpusHistogram) -> float:
    """Maximum-likelihood exponential rate I0, in semitones.

    Binned MLE over the histogram midpoints: the count-weighted mean midpoint.
    """
    w = hist.counts
    if w.sum() <= 0:
        raise ValueError("all counts are zero")
    m = hist.midpoints_semitones
    return float((w * m).sum() / w.sum())


@dataclass(frozen=True)
class ISFit:
    sigma_is: float
    melody_length: int
    jsd: float
    degenerate: bool


def fit_is(empirical: StepDistribution, i0: float,
           sigma_grid=None, length_grid=None) -> ISFit:
    """Grid-search (sigma_is, L) minimizing JSD to an empirical step histogram.

    ``i0`` is in cents. The melody curve is evaluated at the empirical bin
    midpoints and renormalized before comparison. A degenerate empirical
    distribution (single occupied bin) yields a warning but still returns the
    best grid point.
    """
    if i0 <= 0:
        raise ValueError("i0 must be > 0")
    sigmas = np.arange(10, 121) if sigma_grid is None else np.asarray(sigma_grid)
    lengths = np.arange(1, 51) if length_grid is None else np.asarray(length_grid)
    degenerate = int(np.count_nonzero(empirical.probabilities)) <= 1
    if degenerate:
        warnings.warn("empirical step distribution is degenerate (single occupied bin)")
    mids = empirical.midpoints
    mc = np.exp(-mids / i0)
    best = None
    for sigma in sigmas:
        base = normal_cdf(mids / 2.0, float(sigma))
        powed = np.ones_like(base)
        prev_length = 0
        for length in lengths:
            powed = powed * base ** (int(length) - prev_length)  # running power
            prev_length = int(length)
            y = powed * mc
            total = y.sum()
            if total <= 0:
                continue
            d = jensen_shannon(y / total, empirical.probabilities)
            if best is None or d < best[0]:
                best = (d, float(sigma), int(length))
    if best is None:
        raise ValueError("melody curve vanished on every grid point")
    return ISFit(sigma_is=best[1], melody_length=best[2], jsd=best[0], degenerate=degenerate)


def fit_sigma_per(points) -> float:
    """Least-squares sigma for accuracy = Phi(deltaI / (2 sigma)).

    ``points`` is a sequence of (delta_cents, accuracy) pairs. Points with
    accuracy <= 0.5 at positive delta are uninformative under the model and
    are down-weighted to zero.
    """
    pts = [(float(d), float(a)) for d, a in points]
    if not pts:
        raise ValueError("need at least one point")
    deltas = np.array([d for d, _ in pts])
    accs = np.array([a for _, a in pts])
    if np.any(deltas < 0) or np.any((accs <= 0) | (accs >= 1)):
        raise ValueError("deltas must be >= 0 and accuracies in (0, 1)")
    weights = np.where((deltas > 0) & (accs <= 0.5), 0.0, 1.0)
    if weights.sum() == 0 or np.all(deltas[weights > 0] == 0):
        raise ValueError("no informative points (all accuracies <= 0.5)")

    def loss(log_sigma):
        pred = normal_cdf(deltas / 2.0, float(np.exp(log_sigma)))
        return float((weights * (pred - accs) ** 2).sum())

    res = minimize_scalar(loss, bounds=(np.log(0.5), np.log(5000.0)), method="bounded",
                          options={"xatol": 1e-10})
    return float(np.exp(res.x))


def melody_scale_probability(scale, dist: StepDistribution) -> float:
    """Log-probability of a scale's steps under a binned step distribution.

    Steps outside the distribution's support give -inf (flagged by a warning).
    """
    logp = dist.log_prob_of_steps(scale.steps)
    if logp == float("-inf"):
        warnings.warn(f"scale {scale.id!r} has steps outside the step-distribution support")
    return logp


def empirical_step_distribution(scales, weights=None, bin_cents: float = DEFAULT_BIN_CENTS,
                                max_cents: float = DEFAULT_MAX_STEP_CENTS
                                ) -> StepDistribution:
    """Pooled step histogram over a dataset, one weight per scale."""
    scales = list(scales)
    if weights is None:
        weights = np.ones(len(scales))
    steps = np.concatenate([np.asarray(s.steps) for s in scales])
    step_weights = np.concatenate([
        np.full(s.n_steps, float(w)) for s, w in zip(scales, weights)
    ])
    return StepDistribution.from_steps(steps, weights=step_weights,
                                       bin_cents=bin_cents, max_cents=max_cents)
