"""Harmonicity scoring of intervals and the harmony cost function.

Three interval-scoring rules are provided. The ratio model (GP) scores an
interval by the best simple-integer fraction within a tolerance window. The
octave-fifth model (OF) scores proximity to 702 and 1200 cents with Gaussian
kernels. The spectral-template model (HP) measures how closely the combined
spectrum of two complex tones matches a single harmonic template.

Scores are z-normalized over a 1-cent grid on [0, 1250] cents and averaged
over a scale's interval set; the cost is the negated average.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from math import gcd, log2

import numpy as np

from .core import Scale, degree_intervals, filter_intervals, interval_set

GRID_MAX_CENTS = 1250
MAX_COST_INTERVAL_CENTS = 1250.0
TEMPLATE_SMEAR_CENTS = 7.0
DEFAULT_GP_MAX_DENOMINATOR = 24

#: Parameter grids used for model sweeps.
SWEEP_W_CENTS = tuple(range(2, 41, 2))
SWEEP_N_PARTIALS = tuple(range(3, 41))
SWEEP_ROLLOFF = tuple(range(0, 11)) + tuple(range(12, 21, 2))


class EmptyIntervalSetError(ValueError):
    """Raised when a cost function is given a scale with no usable intervals."""


@dataclass(frozen=True)
class HarmonicityModel:
    """A named harmonicity scoring rule and its parameters.

    kind "OF" and "GP" use the window width ``w`` (cents); kind "HP" uses the
    partial count ``n`` and roll-off exponent ``rho``.
    """

    kind: str
    w: float = 20.0
    n: int = 10
    rho: float = 1.0
    max_denominator: int = DEFAULT_GP_MAX_DENOMINATOR

    def __post_init__(self):
        if self.kind not in ("OF", "GP", "HP"):
            raise ValueError(f"unknown harmonicity model kind {self.kind!r}")
        if self.kind in ("OF", "GP") and not 1.0 <= self.w <= 100.0:
            raise ValueError("w must be in [1, 100] cents")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.rho < 0:
            raise ValueError("rho must be >= 0")
        if self.max_denominator < 1:
            raise ValueError("max_denominator must be >= 1")

    @property
    def name(self) -> str:
        if self.kind == "HP":
            return f"HP(n={self.n},rho={self.rho:g})"
        return f"{self.kind}(w={self.w:g})"


@lru_cache(maxsize=32)
def _gp_fractions(max_denominator: int, cents_cap: float) -> tuple[np.ndarray, np.ndarray]:
    """Reduced fractions x/y (y <= x, y <= max_denominator) up to cents_cap.

    Returns (cents, score) arrays sorted by cents, score = (x + y + 1)/(x*y).
    """
    cents, scores = [], []
    for y in range(1, max_denominator + 1):
        x = y
        while True:
            c = 1200.0 * log2(x / y)
            if c > cents_cap:
                break
            if gcd(x, y) == 1:
                cents.append(c)
                scores.append((x + y + 1) / (x * y))
            x += 1
    order = np.argsort(cents)
    return np.asarray(cents)[order], np.asarray(scores)[order]


def h_gp(interval: float, w: float,
         max_denominator: int = DEFAULT_GP_MAX_DENOMINATOR) -> float:
    """Best fraction score (x+y+1)/(x*y) within w cents of the interval.

    Returns 0 when no fraction with denominator <= max_denominator falls
    inside the window.
    """
    if interval < 0:
        raise ValueError("interval must be >= 0 cents")
    cap = 500.0 * np.ceil((float(interval) + w + 1.0) / 500.0)  # share cache entries
    cents, scores = _gp_fractions(max_denominator, cap)
    lo = np.searchsorted(cents, interval - w, side="left")
    hi = np.searchsorted(cents, interval + w, side="right")
    if hi <= lo:
        return 0.0
    return float(scores[lo:hi].max())


def _gp_score_grid(w: float, max_denominator: int, grid: np.ndarray) -> np.ndarray:
    cents, scores = _gp_fractions(max_denominator, float(grid[-1]) + w + 1.0)
    out = np.zeros_like(grid, dtype=float)
    for c, s in zip(cents, scores):
        lo = int(np.ceil(c - w))
        hi = int(np.floor(c + w))
        if hi < grid[0] or lo > grid[-1]:
            continue
        lo = max(lo, int(grid[0]))
        hi = min(hi, int(grid[-1]))
        seg = slice(lo - int(grid[0]), hi - int(grid[0]) + 1)
        out[seg] = np.maximum(out[seg], s)
    return out


def h_of(interval, w: float):
    """Unit-height Gaussian kernels at the fifth (702) and octave (1200)."""
    iv = np.asarray(interval, dtype=float)
    return np.exp(-((iv - 1200.0) ** 2) / (2 * w**2)) + np.exp(-((iv - 702.0) ** 2) / (2 * w**2))


@lru_cache(maxsize=16)
def _hp_autocorr(n: int, rho: float) -> tuple[np.ndarray, float]:
    """Autocorrelation of the smeared harmonic template on a 1-cent grid.

    The template places partial k at 1200*log2(k) cents with amplitude
    k**-rho, each smeared by a Gaussian of std 7 cents. Returns the
    non-negative-lag autocorrelation and the squared norm A[0].
    """
    pad = int(4 * TEMPLATE_SMEAR_CENTS) + 2
    top = int(np.ceil(1200.0 * log2(n))) if n > 1 else 0
    grid = np.arange(-pad, top + pad + 1, dtype=float)
    template = np.zeros_like(grid)
    for k in range(1, n + 1):
        c = 1200.0 * log2(k)
        template += k ** (-rho) * np.exp(-((grid - c) ** 2) / (2 * TEMPLATE_SMEAR_CENTS**2))
    full = np.correlate(template, template, mode="full")
    acorr = full[template.size - 1:]
    return acorr, float(acorr[0])


def h_hp(interval, n: int, rho: float):
    """Spectral-template harmonicity of two complex tones offset by an interval.

    The two tones' smeared amplitude spectra are superposed at the given
    offset; the score is the best cosine similarity between the combination
    and a single-tone template over all candidate fundamentals on the grid.
    The score is 1 exactly at the unison and below 1 elsewhere.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    scalar = np.isscalar(interval)
    ivs = np.atleast_1d(np.asarray(interval, dtype=float))
    if np.any(ivs < 0):
        raise ValueError("interval must be >= 0 cents")
    acorr, a0 = _hp_autocorr(int(n), float(rho))
    m = acorr.size

    def lookup(lags: np.ndarray) -> np.ndarray:
        lags = np.abs(lags)
        vals = np.where(lags < m, acorr[np.minimum(lags, m - 1)], 0.0)
        return vals

    out = np.empty(ivs.shape)
    for pos, iv in np.ndenumerate(ivs):
        offset = int(round(iv))
        s = np.arange(-(m - 1), offset + m)
        combined = lookup(s) + lookup(s - offset)
        cross = acorr[offset] if offset < m else 0.0
        denom = np.sqrt(2 * a0 + 2 * cross) * np.sqrt(a0)
        out[pos] = combined.max() / denom
    return float(out[0]) if scalar else out


@dataclass(frozen=True, eq=False)
class NormalizedScoreTable:
    """Interval scores z-normalized over the 1-cent grid [0, 1250] cents."""

    name: str
    grid: np.ndarray
    raw: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        if not (self.grid.shape == self.raw.shape == self.z.shape):
            raise ValueError("grid, raw and z must have matching shapes")

    def z_at(self, intervals) -> np.ndarray:
        """z-scores by nearest grid point."""
        idx = np.clip(np.rint(np.asarray(intervals, dtype=float)).astype(int),
                      0, self.grid.size - 1)
        return self.z[idx]

    def raw_at(self, intervals) -> np.ndarray:
        idx = np.clip(np.rint(np.asarray(intervals, dtype=float)).astype(int),
                      0, self.grid.size - 1)
        return self.raw[idx]


def _normalize(name: str, grid: np.ndarray, raw: np.ndarray) -> NormalizedScoreTable:
    std = raw.std()
    if std < 1e-12:
        raise ValueError(f"{name}: constant raw scores cannot be z-normalized")
    z = (raw - raw.mean()) / std
    return NormalizedScoreTable(name=name, grid=grid, raw=raw, z=z)


def normalize_scores(model: HarmonicityModel) -> NormalizedScoreTable:
    """Evaluate a harmonicity model on the grid and z-normalize the scores."""
    grid = np.arange(0, GRID_MAX_CENTS + 1)
    if model.kind == "OF":
        raw = h_of(grid.astype(float), model.w)
    elif model.kind == "GP":
        raw = _gp_score_grid(model.w, model.max_denominator, grid)
    else:
        raw = h_hp(grid.astype(float), model.n, model.rho)
    return _normalize(model.name, grid, np.asarray(raw, dtype=float))


def scale_intervals_for_cost(scale: Scale, max_cents: float = MAX_COST_INTERVAL_CENTS,
                             use_degrees: bool = False) -> np.ndarray:
    """The interval values a cost function averages over, as an array.

    Octave scales use circular pitch-class intervals, others plain pairwise
    intervals; values above ``max_cents`` are excluded. Raises
    EmptyIntervalSetError when nothing remains.
    """
    ivs = degree_intervals(scale) if use_degrees else interval_set(scale)
    kept = filter_intervals(ivs, max_cents)
    if len(kept) == 0:
        raise EmptyIntervalSetError(
            f"scale {scale.id!r} has no intervals <= {max_cents} cents"
        )
    return kept.as_array()


def harmony_cost(scale: Scale, table: NormalizedScoreTable,
                 max_cents: float = MAX_COST_INTERVAL_CENTS,
                 use_degrees: bool = False) -> float:
    """Negated mean z-score of the scale's intervals under a score table."""
    vals = scale_intervals_for_cost(scale, max_cents, use_degrees)
    return float(-table.z_at(vals).mean())


def write_score_table(path, table: NormalizedScoreTable) -> None:
    """Export a score table as CSV with columns cents,raw,z."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["cents", "raw", "z"])
        for c, r, z in zip(table.grid, table.raw, table.z):
            writer.writerow([int(c), repr(float(r)), repr(float(z))])
