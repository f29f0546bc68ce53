"""Interference (roughness) models and the interference cost function.

Three pairwise-partial dissonance rules are implemented for two complex
tones: a critical-bandwidth ratio model (HK), the classic beating-envelope
model of Sethares (S), and a log-frequency kernel model (B). Dissonance
curves are z-normalized over a 1-cent grid exactly as harmonicity scores,
and the cost of a scale is the mean z-scored dissonance of its intervals
(high dissonance means high cost, so there is no sign flip).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import Scale
from .harmonicity import (
    GRID_MAX_CENTS,
    MAX_COST_INTERVAL_CENTS,
    NormalizedScoreTable,
    _normalize,
    scale_intervals_for_cost,
)

DEFAULT_ROOT_HZ = 261.6  # middle C; reference for converting cents to Hz
DEFAULT_HK_EXPONENT = 1.359


@dataclass(frozen=True, eq=False)
class Timbre:
    """A complex tone: partial k at k times the fundamental, with amplitudes."""

    n_partials: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=float)
        object.__setattr__(self, "amplitudes", amps)
        if self.n_partials < 1:
            raise ValueError("n_partials must be >= 1")
        if amps.shape != (self.n_partials,) or np.any(amps <= 0):
            raise ValueError("need one positive amplitude per partial")

    @classmethod
    def harmonic(cls, n_partials: int = 10, rolloff: float = 1.0) -> "Timbre":
        """Harmonic timbre with amplitudes k**-rolloff."""
        k = np.arange(1, n_partials + 1, dtype=float)
        return cls(n_partials, k**-rolloff)


@dataclass(frozen=True)
class InterferenceModel:
    """An interference scoring rule: kind "HK", "S" (Sethares) or "B".

    ``r`` is the HK amplitude-weighting exponent. ``canonical_g`` replaces the
    HK unbounded bandwidth-distance term x with the bounded bump
    g(x) = (4x e^(1-4x))^2 for sensitivity checks.
    """

    kind: str
    r: float = DEFAULT_HK_EXPONENT
    canonical_g: bool = False

    def __post_init__(self):
        if self.kind not in ("HK", "S", "B"):
            raise ValueError(f"unknown interference model kind {self.kind!r}")
        if self.r <= 0:
            raise ValueError("r must be > 0")

    @property
    def name(self) -> str:
        if self.kind == "HK":
            suffix = ",g" if self.canonical_g else ""
            return f"HK(r={self.r:g}{suffix})"
        return self.kind


def _partial_grids(f1: float, f2: float, timbre: Timbre):
    if f1 <= 0 or f2 <= 0:
        raise ValueError("frequencies must be > 0 Hz")
    k = np.arange(1, timbre.n_partials + 1, dtype=float)
    fi = np.outer(k * f1, np.ones_like(k))
    fj = np.outer(np.ones_like(k), k * f2)
    ai = np.outer(timbre.amplitudes, np.ones_like(k))
    aj = np.outer(np.ones_like(k), timbre.amplitudes)
    return fi, fj, ai, aj


def dissonance_hk(f1: float, f2: float, timbre: Timbre,
                  r: float = DEFAULT_HK_EXPONENT, canonical_g: bool = False) -> float:
    """Critical-bandwidth dissonance between two complex tones.

    Every pair of partials contributes |fi - fj| divided by the critical
    bandwidth 1.72*((fi+fj)/2)**0.65, amplitude-weighted by (ai*aj)**(r/2)
    and normalized by sum(ai**r). Note the distance term is unbounded, so
    widely separated partials keep adding dissonance; ``canonical_g`` applies
    the bounded bump g(x) = (4x e^(1-4x))^2 instead.
    """
    fi, fj, ai, aj = _partial_grids(f1, f2, timbre)
    wc = 1.72 * ((fi + fj) / 2.0) ** 0.65
    x = np.abs(fi - fj) / wc
    d = (4.0 * x * np.exp(1.0 - 4.0 * x)) ** 2 if canonical_g else x
    weight = (ai * aj) ** (r / 2.0)
    return float((weight * d).sum() / (timbre.amplitudes**r).sum())


def dissonance_sethares(f1: float, f2: float, timbre: Timbre) -> float:
    """Beating-envelope dissonance between two complex tones.

    Pairwise term a_i a_j (exp(-3.5 x) - exp(-5.75 x)) with
    x = 0.24 |fi - fj| / (0.021 min(fi, fj) + 19), the standard scaling that
    peaks near a quarter of the critical bandwidth and vanishes for both
    coincident and widely separated partials.
    """
    fi, fj, ai, aj = _partial_grids(f1, f2, timbre)
    x = 0.24 * np.abs(fi - fj) / (0.021 * np.minimum(fi, fj) + 19.0)
    d = np.exp(-3.5 * x) - np.exp(-5.75 * x)
    return float((ai * aj * d).sum())


def dissonance_berezovsky(f1: float, f2: float, timbre: Timbre) -> float:
    """Log-frequency kernel dissonance between two complex tones.

    Pairwise term min(ai, aj)**0.606 * exp(-(ln(x / wc))^2) where
    x = |log2(fi/fj)| and wc = 0.67 * min(fi, fj)**-0.68. The kernel peaks
    at x = wc and the coincident-partial term is defined as its limit, 0.
    """
    fi, fj, ai, aj = _partial_grids(f1, f2, timbre)
    x = np.abs(np.log2(fi / fj))
    wc = 0.67 * np.minimum(fi, fj) ** -0.68
    safe_x = np.where(x > 0, x, 1.0)
    kernel = np.where(x > 0, np.exp(-(np.log(safe_x / wc)) ** 2), 0.0)
    return float((np.minimum(ai, aj) ** 0.606 * kernel).sum())


def dissonance(model: InterferenceModel, f1: float, f2: float, timbre: Timbre) -> float:
    if model.kind == "HK":
        return dissonance_hk(f1, f2, timbre, r=model.r, canonical_g=model.canonical_g)
    if model.kind == "S":
        return dissonance_sethares(f1, f2, timbre)
    return dissonance_berezovsky(f1, f2, timbre)


@lru_cache(maxsize=16)
def _cached_table(kind: str, r: float, canonical_g: bool, n_partials: int,
                  amplitudes: tuple, root_hz: float) -> NormalizedScoreTable:
    model = InterferenceModel(kind, r=r, canonical_g=canonical_g)
    timbre = Timbre(n_partials, np.asarray(amplitudes))
    grid = np.arange(0, GRID_MAX_CENTS + 1)
    f2 = root_hz * 2.0 ** (grid / 1200.0)
    raw = np.array([dissonance(model, root_hz, f, timbre) for f in f2])
    return _normalize(f"{model.name}@{root_hz:g}Hz", grid, raw)


def interference_table(model: InterferenceModel, timbre: Timbre,
                       root_hz: float = DEFAULT_ROOT_HZ) -> NormalizedScoreTable:
    """z-normalized dissonance curve on the 1-cent grid [0, 1250] cents.

    Cents are converted to frequencies relative to ``root_hz``; the table
    therefore depends on the chosen root.
    """
    return _cached_table(model.kind, model.r, model.canonical_g,
                         timbre.n_partials, tuple(timbre.amplitudes), float(root_hz))


def interference_cost(scale: Scale, table: NormalizedScoreTable,
                      max_cents: float = MAX_COST_INTERVAL_CENTS) -> float:
    """Mean z-scored dissonance over the scale's interval set (no sign flip)."""
    vals = scale_intervals_for_cost(scale, max_cents)
    return float(table.z_at(vals).mean())
