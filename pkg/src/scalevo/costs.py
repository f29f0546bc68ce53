"""Cost models: named scoring rules mapping a scale to a scalar cost.

Each model is a callable object with a ``name``. Table-backed models
additionally provide a vectorized ``costs_for_steps`` used by the sampling
machinery; it returns +inf for scales whose filtered interval set is empty
instead of raising, so a handful of degenerate samples cannot abort a large
Monte Carlo estimate.
"""

from __future__ import annotations

import numpy as np

from .complexity import ANNOTATION_VALIDATED_W, ward_categories
from .core import CENTS_PER_OCTAVE, Scale
from .harmonicity import (
    MAX_COST_INTERVAL_CENTS,
    EmptyIntervalSetError,
    HarmonicityModel,
    NormalizedScoreTable,
    normalize_scores,
    scale_intervals_for_cost,
)
from .interference import DEFAULT_ROOT_HZ, InterferenceModel, Timbre, interference_table

MODEL_NAMES = ("of", "gp", "hp", "hk", "sethares", "berezovsky", "complexity")


def _batch_intervals(steps: np.ndarray, octave: bool) -> tuple[np.ndarray, np.ndarray]:
    """Interval matrix and validity mask for a batch of scales.

    ``steps`` has shape (n_scales, n_steps). Returns (intervals, valid) where
    intervals has one row of interval values per scale (octave: circular
    pitch-class intervals; otherwise all pairwise degree differences) and
    valid marks intervals <= the cost cutoff.
    """
    steps = np.asarray(steps, dtype=float)
    degrees = np.concatenate([np.zeros((steps.shape[0], 1)), np.cumsum(steps, axis=1)], axis=1)
    if octave:
        pcs = degrees[:, :-1]
        n = pcs.shape[1]
        i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        off = i != j
        ivs = (pcs[:, j[off]] - pcs[:, i[off]]) % CENTS_PER_OCTAVE
        valid = (ivs <= MAX_COST_INTERVAL_CENTS) & (ivs > 0)  # drop octave multiples
    else:
        n = degrees.shape[1]
        iu, ju = np.triu_indices(n, k=1)
        ivs = degrees[:, ju] - degrees[:, iu]
        valid = ivs <= MAX_COST_INTERVAL_CENTS
    return ivs, valid


def _interval_values(steps: np.ndarray, octave: bool) -> np.ndarray:
    """Filtered interval values of one scale, without Scale construction."""
    degrees = np.concatenate([[0.0], np.cumsum(steps)])
    if octave:
        pcs = degrees[:-1]
        diffs = (pcs[None, :] - pcs[:, None]) % CENTS_PER_OCTAVE
        ivs = diffs[~np.eye(pcs.size, dtype=bool)]
        ivs = ivs[(ivs > 0) & (ivs <= MAX_COST_INTERVAL_CENTS)]
    else:
        iu, ju = np.triu_indices(degrees.size, k=1)
        ivs = degrees[ju] - degrees[iu]
        ivs = ivs[ivs <= MAX_COST_INTERVAL_CENTS]
    if ivs.size == 0:
        raise EmptyIntervalSetError("no intervals below the cost cutoff")
    return ivs


class TableCostModel:
    """Cost from a z-normalized score table: sign * mean z over the intervals."""

    def __init__(self, name: str, table: NormalizedScoreTable, sign: float):
        self.name = name
        self.table = table
        self._sign = sign

    def __call__(self, scale: Scale) -> float:
        vals = scale_intervals_for_cost(scale)
        return float(self._sign * self.table.z_at(vals).mean())

    def cost_of_steps(self, steps: np.ndarray, octave: bool) -> float:
        """Scalar fast path used by the chain sampler."""
        return float(self._sign * self.table.z_at(_interval_values(steps, octave)).mean())

    def costs_for_steps(self, steps: np.ndarray, octave: bool) -> np.ndarray:
        ivs, valid = _batch_intervals(steps, octave)
        z = self.table.z_at(ivs)
        counts = valid.sum(axis=1)
        total = np.where(valid, z, 0.0).sum(axis=1)
        with np.errstate(invalid="ignore"):
            out = self._sign * total / counts
        return np.where(counts > 0, out, np.inf)


class HarmonyCostModel(TableCostModel):
    """Negated mean z-scored harmonicity (higher harmonicity, lower cost)."""

    def __init__(self, model: HarmonicityModel):
        super().__init__(f"harmony-{model.name}", normalize_scores(model), sign=-1.0)
        self.model = model


class InterferenceCostModel(TableCostModel):
    """Mean z-scored dissonance (rougher scales cost more)."""

    def __init__(self, model: InterferenceModel, timbre: Timbre | None = None,
                 root_hz: float = DEFAULT_ROOT_HZ):
        timbre = timbre or Timbre.harmonic()
        table = interference_table(model, timbre, root_hz)
        super().__init__(f"interference-{table.name}", table, sign=+1.0)
        self.model = model
        self.timbre = timbre


class ComplexityCostModel:
    """Number of interval categories at clustering tolerance w."""

    def __init__(self, w: float = ANNOTATION_VALIDATED_W):
        self.name = f"complexity(w={w:g})"
        self.w = float(w)

    def __call__(self, scale: Scale) -> float:
        vals = scale_intervals_for_cost(scale)
        return float(ward_categories(vals, self.w).k)

    def cost_of_steps(self, steps: np.ndarray, octave: bool) -> float:
        return float(ward_categories(_interval_values(steps, octave), self.w).k)

    def costs_for_steps(self, steps: np.ndarray, octave: bool) -> np.ndarray:
        ivs, valid = _batch_intervals(steps, octave)
        out = np.empty(ivs.shape[0])
        for i in range(ivs.shape[0]):
            row = ivs[i, valid[i]]
            out[i] = ward_categories(row, self.w).k if row.size else np.inf
        return out


def evaluate_costs(model, steps: np.ndarray, octave: bool) -> np.ndarray:
    """Vectorized cost evaluation with a per-scale fallback loop.

    Models without ``costs_for_steps`` are called one scale at a time; an
    empty filtered interval set maps to +inf.
    """
    batch = getattr(model, "costs_for_steps", None)
    if batch is not None:
        return np.asarray(batch(steps, octave))
    steps = np.asarray(steps, dtype=float)
    out = np.empty(steps.shape[0])
    stype = "Theory" if octave else "Vocal"
    for i in range(steps.shape[0]):
        try:
            out[i] = model(Scale(tuple(steps[i]), scale_type=stype, octave=octave))
        except EmptyIntervalSetError:
            out[i] = np.inf
    return out


def make_cost_model(name: str, *, w: float = 20.0, n_partials: int = 10,
                    rho: float = 1.0, hk_exponent: float = 1.359,
                    canonical_g: bool = False, timbre_partials: int = 10,
                    timbre_rolloff: float = 1.0, root_hz: float = DEFAULT_ROOT_HZ,
                    complexity_w: float = ANNOTATION_VALIDATED_W,
                    gp_max_denominator: int = 24):
    """Build a cost model by name (see MODEL_NAMES)."""
    key = name.lower()
    if key == "of":
        return HarmonyCostModel(HarmonicityModel("OF", w=w))
    if key == "gp":
        return HarmonyCostModel(HarmonicityModel("GP", w=w, max_denominator=gp_max_denominator))
    if key == "hp":
        return HarmonyCostModel(HarmonicityModel("HP", n=n_partials, rho=rho))
    if key in ("hk", "sethares", "berezovsky"):
        kind = {"hk": "HK", "sethares": "S", "berezovsky": "B"}[key]
        model = InterferenceModel(kind, r=hk_exponent, canonical_g=canonical_g)
        return InterferenceCostModel(model, Timbre.harmonic(timbre_partials, timbre_rolloff),
                                     root_hz)
    if key == "complexity":
        return ComplexityCostModel(complexity_w)
    raise ValueError(f"unknown cost model {name!r}; expected one of {MODEL_NAMES}")
