"""Canonical scale representation, interval-set derivation, and dataset I/O.

A scale is an ordered list of step sizes in cents. Scale degrees are the
prefix sums of the steps, anchored at 0. All downstream scoring operates on
interval multisets derived from the degrees, under either non-octave rules
(all pairwise differences) or octave rules (circular pitch-class intervals).
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass

import numpy as np

CENTS_PER_OCTAVE = 1200.0
OCTAVE_SUM_TOL = 1e-6

SCALE_TYPES = ("Vocal", "Instrumental", "Theory")

# Default geographic region labels. The label set is configurable through
# `register_region`; "synthetic" is always allowed for generated data.
DEFAULT_REGIONS = (
    "Africa",
    "Central Asia",
    "Circumpolar",
    "East Asia",
    "Europe",
    "Middle East",
    "North America",
    "Oceania",
    "South America",
    "South Asia",
    "Southeast Asia",
)

_allowed_regions = set(DEFAULT_REGIONS) | {"synthetic"}


def allowed_regions() -> frozenset[str]:
    """Return the currently accepted region labels."""
    return frozenset(_allowed_regions)


def register_region(*names: str) -> None:
    """Add extra region labels to the accepted set (for custom datasets)."""
    _allowed_regions.update(names)


class ScaleValidationError(ValueError):
    """Raised when a scale violates its structural invariants."""


@dataclass(frozen=True)
class Scale:
    """An ordered list of step intervals in cents plus dataset metadata.

    Parameters
    ----------
    steps : tuple of float
        Step sizes in cents, low to high; every step must be > 0.
    scale_type : str
        One of "Vocal", "Instrumental", "Theory".
    region : str
        Geographic region label, validated against `allowed_regions()`.
    octave : bool, optional
        Whether pitch relations are cyclic with a 1200-cent period. Defaults
        to True for Theory scales and False otherwise. Octave scales must
        have steps summing to 1200 cents.
    id : str
        Opaque identifier carried through reports.
    """

    steps: tuple[float, ...]
    scale_type: str = "Vocal"
    region: str = "synthetic"
    octave: bool | None = None
    id: str = ""

    def __post_init__(self):
        steps = tuple(float(s) for s in self.steps)
        object.__setattr__(self, "steps", steps)
        if not steps:
            raise ScaleValidationError("scale must have at least one step")
        if any(not np.isfinite(s) or s <= 0 for s in steps):
            raise ScaleValidationError(f"all steps must be finite and > 0 cents, got {steps}")
        if self.scale_type not in SCALE_TYPES:
            raise ScaleValidationError(f"unknown scale_type {self.scale_type!r}")
        if self.region not in _allowed_regions:
            raise ScaleValidationError(
                f"unknown region {self.region!r}; register it with register_region()"
            )
        octave = self.octave
        if octave is None:
            octave = self.scale_type == "Theory"
        if self.scale_type == "Theory" and not octave:
            raise ScaleValidationError("Theory scales are octave scales")
        object.__setattr__(self, "octave", bool(octave))
        if octave and abs(sum(steps) - CENTS_PER_OCTAVE) > OCTAVE_SUM_TOL:
            raise ScaleValidationError(
                f"octave scale steps must sum to 1200 cents, got {sum(steps)}"
            )

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    @property
    def range_cents(self) -> float:
        return float(sum(self.steps))

    @property
    def degrees(self) -> tuple[float, ...]:
        return degrees_from_steps(self.steps)


def degrees_from_steps(steps) -> tuple[float, ...]:
    """Prefix sums of the steps with a leading 0 (the scale degrees).

    >>> degrees_from_steps([200, 200, 100])
    (0.0, 200.0, 400.0, 500.0)
    """
    arr = np.asarray(steps, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ScaleValidationError("steps must be a non-empty 1-D sequence")
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise ScaleValidationError("all steps must be finite and > 0 cents")
    out = np.concatenate([[0.0], np.cumsum(arr)])
    return tuple(float(x) for x in out)


@dataclass(frozen=True, eq=False)
class IntervalSet:
    """A multiset of intervals (cents) derived from a scale.

    In octave mode the intervals are circular pitch-class intervals, each in
    (0, 1200); in non-octave mode they are plain pairwise degree differences.
    """

    intervals: tuple[float, ...]
    mode: str  # "non_octave" | "octave"

    def __post_init__(self):
        if self.mode not in ("non_octave", "octave"):
            raise ValueError(f"unknown interval-set mode {self.mode!r}")
        vals = tuple(float(v) for v in self.intervals)
        object.__setattr__(self, "intervals", vals)
        if any(v <= 0 for v in vals):
            raise ValueError("intervals must be > 0 cents")
        if self.mode == "octave" and any(v >= CENTS_PER_OCTAVE for v in vals):
            raise ValueError("octave-mode intervals must be < 1200 cents")

    def __len__(self) -> int:
        return len(self.intervals)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.intervals, dtype=float)


def interval_set(scale: Scale) -> IntervalSet:
    """All scale intervals of ``scale``, with multiplicity.

    Non-octave scales yield every ascending difference between two degrees
    (N*(N+1)/2 intervals for N steps). Octave scales yield, for every ordered
    pair of distinct pitch classes, the ascending circular interval
    (d_j - d_i) mod 1200, excluding exact octave multiples.
    """
    degrees = np.asarray(scale.degrees)
    if scale.octave:
        pcs = degrees[:-1]  # drop the terminal 1200
        out = []
        for i, j in itertools.permutations(range(len(pcs)), 2):
            iv = (pcs[j] - pcs[i]) % CENTS_PER_OCTAVE
            if iv % CENTS_PER_OCTAVE != 0.0:
                out.append(float(iv))
        return IntervalSet(tuple(out), "octave")
    out = [
        float(degrees[j] - degrees[i])
        for i, j in itertools.combinations(range(len(degrees)), 2)
    ]
    return IntervalSet(tuple(out), "non_octave")


def filter_intervals(iset: IntervalSet, max_cents: float = 1250.0) -> IntervalSet:
    """Subset of ``iset`` with every interval <= ``max_cents``."""
    if max_cents <= 0:
        raise ValueError("max_cents must be > 0")
    kept = tuple(v for v in iset.intervals if v <= max_cents)
    return IntervalSet(kept, iset.mode)


def degree_intervals(scale: Scale) -> IntervalSet:
    """Intervals from the root only (the non-zero scale degrees).

    Octave scales exclude the terminal 1200. Used by the degrees-only cost
    variants.
    """
    degrees = scale.degrees
    vals = degrees[1:-1] if scale.octave else degrees[1:]
    mode = "octave" if scale.octave else "non_octave"
    return IntervalSet(tuple(vals), mode)


# ---------------------------------------------------------------------------
# Dataset CSV format: one row per scale,
#   id,scale_type,region,octave,steps_cents
# where steps_cents is a ';'-separated list of decimal cents.
# ---------------------------------------------------------------------------

SCALE_CSV_HEADER = ["id", "scale_type", "region", "octave", "steps_cents"]


class DataFormatError(ValueError):
    """Raised when an input file does not match its documented format."""


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "1", "yes"):
        return True
    if t in ("false", "0", "no"):
        return False
    raise DataFormatError(f"cannot parse boolean {text!r}")


def read_scales(path) -> list[Scale]:
    """Read a scale dataset CSV. Raises DataFormatError naming the bad row."""
    scales = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != SCALE_CSV_HEADER:
            raise DataFormatError(f"{path}: expected header {','.join(SCALE_CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 5:
                raise DataFormatError(f"{path}:{lineno}: expected 5 columns, got {len(row)}")
            sid, stype, region, octave, steps_txt = (c.strip() for c in row)
            try:
                steps = tuple(float(tok) for tok in steps_txt.split(";") if tok.strip())
                scales.append(
                    Scale(steps, scale_type=stype, region=region,
                          octave=_parse_bool(octave), id=sid)
                )
            except (ValueError, ScaleValidationError) as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
    return scales


def write_scales(path, scales, costs=None) -> None:
    """Write scales in the dataset CSV format, optionally with a cost column."""
    header = list(SCALE_CSV_HEADER) + (["cost"] if costs is not None else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, s in enumerate(scales):
            row = [
                s.id,
                s.scale_type,
                s.region,
                "true" if s.octave else "false",
                ";".join(repr(float(x)) for x in s.steps),
            ]
            if costs is not None:
                row.append(repr(float(costs[i])))
            writer.writerow(row)
