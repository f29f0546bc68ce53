"""Scale inference from pitch tracks: histogramming, weighted Gaussian
mixture fitting by EM, and the equidistance classifier.

Pitch tracks arrive as (time, cents, voiced) samples. Voiced samples are
histogrammed with duration weights, a Gaussian mixture is fitted to the
binned histogram, and the sorted component means become scale degrees.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .core import DataFormatError, Scale

EQUIDISTANT_STD_CENTS = 20.0
DEFAULT_PITCH_BIN_CENTS = 5.0
CLOSE_MEANS_WARN_CENTS = 10.0

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True, eq=False)
class PitchTrack:
    """Time-stamped pitch samples in cents relative to an arbitrary reference."""

    times: np.ndarray
    cents: np.ndarray
    voiced: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        c = np.asarray(self.cents, dtype=float)
        v = np.asarray(self.voiced, dtype=bool)
        if not (t.shape == c.shape == v.shape) or t.ndim != 1:
            raise ValueError("times, cents and voiced must be 1-D and equally long")
        if np.any(np.diff(t) < 0):
            raise ValueError("times must be non-decreasing")
        if np.any(~np.isfinite(c[v])):
            raise ValueError("voiced samples must have finite cents")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "cents", c)
        object.__setattr__(self, "voiced", v)

    def sample_durations(self) -> np.ndarray:
        """Per-sample durations: forward differences, last one the median step."""
        t = self.times
        if t.size == 1:
            return np.array([1.0])
        d = np.diff(t)
        return np.concatenate([d, [float(np.median(d))]])


def read_pitch_track(path) -> PitchTrack:
    """Read a pitch-track CSV with header time_s,cents,voiced."""
    times, cents, voiced = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["time_s", "cents", "voiced"]:
            raise DataFormatError(f"{path}: expected header time_s,cents,voiced")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                times.append(float(row[0]))
                v = row[2].strip()
                voiced.append(bool(int(v)))
                cents.append(float(row[1]) if voiced[-1] else 0.0)
            except (ValueError, IndexError) as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
    if not times:
        raise DataFormatError(f"{path}: empty pitch track")
    return PitchTrack(np.array(times), np.array(cents), np.array(voiced))


@dataclass(frozen=True, eq=False)
class PitchHistogram:
    bin_edges: np.ndarray
    masses: np.ndarray

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def occupied(self) -> np.ndarray:
        return np.nonzero(self.masses > 0)[0]


def pitch_histogram(track: PitchTrack, bin_cents: float = DEFAULT_PITCH_BIN_CENTS
                    ) -> PitchHistogram:
    """Duration-weighted histogram of voiced pitch.

    Each sample is weighted by its time delta, so the total mass equals the
    voiced duration of the track.
    """
    if bin_cents <= 0:
        raise ValueError("bin_cents must be > 0")
    if not np.any(track.voiced):
        raise ValueError("pitch track has no voiced samples")
    values = track.cents[track.voiced]
    weights = track.sample_durations()[track.voiced]
    lo = np.floor(values.min() / bin_cents) * bin_cents
    hi = np.ceil(values.max() / bin_cents) * bin_cents + bin_cents
    edges = np.arange(lo, hi + bin_cents, bin_cents)
    masses, _ = np.histogram(values, bins=edges, weights=weights)
    return PitchHistogram(edges, masses)


# ---------------------------------------------------------------------------
# Weighted EM over binned data
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GmmFit:
    """A fitted Gaussian mixture, components sorted by ascending mean."""

    means: np.ndarray
    stds: np.ndarray
    weights: np.ndarray
    log_likelihood: float
    log_likelihood_path: np.ndarray
    converged: bool
    n_iter: int

    def __post_init__(self):
        if not (self.means.shape == self.stds.shape == self.weights.shape):
            raise ValueError("component arrays must have matching shapes")
        if np.any(self.stds <= 0) or np.any(self.weights < 0):
            raise ValueError("stds must be > 0 and weights >= 0")
        if abs(self.weights.sum() - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")

    @property
    def n_components(self) -> int:
        return self.means.size


def _kmeanspp_init(mids, masses, k, rng) -> np.ndarray:
    """Weighted k-means++ seeding over occupied bin midpoints."""
    probs = masses / masses.sum()
    centers = [mids[rng.choice(mids.size, p=probs)]]
    for _ in range(1, k):
        d2 = np.min([(mids - c) ** 2 for c in centers], axis=0)
        score = probs * d2
        if score.sum() <= 0:  # all mass already covered; spread deterministically
            centers.append(mids[rng.choice(mids.size, p=probs)])
            continue
        centers.append(mids[rng.choice(mids.size, p=score / score.sum())])
    return np.sort(np.array(centers))


def _em_once(mids, masses, k, rng, max_iter, tol, sigma_floor):
    means = _kmeanspp_init(mids, masses, k, rng)
    total = masses.sum()
    global_mean = (masses * mids).sum() / total
    global_var = (masses * (mids - global_mean) ** 2).sum() / total
    stds = np.full(k, max(np.sqrt(global_var) / k, sigma_floor))
    weights = np.full(k, 1.0 / k)
    path = []
    prev_ll = -np.inf
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        # E step in log space
        log_pdf = (
            -0.5 * ((mids[None, :] - means[:, None]) / stds[:, None]) ** 2
            - np.log(stds[:, None]) - 0.5 * _LOG_2PI
        )
        log_joint = np.log(np.maximum(weights[:, None], 1e-300)) + log_pdf
        log_norm = np.logaddexp.reduce(log_joint, axis=0)
        ll = float((masses * log_norm).sum())
        path.append(ll)
        resp = np.exp(log_joint - log_norm[None, :])
        # M step with bin masses as weights
        comp_mass = (resp * masses[None, :]).sum(axis=1)
        comp_mass = np.maximum(comp_mass, 1e-300)
        means = (resp * masses[None, :] * mids[None, :]).sum(axis=1) / comp_mass
        var = (resp * masses[None, :] * (mids[None, :] - means[:, None]) ** 2
               ).sum(axis=1) / comp_mass
        stds = np.sqrt(np.maximum(var, sigma_floor**2))
        weights = comp_mass / comp_mass.sum()
        if ll - prev_ll < tol and n_iter > 1:
            converged = True
            break
        prev_ll = ll
    order = np.argsort(means)
    return GmmFit(means[order], stds[order], weights[order], path[-1],
                  np.asarray(path), converged, n_iter)


def fit_gmm(hist: PitchHistogram, k: int, seed: int = 0, n_restarts: int = 10,
            max_iter: int = 500, tol: float = 1e-6,
            sigma_floor: float | None = None) -> GmmFit:
    """Weighted EM over bin midpoints with bin masses as weights.

    Initialization is k-means++ over the occupied bins; the best of
    ``n_restarts`` runs by final log-likelihood wins (ties keep the earliest
    restart). A non-convergent best fit is returned with a warning. Component
    stds are floored at half the bin width: the midpoint likelihood cannot
    resolve anything narrower, and an unfloored component collapsing onto a
    single heavy bin would dominate model selection.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    occ = hist.occupied()
    if occ.size < k:
        raise ValueError(f"histogram has {occ.size} occupied bins, fewer than k={k}")
    mids = hist.midpoints[occ]
    masses = hist.masses[occ]
    bin_width = float(hist.bin_edges[1] - hist.bin_edges[0])
    if sigma_floor is None:
        sigma_floor = max(bin_width / 2.0, 1e-3)
    best = None
    for child in np.random.SeedSequence(seed).spawn(n_restarts):
        fit = _em_once(mids, masses, k, np.random.default_rng(child),
                       max_iter, tol, sigma_floor)
        if best is None or fit.log_likelihood > best.log_likelihood:
            best = fit
    if not best.converged:
        warnings.warn("EM did not converge within the iteration budget")
    return best


def select_k_bic(hist: PitchHistogram, k_range, seed: int = 0,
                 n_eff: float | None = None) -> tuple[int, dict[int, float]]:
    """Pick the component count minimizing BIC over ``k_range``.

    ``n_eff`` is the effective number of observations behind the histogram
    (defaults to the total mass); the histogram log-likelihood is rescaled to
    that count so duration weights do not distort the penalty.
    """
    n_eff = hist.total_mass if n_eff is None else float(n_eff)
    if n_eff <= 1:
        raise ValueError("n_eff must be > 1")
    bics: dict[int, float] = {}
    for k in k_range:
        if k > hist.occupied().size:
            continue
        fit = fit_gmm(hist, k, seed=seed)
        ll_per_mass = fit.log_likelihood / hist.total_mass
        bics[k] = -2.0 * ll_per_mass * n_eff + (3 * k - 1) * np.log(n_eff)
    if not bics:
        raise ValueError("no feasible component count in k_range")
    best_k = min(bics, key=lambda k: (bics[k], k))
    return best_k, bics


def scale_from_gmm(fit: GmmFit, scale_type: str = "Vocal", region: str = "synthetic",
                   scale_id: str = "", octave: bool = False) -> Scale:
    """Turn sorted component means into a scale via consecutive differences."""
    if fit.n_components < 2:
        raise ValueError("need at least two components to form a scale")
    means = np.sort(fit.means)
    gaps = np.diff(means)
    if np.any(gaps < CLOSE_MEANS_WARN_CENTS):
        warnings.warn("two component means are closer than 10 cents; probable overfit")
    return Scale(tuple(gaps), scale_type=scale_type, region=region,
                 octave=octave, id=scale_id)


def detect_equidistant(scale: Scale, threshold: float = EQUIDISTANT_STD_CENTS) -> bool:
    """True when the population std of the steps is below the threshold."""
    if scale.n_steps < 2:
        raise ValueError("equidistance needs at least two steps")
    return float(np.std(scale.steps)) < threshold


@dataclass(frozen=True)
class ExtractionResult:
    scale: Scale
    fit: GmmFit
    equidistant: bool | None
    k: int
    bics: dict[int, float] | None


def extract_scale(track: PitchTrack, k: int | None = None, k_range=None,
                  bin_cents: float = DEFAULT_PITCH_BIN_CENTS, seed: int = 0,
                  scale_type: str = "Vocal", scale_id: str = "") -> ExtractionResult:
    """Pipeline: histogram, mixture fit, degrees, equidistance flag."""
    if (k is None) == (k_range is None):
        raise ValueError("provide exactly one of k or k_range")
    hist = pitch_histogram(track, bin_cents)
    bics = None
    if k is None:
        n_eff = int(np.count_nonzero(track.voiced))
        k, bics = select_k_bic(hist, k_range, seed=seed, n_eff=n_eff)
    fit = fit_gmm(hist, k, seed=seed)
    scale = scale_from_gmm(fit, scale_type=scale_type, scale_id=scale_id)
    equi = detect_equidistant(scale) if scale.n_steps >= 2 else None
    return ExtractionResult(scale=scale, fit=fit, equidistant=equi, k=k, bics=bics)


def write_gmm_report(path, fit: GmmFit) -> None:
    """Export fitted components as CSV with columns mean,std,weight."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["mean_cents", "std_cents", "weight"])
        for m, s, w in zip(fit.means, fit.stds, fit.weights):
            writer.writerow([repr(float(m)), repr(float(s)), repr(float(w))])
