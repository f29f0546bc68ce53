"""Small shared numerics: normal CDF, Jensen-Shannon divergence, log-mean-exp."""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr


def normal_cdf(x, sigma: float = 1.0):
    """Standard normal CDF of x / sigma (vectorized, exact)."""
    return ndtr(np.asarray(x, dtype=float) / sigma)


def jensen_shannon(p, q) -> float:
    """Jensen-Shannon divergence between two distributions, in nats.

    Symmetric, bounded in [0, ln 2], and 0 iff the distributions are equal.
    Inputs are normalized to sum to 1; zero bins contribute nothing.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions must share a binning")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("probabilities must be non-negative")
    ps, qs = p.sum(), q.sum()
    if ps <= 0 or qs <= 0:
        raise ValueError("distributions must have positive total mass")
    p = p / ps
    q = q / qs
    m = 0.5 * (p + q)
    with np.errstate(divide="ignore", invalid="ignore"):
        kl_pm = np.where(p > 0, p * (np.log(p) - np.log(m)), 0.0)
        kl_qm = np.where(q > 0, q * (np.log(q) - np.log(m)), 0.0)
    return float(0.5 * kl_pm.sum() + 0.5 * kl_qm.sum())


def log_mean_exp(values) -> float:
    """log(mean(exp(values))) computed with max-subtraction for stability."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("need at least one value")
    vmax = v.max()
    if not np.isfinite(vmax):
        if vmax == -np.inf:
            return float("-inf")
        raise ValueError("non-finite values in log_mean_exp")
    return float(vmax + np.log(np.mean(np.exp(v - vmax))))


def log_mean_exp_with_stderr(values) -> tuple[float, float]:
    """As `log_mean_exp`, plus a delta-method standard error of the log-mean.

    stderr(log m) ~= std(w) / (m * sqrt(n)) for sample weights w = exp(values).
    """
    v = np.asarray(values, dtype=float)
    lme = log_mean_exp(v)
    vmax = v.max()
    if not np.isfinite(vmax):
        return lme, float("nan")
    w = np.exp(v - vmax)
    m = w.mean()
    se = float(w.std(ddof=1) / (m * np.sqrt(w.size))) if w.size > 1 else float("nan")
    return lme, se
