"""Matplotlib figure rendering for the CLI report paths.

Every function takes plain data plus an output path and writes a PNG next to
the delimited output it illustrates. The Agg backend keeps rendering
headless; figures are presentation aids, the CSVs remain the primary
outputs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_step_distribution(bin_edges, probabilities, path, overlays=None,
                           xlabel="step size (cents)", title="Step-size distribution"):
    """Bar histogram of step probabilities with optional model curves."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    widths = np.diff(bin_edges)
    ax.bar(bin_edges[:-1], probabilities, width=widths, align="edge",
           color="0.75", edgecolor="0.4", label="empirical")
    for label, (x, y) in (overlays or {}).items():
        ax.plot(x, y, lw=1.8, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("probability")
    ax.set_title(title)
    ax.legend(frameon=False)
    _finish(fig, path)


def plot_score_table(grid, raw, z, name, path):
    """Raw and z-normalized interval scores over the cents grid."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 4.5), sharex=True)
    ax1.plot(grid, raw, lw=1.0)
    ax1.set_ylabel("raw score")
    ax1.set_title(name)
    ax2.plot(grid, z, lw=1.0, color="C1")
    ax2.set_ylabel("z score")
    ax2.set_xlabel("interval (cents)")
    for ax in (ax1, ax2):
        for mark in (702, 1200):
            ax.axvline(mark, color="0.8", lw=0.7, zorder=0)
    _finish(fig, path)


def plot_degree_distribution(bin_edges, probabilities, path, reference=None,
                             title="Scale-degree distribution"):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    widths = np.diff(bin_edges)
    ax.bar(bin_edges[:-1], probabilities, width=widths, align="edge",
           color="C0", alpha=0.6, label="generated")
    if reference is not None:
        ax.step(bin_edges, np.append(reference, reference[-1]), where="post",
                color="k", lw=1.2, label="reference")
    ax.set_xlabel("degree (cents above lowest)")
    ax.set_ylabel("probability")
    ax.set_title(title)
    ax.legend(frameon=False)
    _finish(fig, path)


def plot_beta_scan(betas, mean_llrs, beta_star, path):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(betas, mean_llrs, marker="o", ms=3.5)
    ax.axvline(beta_star, color="C3", lw=1.0, label=f"best = {beta_star:g}")
    ax.set_xscale("log")
    ax.set_xlabel("bias strength")
    ax.set_ylabel("weighted mean log-likelihood ratio")
    ax.legend(frameon=False)
    _finish(fig, path)


def plot_significance(rows, path):
    """Empirical vs null interval frequencies with significant bins starred."""
    fig, ax = plt.subplots(figsize=(7, 3.5))
    centers = np.array([(r.bin_low + r.bin_high) / 2 for r in rows])
    emp = np.array([r.empirical_freq for r in rows])
    null = np.array([r.null_freq for r in rows])
    ax.plot(centers, null, color="0.5", lw=1.2, label="null")
    ax.plot(centers, emp, color="C0", lw=1.2, label="empirical")
    for r in rows:
        if r.significant_after_bh:
            marker = "*" if r.direction == "frequent" else "v"
            ax.plot((r.bin_low + r.bin_high) / 2, r.empirical_freq, marker,
                    color="C3", ms=8)
    ax.set_xlabel("interval (cents)")
    ax.set_ylabel("frequency")
    ax.legend(frameon=False)
    _finish(fig, path)


def plot_i0_distribution(i0_values, path):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.hist(i0_values, bins=15, color="0.7", edgecolor="0.3")
    ax.axvline(np.mean(i0_values), color="C3", lw=1.2,
               label=f"mean = {np.mean(i0_values):.2f} st")
    ax.set_xlabel("fitted decay constant (semitones)")
    ax.set_ylabel("corpora")
    ax.legend(frameon=False)
    _finish(fig, path)


def plot_gmm_fit(bin_edges, masses, means, stds, weights, path):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    widths = np.diff(bin_edges)
    density = masses / (masses.sum() * widths)
    ax.bar(bin_edges[:-1], density, width=widths, align="edge",
           color="0.8", edgecolor="0.5", label="pitch histogram")
    grid = np.linspace(bin_edges[0], bin_edges[-1], 800)
    total = np.zeros_like(grid)
    for m, s, w in zip(means, stds, weights):
        comp = w * np.exp(-((grid - m) ** 2) / (2 * s**2)) / (s * np.sqrt(2 * np.pi))
        ax.plot(grid, comp, lw=0.8, color="C0", alpha=0.7)
        total += comp
    ax.plot(grid, total, lw=1.5, color="C3", label="mixture")
    ax.set_xlabel("pitch (cents)")
    ax.set_ylabel("density")
    ax.legend(frameon=False)
    _finish(fig, path)


def plot_null_range_study(rows, path):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    n = [r.n_steps for r in rows]
    ax.errorbar(n, [r.mc_mean_min_step for r in rows],
                yerr=[2 * r.mc_stderr_min_step for r in rows],
                marker="o", ms=4, label="mean min step (MC)")
    ax.errorbar(n, [r.mc_mean_max_step for r in rows],
                yerr=[2 * r.mc_stderr_max_step for r in rows],
                marker="s", ms=4, label="mean max step (MC)")
    ax.plot(n, [r.formula_min_step for r in rows], "k--", lw=1.0,
            label="closed-form min")
    ax.set_xlabel("steps per scale")
    ax.set_ylabel("cents")
    ax.set_yscale("log")
    ax.legend(frameon=False)
    _finish(fig, path)


def plot_jsd_curve(betas, jsds, path):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(betas, jsds, marker="o", ms=4)
    ax.set_xscale("log")
    ax.set_xlabel("bias strength")
    ax.set_ylabel("divergence to reference")
    _finish(fig, path)
