"""Shared test fixtures: a fully enumerable discretized two-step scale space.

The toy space has 12 step bins of 50 cents on [50, 650] and a cost that
depends only on the bin pair, so the stationary distribution of the biased
sampler and all normalization constants have exact closed forms.
"""

import numpy as np
import pytest

from scalevo.melody import StepDistribution

TOY_N_BINS = 12
TOY_BIN_CENTS = 50.0
TOY_LOW = 50.0


class BinnedStepCost:
    """Cost constant within each (bin, bin) cell: minus the mean bin score."""

    def __init__(self, dist: StepDistribution, bin_scores: np.ndarray):
        self.name = "toy-binned"
        self.dist = dist
        self.bin_scores = np.asarray(bin_scores, dtype=float)
        self._scores_list = self.bin_scores.tolist()
        self._low = float(dist.bin_edges[0])
        self._width = float(dist.bin_edges[1] - dist.bin_edges[0])

    def bins_of(self, steps: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.dist.bin_edges, steps, side="right") - 1
        return np.clip(idx, 0, self.bin_scores.size - 1)

    def __call__(self, scale) -> float:
        b = self.bins_of(np.asarray(scale.steps))
        return float(-self.bin_scores[b].mean())

    def cost_of_steps(self, steps: np.ndarray, octave: bool) -> float:
        n = len(self._scores_list)
        total = 0.0
        for x in steps:
            i = int((x - self._low) // self._width)
            i = 0 if i < 0 else (n - 1 if i >= n else i)
            total += self._scores_list[i]
        return -total / len(steps)

    def costs_for_steps(self, steps: np.ndarray, octave: bool) -> np.ndarray:
        b = self.bins_of(np.asarray(steps, dtype=float))
        return -self.bin_scores[b].mean(axis=1)


class ToySpace:
    def __init__(self, seed: int = 12):
        rng = np.random.default_rng(seed)
        edges = TOY_LOW + TOY_BIN_CENTS * np.arange(TOY_N_BINS + 1)
        probs = rng.dirichlet(2.0 * np.ones(TOY_N_BINS))
        self.dist = StepDistribution(edges, probs)
        self.bin_scores = rng.normal(0.0, 1.0, size=TOY_N_BINS)
        self.cost_model = BinnedStepCost(self.dist, self.bin_scores)

    def cell_costs(self) -> np.ndarray:
        """Cost of every ordered (bin, bin) cell."""
        g = self.bin_scores
        return -(g[:, None] + g[None, :]) / 2.0

    def exact_cell_target(self, beta: float) -> np.ndarray:
        """Exact stationary distribution over ordered cells, shape (12, 12)."""
        p = self.dist.probabilities
        weights = np.outer(p, p) * np.exp(-beta * self.cell_costs())
        return weights / weights.sum()

    def exact_log_z(self, beta: float) -> float:
        p = self.dist.probabilities
        return float(np.log((np.outer(p, p) * np.exp(-beta * self.cell_costs())).sum()))

    def cell_histogram(self, steps: np.ndarray) -> np.ndarray:
        """Empirical ordered-cell distribution of a (n, 2) step matrix."""
        b = self.cost_model.bins_of(steps)
        counts = np.zeros((TOY_N_BINS, TOY_N_BINS))
        np.add.at(counts, (b[:, 0], b[:, 1]), 1.0)
        return counts / counts.sum()


@pytest.fixture(scope="session")
def toy_space() -> ToySpace:
    return ToySpace()
