"""Shared fixtures and small stand-in objects for the test suite."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from specseg.core import Segmentation, center_series, make_grid
from specseg.spectral import build_dft_table


@pytest.fixture(scope="session")
def grid():
    return make_grid(512)


@pytest.fixture(scope="session")
def ar_series():
    """A short AR(0.9) draw, centered, with its DFT table on the standard grid."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(42)))
    xi = rng.standard_normal(756)
    x = np.empty(756)
    x[0] = xi[0]
    for t in range(1, 756):
        x[t] = 0.9 * x[t - 1] + xi[t]
    series = center_series(x[500:])  # discard warm-up
    table = build_dft_table(series, make_grid(512))
    return series, table


class StubOracle:
    """Drop-in for ScoreOracle backed by an arbitrary score function.

    Lets the solver tests run against synthetic additive scores where the
    exhaustive optimum is computable by brute force.
    """

    def __init__(self, fn, n, ml):
        self.fn = fn
        self.n = n
        self.ml = ml
        self._memo = {}

    def score(self, a, b):
        return float(self.fn(int(a), int(b)))

    def score_pairs(self, a_arr, b_arr):
        return np.array([self.fn(int(a), int(b)) for a, b in zip(a_arr, b_arr)])

    def score_matrix(self, positions, ml):
        p = np.asarray(positions, dtype=np.int64)
        n_pos = len(p)
        mat = np.full((n_pos, n_pos), -np.inf)
        for i in range(n_pos):
            for j in range(i + 1, n_pos):
                if p[j] - p[i] >= ml:
                    mat[i, j] = self.fn(int(p[i]), int(p[j]))
        return mat


def brute_force_best(fn, candidates, n, ml, k):
    """Exhaustive max of sum-of-segment-scores over exactly k change points.

    Returns (objective, boundaries) with ties broken by the lexicographically
    smallest boundary vector, matching the DP contract.
    """
    best_val = -np.inf
    best_bounds = None
    cand = [c for c in candidates if ml <= c <= n - ml]
    for combo in itertools.combinations(cand, k):
        bounds = (0, *combo, n)
        if any(bounds[i + 1] - bounds[i] < ml for i in range(len(bounds) - 1)):
            continue
        val = sum(fn(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1))
        if val > best_val or (val == best_val and best_bounds is not None and list(bounds) < list(best_bounds)):
            best_val = val
            best_bounds = bounds
    if best_bounds is None:
        return None
    return best_val, np.asarray(best_bounds, dtype=np.int64)


def brute_force_penalized(fn, candidates, n, ml, c_n):
    """Exhaustive min of (-objective + (k+1) * c_n) over all k >= 0."""
    best = (np.inf, None)
    cand = [c for c in candidates if ml <= c <= n - ml]
    max_k = max(0, n // ml - 1)
    for k in range(0, min(max_k, len(cand)) + 1):
        res = brute_force_best(fn, cand, n, ml, k)
        if res is None:
            continue
        val, bounds = res
        total = -val + (k + 1) * c_n
        if total < best[0] - 1e-12:
            best = (total, bounds)
    return best


def make_segmentation(bounds):
    b = np.asarray(bounds, dtype=np.int64)
    return Segmentation(boundaries=b, k=len(b) - 2, objective=0.0)
