#!/usr/bin/env python3
"""Benchmark the compiled hot kernels against their pure-numpy fallbacks.

Times the two kernels behind every detection run:

* ``segment_scores_batch`` -- batch divergence scores on the wrapped-lag
  fast path (the screening/DP workhorse),
* ``dp_fill`` -- the exact dynamic-programming table fill.

Usage::

    python3 benchmarks/kernel_bench.py [--reps 5] [--pairs 20000] [--seed 0]

The same inputs are fed to both backends; the table reports the best wall
time per backend plus the speedup.  Set ``SPECSEG_DISABLE_NUMBA=1`` to check
what the package falls back to when the compiled path is unavailable.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from specseg import _kernels
from specseg.core import center_series, make_grid
from specseg.simulate import case_spec, simulate_piecewise
from specseg.solvers import ScoreOracle, grid_candidates
from specseg.spectral import build_dft_table, pooled_baseline

ML = 350
ALPHA = 1.0 / 3.0


def build_oracle(seed: int) -> ScoreOracle:
    values, _ = simulate_piecewise(case_spec(1), seed)
    table = build_dft_table(center_series(values), make_grid(512))
    return ScoreOracle(table, pooled_baseline(table, ALPHA), ALPHA, ML)


def batch_args(oracle: ScoreOracle, pairs: int, seed: int):
    rng = np.random.default_rng(seed)
    n = oracle.n
    a = rng.integers(0, n - ML, size=pairs)
    b = a + rng.integers(ML, n // 2, size=pairs)
    b = np.minimum(b, n)
    wrap_row, wrap_lag, wrap_coef = oracle._wrap
    return (
        oracle._q,
        wrap_row,
        wrap_lag,
        wrap_coef,
        a.astype(np.int64),
        b.astype(np.int64),
        oracle.alpha,
        oracle._beta,
        oracle._whw,
        oracle._cos,
        oracle._cos_t,
        oracle._dlam,
        oracle.table.grid.size,
    )


def time_call(fn, reps: int) -> float:
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=5, help="timing repetitions")
    parser.add_argument("--pairs", type=int, default=20000, help="batch size for scoring")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"active backend: {_kernels.active_backend()}")
    oracle = build_oracle(args.seed)
    score_args = batch_args(oracle, args.pairs, args.seed)

    cands = grid_candidates(oracle.n, ML, 1)
    positions = np.concatenate(([0], cands.indices, [oracle.n]))
    score_mat = oracle.score_matrix(positions, ML)

    rows = []
    for name, call in (
        (
            f"segment_scores_batch ({args.pairs} pairs)",
            lambda be: _kernels.segment_scores_batch(*score_args, backend=be),
        ),
        (
            f"dp_fill ({len(positions)} positions, k_max=6)",
            lambda be: _kernels.dp_fill(score_mat, 6, backend=be),
        ),
    ):
        ref = call("numpy")
        jit = call("numba")  # warm-up includes any JIT compilation
        if not np.allclose(
            np.asarray(ref), np.asarray(jit), rtol=1e-10, atol=1e-12, equal_nan=True
        ):
            raise SystemExit(f"{name}: backends disagree")
        t_np = time_call(lambda: call("numpy"), args.reps)
        t_nb = time_call(lambda: call("numba"), args.reps)
        rows.append((name, t_np, t_nb, t_np / t_nb))

    width = max(len(r[0]) for r in rows)
    header = f"{'kernel':<{width}}  {'numpy (s)':>10}  {'numba (s)':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, t_np, t_nb, speedup in rows:
        print(f"{name:<{width}}  {t_np:>10.4f}  {t_nb:>10.4f}  {speedup:>7.1f}x")


if __name__ == "__main__":
    main()
