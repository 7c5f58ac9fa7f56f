"""End-to-end acceptance checks for the detector.

One test per acceptance criterion; each prints a single PASS/FAIL line with
the measured numbers.  Monte-Carlo criteria use 200 replicates with fixed
seeds, so the whole module is deterministic.  The expensive replication runs
are shared across criteria through module-scoped fixtures.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from specseg.core import DetectorConfig, Infeasible, center_series, make_grid
from specseg.divergence import kl_divergence
from specseg.evaluate import run_replications, scaled_case1, sweep_mean_k_hat
from specseg.simulate import simulate_piecewise
from specseg.solvers import (
    PenaltySchedule,
    detect,
    dp_solve,
    grid_candidates,
    pelt_solve,
)
from specseg.spectral import build_dft_table, segment_spectrum
from conftest import StubOracle, brute_force_best, brute_force_penalized

REPS = 200


def report(name: str, ok: bool, detail: str) -> None:
    print(f"{name}: {'PASS' if ok else 'FAIL'} - {detail}", flush=True)
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------------
# shared replication runs
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def case1_known_pooled():
    summary, _ = run_replications(
        1, DetectorConfig(), REPS, seed0=1000, known_k=2, label="case1-known"
    )
    return summary


@pytest.fixture(scope="module")
def case1_bic():
    # profiles kept so the penalty-sweep criterion reuses these runs
    return run_replications(
        1,
        DetectorConfig(k_max=6),
        REPS,
        seed0=2000,
        collect_profiles=True,
        label="case1-bic",
    )


@pytest.fixture(scope="module")
def case2_bic():
    summary, _ = run_replications(
        2, DetectorConfig(k_max=6), REPS, seed0=3000, label="case2-bic"
    )
    return summary


@pytest.fixture(scope="module")
def case3_bic():
    summary, _ = run_replications(
        3, DetectorConfig(k_max=6), REPS, seed0=3500, label="case3-bic"
    )
    return summary


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------


def test_01_case1_known_k_localization(case1_known_pooled):
    s = case1_known_pooled
    ok = s.mean_rho_est_to_true_norm <= 0.03 and s.mean_rho_true_to_est_norm <= 0.03
    report(
        "criterion 01 (known-K localization)",
        ok,
        f"mean rho(est||true)/N = {s.mean_rho_est_to_true_norm:.4f}, "
        f"mean rho(true||est)/N = {s.mean_rho_true_to_est_norm:.4f} (need both <= 0.03)",
    )


def test_02_case1_model_selection(case1_bic):
    s = case1_bic[0]
    report(
        "criterion 02 (case-1 K-hat accuracy)",
        s.k_accuracy >= 0.90,
        f"accuracy = {s.k_accuracy:.3f} (need >= 0.90)",
    )


def test_03_case2_case3_model_selection(case2_bic, case3_bic):
    ok = case2_bic.k_accuracy >= 0.90 and case3_bic.k_accuracy >= 0.90
    report(
        "criterion 03 (case-2/case-3 K-hat accuracy)",
        ok,
        f"case 2 = {case2_bic.k_accuracy:.3f}, case 3 = {case3_bic.k_accuracy:.3f} "
        f"(need both >= 0.90)",
    )


def test_04_case4_model_selection():
    summary, _ = run_replications(
        4, DetectorConfig(k_max=6), REPS, seed0=4000, label="case4-bic"
    )
    report(
        "criterion 04 (case-4 K-hat accuracy)",
        summary.k_accuracy >= 0.90,
        f"accuracy = {summary.k_accuracy:.3f} (need >= 0.90)",
    )


def test_05_heavy_tail_localization():
    summary, _ = run_replications(
        1,
        DetectorConfig(),
        REPS,
        seed0=5000,
        known_k=2,
        noise="t4",
        label="case1-t4",
    )
    ok = (
        summary.mean_rho_est_to_true_norm <= 0.03
        and summary.mean_rho_true_to_est_norm <= 0.03
    )
    report(
        "criterion 05 (t(4) innovations, known K)",
        ok,
        f"mean rho(est||true)/N = {summary.mean_rho_est_to_true_norm:.4f}, "
        f"mean rho(true||est)/N = {summary.mean_rho_true_to_est_norm:.4f} (need both <= 0.03)",
    )


def test_06_coarse_search_unit():
    summary, records = run_replications(
        1,
        DetectorConfig(n_su=10),
        REPS,
        seed0=6000,
        known_k=2,
        label="case1-nsu10",
    )
    on_grid = all(
        cp % 10 == 0 for rec in records for cp in rec["boundaries"][1:-1]
    )
    ok = (
        summary.mean_rho_est_to_true_norm <= 0.03
        and summary.mean_rho_true_to_est_norm <= 0.03
        and on_grid
    )
    report(
        "criterion 06 (search unit 10)",
        ok,
        f"mean rho(est||true)/N = {summary.mean_rho_est_to_true_norm:.4f}, "
        f"mean rho(true||est)/N = {summary.mean_rho_true_to_est_norm:.4f}, "
        f"all change points on the grid = {on_grid}",
    )


def test_07_white_baseline_stability(case1_known_pooled):
    summary, _ = run_replications(
        1,
        DetectorConfig(baseline="white"),
        REPS,
        seed0=1000,
        known_k=2,
        label="case1-white",
    )
    delta = abs(
        summary.mean_rho_est_to_true_norm
        - case1_known_pooled.mean_rho_est_to_true_norm
    )
    report(
        "criterion 07 (white-baseline stability)",
        delta <= 0.01,
        f"pooled = {case1_known_pooled.mean_rho_est_to_true_norm:.4f}, "
        f"white = {summary.mean_rho_est_to_true_norm:.4f}, |delta| = {delta:.4f} "
        f"(need <= 0.01)",
    )


def test_08_penalty_sweep(case1_bic):
    summary, records = case1_bic
    cs = np.linspace(0.1, 0.9, 17)
    means = sweep_mean_k_hat(records, summary.n, cs)
    monotone = bool(np.all(np.diff(means) <= 1e-9))
    centred = abs(summary.mean_k_hat - 2.0) <= 0.2
    report(
        "criterion 08 (penalty sweep)",
        centred and monotone,
        f"mean K-hat at c=0.73 = {summary.mean_k_hat:.3f} (need within 0.2 of 2), "
        f"mean K-hat non-increasing over c in [0.1, 0.9] = {monotone}",
    )


def _random_instance(rng):
    n = int(rng.integers(20, 101))
    ml = int(rng.integers(max(3, n // 8), max(4, n // 5) + 1))
    n_su = int(rng.integers(1, 4))
    table = {}

    def fn(a, b):
        key = (a, b)
        if key not in table:
            table[key] = float(rng.normal())
        return table[key]

    return n, ml, n_su, fn


def _check_dp_exhaustive(failures):
    rng = np.random.default_rng(901)
    for i in range(1000):
        n, ml, n_su, fn = _random_instance(rng)
        k = int(rng.integers(0, 4))
        cands = grid_candidates(n, ml, n_su)
        brute = brute_force_best(fn, cands.indices, n, ml, k)
        oracle = StubOracle(fn, n, ml)
        try:
            seg = dp_solve(oracle, k, cands, n, ml)
        except Infeasible:
            if brute is not None:
                failures.append(f"dp instance {i}: solver infeasible, brute found {brute}")
            continue
        if brute is None:
            failures.append(f"dp instance {i}: solver returned {seg}, brute infeasible")
            continue
        val, bounds = brute
        if abs(seg.objective - val) > 1e-9 * max(1.0, abs(val)) or not np.array_equal(
            seg.boundaries, bounds
        ):
            failures.append(
                f"dp instance {i}: solver {seg.objective} {seg.boundaries.tolist()} "
                f"vs brute {val} {bounds.tolist()}"
            )


def _check_pelt_exhaustive(failures):
    rng = np.random.default_rng(902)
    for i in range(500):
        n = int(rng.integers(20, 81))
        ml = int(rng.integers(max(3, n // 5), max(4, n // 3) + 1))
        table = {}

        def fn(a, b):
            key = (a, b)
            if key not in table:
                table[key] = float(rng.normal())
            return table[key]

        c_n = float(rng.uniform(0.05, 1.5))
        cands = grid_candidates(n, ml, 2)
        oracle = StubOracle(fn, n, ml)
        pen = PenaltySchedule(me_bic=c_n, c=1.0, c_n=c_n)
        res = pelt_solve(oracle, cands, pen, n, ml, prune=False)
        best_total, best_bounds = brute_force_penalized(fn, cands.indices, n, ml, c_n)
        got_total = -res.segmentation.objective + (res.k_hat + 1) * c_n
        if abs(got_total - best_total) > 1e-9 * max(1.0, abs(best_total)):
            failures.append(
                f"pelt instance {i}: total {got_total} vs brute {best_total} "
                f"({res.segmentation.boundaries.tolist()} vs {best_bounds.tolist()})"
            )


def _check_divergence_properties(failures, grid):
    rng = np.random.default_rng(903)
    from specseg.spectral import SpectralEstimate

    def est(values):
        values = np.asarray(values, dtype=np.float64)
        return SpectralEstimate(
            grid=grid,
            values=values,
            mass=float(grid.weight * values.sum()),
            seg_len=0,
            bandwidth_m=1,
        )

    worst_self = 0.0
    worst_scale = 0.0
    worst_neg = 0.0
    for _ in range(10_000):
        f = est(rng.uniform(0.05, 5.0, grid.size))
        g = est(rng.uniform(0.05, 5.0, grid.size))
        worst_self = max(worst_self, abs(kl_divergence(f, f)))
        scaled = est(float(rng.uniform(0.1, 10.0)) * f.values)
        worst_scale = max(worst_scale, abs(kl_divergence(scaled, f)) / scaled.mass)
        worst_neg = max(worst_neg, -kl_divergence(f, g) / f.mass)
    if worst_self > 1e-8:
        failures.append(f"kl self-divergence up to {worst_self}")
    if worst_scale > 1e-8:
        failures.append(f"kl scale-divergence up to {worst_scale} of mass")
    if worst_neg > 1e-8:
        failures.append(f"kl negative by up to {worst_neg} of mass")


def _check_spectra_nonnegative(failures, grid):
    rng = np.random.default_rng(904)
    x = rng.standard_normal(4096)
    for lag in range(1, 4096):
        x[lag] += 0.6 * x[lag - 1]
    table = build_dft_table(center_series(x), grid)
    worst = 0.0
    for _ in range(1000):
        a = int(rng.integers(0, 4096 - 8))
        b = int(rng.integers(a + 8, 4097))
        estim = segment_spectrum(table, a, b, 1.0 / 3.0)
        worst = min(worst, float(estim.values.min()))
    if worst < 0.0:
        failures.append(f"smoothed spectrum dipped to {worst}")


def _check_scale_invariance(failures):
    spec = scaled_case1(1024)
    config = DetectorConfig(ml=175, k_max=6)
    for seed in range(100):
        x, _ = simulate_piecewise(spec, 9000 + seed)
        a = detect(x, config)
        b = detect(10.0 * x, config)
        if not np.array_equal(a.segmentation.boundaries, b.segmentation.boundaries):
            failures.append(
                f"scale sensitivity at seed {9000 + seed}: "
                f"{a.segmentation.boundaries.tolist()} vs {b.segmentation.boundaries.tolist()}"
            )
            break


def _check_pooled_decomposition(failures, grid):
    # the pooled estimate should match the segment-length-weighted mixture of
    # segment estimates; the cross terms average out, so compare on mean
    # normalized spectra over 20 replicates with a common bandwidth
    n = 8192
    m = 8
    spec = scaled_case1(n)
    dlam = 2.0 * np.pi / grid.size
    acc_pooled = np.zeros(grid.size)
    acc_mix = np.zeros(grid.size)
    for seed in range(20):
        x, truth = simulate_piecewise(spec, seed)
        table = build_dft_table(center_series(x), grid)
        bounds = [0] + [int(t) for t in truth] + [n]

        def est(a, b):
            alpha = math.log(m) / math.log(b - a)
            e = segment_spectrum(table, a, b, alpha)
            assert e.bandwidth_m == m
            return e

        pooled = est(0, n)
        acc_pooled += pooled.values / (dlam * pooled.values.sum())
        mix = np.zeros_like(pooled.values)
        for a, b in zip(bounds[:-1], bounds[1:]):
            mix += (b - a) / n * est(a, b).values
        acc_mix += mix / (dlam * mix.sum())
    rel = float((np.abs(acc_pooled - acc_mix) / acc_mix).max())
    if rel > 0.10:
        failures.append(f"pooled-vs-mixture max pointwise deviation {rel:.4f} > 0.10")


def test_09_property_suites():
    grid = make_grid(512)
    failures: list[str] = []
    _check_dp_exhaustive(failures)
    _check_pelt_exhaustive(failures)
    _check_divergence_properties(failures, grid)
    _check_spectra_nonnegative(failures, grid)
    _check_scale_invariance(failures)
    _check_pooled_decomposition(failures, grid)
    report(
        "criterion 09 (property suites)",
        not failures,
        "all property suites clean" if not failures else "; ".join(failures),
    )


def test_10_consistency_in_series_length():
    sizes = (1024, 2048, 4096)
    rho_norms = []
    accs = []
    details = []
    for i, n in enumerate(sizes):
        ml = n * 350 // 2048
        summary, _ = run_replications(
            scaled_case1(n),
            DetectorConfig(ml=ml, k_max=6),
            100,
            seed0=7000 + i,
            label=f"scaled-{n}",
        )
        rho_norms.append(summary.mean_rho_est_to_true_norm)
        accs.append(summary.k_accuracy)
        details.append(
            f"n={n}: rho/N={summary.mean_rho_est_to_true_norm:.4f}, acc={summary.k_accuracy:.3f}"
        )
    ok = all(b <= a for a, b in zip(rho_norms, rho_norms[1:])) and all(
        b >= a for a, b in zip(accs, accs[1:])
    )
    report(
        "criterion 10 (consistency in N)",
        ok,
        "; ".join(details) + " (need rho/N non-increasing, accuracy non-decreasing)",
    )
