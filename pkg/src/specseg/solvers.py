"""Change-point solvers: screening, exact DP, PELT and BIC selection.

All solvers consume a :class:`ScoreOracle`, which memoizes segment scores
``(b - a) * KL(st(f_hat_(a,b]) || st(baseline))`` and dispatches to the
batched fast kernels whenever the grid allows it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .core import (
    DegenerateData,
    DetectorConfig,
    FrequencyGrid,
    Infeasible,
    Segmentation,
    Series,
    WindowTooSmall,
    ZeroSegment,
    center_series,
    make_grid,
)
from .divergence import kl_divergence, log_baseline_density
from .spectral import (
    DftTable,
    SpectralEstimate,
    bandwidth_for,
    build_dft_table,
    pooled_baseline,
    segment_spectrum,
    white_noise_baseline,
)

__all__ = [
    "CandidateSet",
    "PenaltySchedule",
    "ScoreOracle",
    "BicResult",
    "PeltResult",
    "DetectionResult",
    "grid_candidates",
    "screen",
    "dp_solve",
    "calibrate_penalty",
    "bic_select",
    "pelt_solve",
    "detect",
]


@dataclass(frozen=True)
class CandidateSet:
    """Sorted admissible change-point locations."""

    indices: np.ndarray

    def __post_init__(self):
        idx = np.unique(np.asarray(self.indices, dtype=np.int64))
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class PenaltySchedule:
    """BIC penalty per change point: c_n = me_bic * n ** c."""

    me_bic: float
    c: float
    c_n: float


class ScoreOracle:
    """Memoized segment scores against a fixed baseline.

    The fast half-grid kernels apply when the table was built on a standard
    grid and the largest possible bandwidth stays below N_lambda / 2;
    otherwise scoring falls back to the generic spectral path.
    """

    def __init__(
        self,
        table: DftTable,
        baseline: SpectralEstimate,
        alpha: float,
        ml: int,
    ):
        self.table = table
        self.baseline = baseline
        self.alpha = alpha
        self.ml = ml
        self.n = table.n
        self._memo: dict = {}
        grid = table.grid
        max_m = bandwidth_for(table.n, alpha)
        self._fast = bool(
            table.half
            and grid.is_standard
            and table.values is not None
            and max_m < grid.size // 2
        )
        if self._fast:
            h = grid.size // 2 + 1
            lsb = np.ascontiguousarray(log_baseline_density(baseline)[:h])
            self._whw = _kernels.half_weights(grid.size)
            self._cos = _kernels.cos_table(grid.size, max_m)
            self._cos_t = np.ascontiguousarray(self._cos.T)
            self._beta = self._cos @ (self._whw * lsb)
            lags, wrap_row, wrap_lag, wrap_coef = _kernels.lag_tables(
                grid.size, max_m, table.n
            )
            self._q = _kernels.lag_prefix(table.values, lags)
            self._wrap = (wrap_row, wrap_lag, wrap_coef)
            self._dlam = grid.weight

    def score_pairs(self, a_arr, b_arr) -> np.ndarray:
        """Batch scores; does not touch the memo.

        Duplicate (a, b) pairs are scored once (screening windows share most
        of their sub-segments).
        """
        a_arr = np.asarray(a_arr, dtype=np.int64)
        b_arr = np.asarray(b_arr, dtype=np.int64)
        if self._fast:
            keys = a_arr * np.int64(self.n + 1) + b_arr
            uniq, inv = np.unique(keys, return_inverse=True)
            wrap_row, wrap_lag, wrap_coef = self._wrap
            scores = _kernels.segment_scores_batch(
                self._q,
                wrap_row,
                wrap_lag,
                wrap_coef,
                uniq // (self.n + 1),
                uniq % (self.n + 1),
                self.alpha,
                self._beta,
                self._whw,
                self._cos,
                self._cos_t,
                self._dlam,
                self.table.grid.size,
            )
            out = scores[inv]
        else:
            out = np.empty(len(a_arr))
            for i in range(len(a_arr)):
                est = segment_spectrum(self.table, int(a_arr[i]), int(b_arr[i]), self.alpha)
                out[i] = (b_arr[i] - a_arr[i]) * kl_divergence(est, self.baseline) / est.mass
        if not np.all(np.isfinite(out)):
            raise ZeroSegment("a scored segment has zero spectral mass")
        return out

    def score(self, a: int, b: int) -> float:
        key = (a, b)
        hit = self._memo.get(key)
        if hit is None:
            hit = float(self.score_pairs(np.array([a]), np.array([b]))[0])
            self._memo[key] = hit
        return hit

    def score_matrix(self, positions: np.ndarray, ml: int) -> np.ndarray:
        """Scores for all admissible ordered position pairs; -inf elsewhere."""
        p = np.asarray(positions, dtype=np.int64)
        n_pos = len(p)
        ii, jj = np.triu_indices(n_pos, k=1)
        ok = p[jj] - p[ii] >= ml
        ii, jj = ii[ok], jj[ok]
        mat = np.full((n_pos, n_pos), -np.inf)
        if len(ii):
            vals = self.score_pairs(p[ii], p[jj])
            mat[ii, jj] = vals
            for i, j, v in zip(ii, jj, vals):
                self._memo.setdefault((int(p[i]), int(p[j])), float(v))
        return mat


def grid_candidates(n: int, ml: int, n_su: int) -> CandidateSet:
    """Multiples of n_su inside [ml, n - ml]."""
    first = -(-ml // n_su) * n_su  # ceil to the grid
    pts = np.arange(first, n - ml + 1, n_su, dtype=np.int64)
    return CandidateSet(indices=pts)


def screen(oracle: ScoreOracle, l: int, n_su: int, n: int) -> CandidateSet:
    """Sliding-window two-split pre-pass nominating candidate locations.

    Each window (j, j + l] records the interior split maximizing the sum of
    the two sub-segment scores; sub-segments shorter than
    ``max(2 * bandwidth(l), 32)`` are skipped so that windows below twice the
    detection minimum length still admit a split.
    """
    ml_screen = max(2 * bandwidth_for(l, oracle.alpha), 32)
    if l > n:
        raise WindowTooSmall(f"window {l} longer than the series ({n})")
    first = -(-ml_screen // n_su) * n_su
    offsets = np.arange(first, l - ml_screen + 1, n_su, dtype=np.int64)
    if len(offsets) == 0:
        raise WindowTooSmall(f"window {l} admits no interior split at n_su={n_su}")
    starts = np.arange(0, n - l + 1, n_su, dtype=np.int64)
    n_s, n_o = len(starts), len(offsets)
    splits = (starts[:, None] + offsets[None, :]).ravel()
    lefts_a = np.repeat(starts, n_o)
    rights_b = lefts_a + l
    both = oracle.score_pairs(
        np.concatenate([lefts_a, splits]), np.concatenate([splits, rights_b])
    )
    total = both[: len(splits)] + both[len(splits) :]
    best = np.argmax(total.reshape(n_s, n_o), axis=1)
    cands = starts + offsets[best]
    cands = cands[(cands >= oracle.ml) & (cands <= n - oracle.ml)]
    return CandidateSet(indices=cands)


def _positions(cands: CandidateSet, n: int) -> np.ndarray:
    inner = cands.indices
    inner = inner[(inner > 0) & (inner < n)]
    return np.concatenate(([0], inner, [n]))


def _backtrack(positions, score, g, k) -> np.ndarray:
    """Lexicographically smallest optimal boundary vector for k cuts."""
    n_pos = len(positions)
    bounds = [0]
    i = 0
    for t in range(k, 0, -1):
        target = g[t, i]
        for j in range(i + 1, n_pos - 1):
            v = score[i, j] + g[t - 1, j]
            if v == target:
                i = j
                break
        else:  # pragma: no cover - target always attained
            raise Infeasible("backtracking failed")
        bounds.append(int(positions[i]))
    bounds.append(int(positions[-1]))
    return np.asarray(bounds, dtype=np.int64)


def dp_solve(
    oracle: ScoreOracle, k: int, cands: CandidateSet, n: int, ml: int
) -> Segmentation:
    """Exact DP for the best segmentation with exactly k change points."""
    if k == 0:
        return Segmentation(
            boundaries=np.array([0, n]), k=0, objective=oracle.score(0, n)
        )
    if (k + 1) * ml > n:
        raise Infeasible(f"{k + 1} segments of length >= {ml} do not fit in {n}")
    if len(cands) == 0:
        raise Infeasible("empty candidate set with k >= 1")
    positions = _positions(cands, n)
    score = oracle.score_matrix(positions, ml)
    g = _kernels.dp_fill(score, k)
    if not np.isfinite(g[k, 0]):
        raise Infeasible(f"no admissible segmentation with k={k}")
    bounds = _backtrack(positions, score, g, k)
    return Segmentation(boundaries=bounds, k=k, objective=float(g[k, 0]))


def calibrate_penalty(oracle: ScoreOracle, ml: int, c: float, n: int) -> PenaltySchedule:
    """Median sliding-window divergence times n ** c.

    Windows of length ml start every ml/2 samples; the median of their
    (length-unweighted) divergences sets the scale of the data.
    """
    if n < 2 * ml:
        raise DegenerateData(f"need n >= 2*ml for calibration (n={n}, ml={ml})")
    starts = np.arange(0, n - ml + 1, max(1, ml // 2), dtype=np.int64)
    kls = oracle.score_pairs(starts, starts + ml) / ml
    me_bic = float(np.median(kls))
    if me_bic <= 0.0:
        raise DegenerateData("median window divergence is not positive")
    return PenaltySchedule(me_bic=me_bic, c=c, c_n=me_bic * n**c)


@dataclass(frozen=True)
class BicResult:
    k_hat: int
    segmentation: Segmentation
    objectives: np.ndarray  # best objective per L (nan where infeasible)
    bic_values: np.ndarray


def bic_select(
    oracle: ScoreOracle,
    cands: CandidateSet,
    k_max: int,
    pen: PenaltySchedule,
    n: int,
    ml: int,
) -> BicResult:
    """Minimize BIC_L = -max R + L * c_n over L = 0..k_max; ties go small."""
    positions = _positions(cands, n)
    k_cap = min(k_max, len(positions) - 2)
    score = oracle.score_matrix(positions, ml)
    g = _kernels.dp_fill(score, max(k_cap, 0))
    objectives = np.full(k_max + 1, np.nan)
    bics = np.full(k_max + 1, np.inf)
    for L in range(k_cap + 1):
        if np.isfinite(g[L, 0]):
            objectives[L] = g[L, 0]
            bics[L] = -g[L, 0] + L * pen.c_n
    k_hat = int(np.argmin(bics))  # first minimum = smallest L on ties
    bounds = _backtrack(positions, score, g, k_hat)
    seg = Segmentation(boundaries=bounds, k=k_hat, objective=float(g[k_hat, 0]))
    return BicResult(k_hat=k_hat, segmentation=seg, objectives=objectives, bic_values=bics)


@dataclass(frozen=True)
class PeltResult:
    k_hat: int
    segmentation: Segmentation
    pruning_used: bool  # heuristic for this cost; compare against exhaustive


def pelt_solve(
    oracle: ScoreOracle,
    cands: CandidateSet,
    pen: PenaltySchedule,
    n: int,
    ml: int,
    prune: bool = True,
) -> PeltResult:
    """Penalized optimal partitioning with optional PELT pruning.

    With ``prune=False`` the result is the exhaustive penalized optimum over
    the candidate set.  Pruning applies the standard PELT drop rule, which is
    not proven valid for this cost, hence the flag in the result.
    """
    positions = _positions(cands, n)
    n_pos = len(positions)
    f = np.full(n_pos, np.inf)
    f[0] = -pen.c_n
    pred = np.full(n_pos, -1, dtype=np.int64)
    active = [0]
    for t in range(1, n_pos):
        feas = [s for s in active if positions[t] - positions[s] >= ml]
        if feas:
            costs = -oracle.score_pairs(positions[np.array(feas)], np.full(len(feas), positions[t]))
            totals = f[np.array(feas)] + costs + pen.c_n
            j = int(np.argmin(totals))
            if np.isfinite(totals[j]):
                f[t] = totals[j]
                pred[t] = feas[j]
            if prune and np.isfinite(f[t]):
                keep = set()
                for s, tot in zip(feas, totals - pen.c_n):
                    if tot <= f[t]:
                        keep.add(s)
                active = [s for s in active if s in keep or positions[t] - positions[s] < ml]
        if t < n_pos - 1:
            active.append(t)
    if not np.isfinite(f[-1]):
        raise Infeasible("no admissible segmentation under the penalty")
    bounds = [int(positions[-1])]
    t = n_pos - 1
    while pred[t] >= 0:
        t = int(pred[t])
        bounds.append(int(positions[t]))
    bounds = np.asarray(bounds[::-1], dtype=np.int64)
    k_hat = len(bounds) - 2
    obj = float(sum(oracle.score(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])))
    seg = Segmentation(boundaries=bounds, k=k_hat, objective=obj)
    return PeltResult(k_hat=k_hat, segmentation=seg, pruning_used=prune)


@dataclass
class DetectionResult:
    segmentation: Segmentation
    k_hat: int
    config: DetectorConfig
    penalty: Optional[PenaltySchedule]
    candidate_count: int
    baseline: SpectralEstimate
    series: Series
    grid: FrequencyGrid
    table: DftTable = field(repr=False, default=None)
    bic: Optional[BicResult] = None
    elapsed: float = 0.0

    @property
    def boundaries(self) -> np.ndarray:
        return self.segmentation.boundaries

    @property
    def fractions(self) -> np.ndarray:
        n = self.series.n
        return self.segmentation.change_points / n


def detect(
    raw_values,
    config: DetectorConfig,
    known_k: Optional[int] = None,
    grid: Optional[FrequencyGrid] = None,
) -> DetectionResult:
    """End-to-end detection: center, estimate, screen/solve.

    ``known_k`` switches to exact DP with that many change points; otherwise
    the solver named in ``config`` selects the number via BIC or PELT.
    """
    t0 = time.perf_counter()
    series = center_series(raw_values)
    n = series.n
    config.validate_for(n)
    if grid is None:
        grid = make_grid(config.grid_size)
    table = build_dft_table(series, grid)
    if config.baseline == "pooled":
        baseline = pooled_baseline(table, config.alpha)
    else:
        baseline = white_noise_baseline(grid)
    oracle = ScoreOracle(table, baseline, config.alpha, config.ml)

    if config.solver == "dp":
        cands = grid_candidates(n, config.ml, config.n_su)
    else:
        cands = screen(oracle, min(config.window, n), config.n_su, n)

    penalty = None
    bic = None
    if known_k is not None:
        seg = dp_solve(oracle, known_k, cands, n, config.ml)
        k_hat = known_k
    elif config.solver == "pelt":
        penalty = calibrate_penalty(oracle, config.ml, config.penalty_exponent, n)
        res = pelt_solve(oracle, cands, penalty, n, config.ml)
        seg, k_hat = res.segmentation, res.k_hat
    else:
        penalty = calibrate_penalty(oracle, config.ml, config.penalty_exponent, n)
        bic = bic_select(oracle, cands, config.k_max, penalty, n, config.ml)
        seg, k_hat = bic.segmentation, bic.k_hat

    return DetectionResult(
        segmentation=seg,
        k_hat=k_hat,
        config=config,
        penalty=penalty,
        candidate_count=len(cands),
        baseline=baseline,
        series=series,
        grid=grid,
        table=table,
        bic=bic,
        elapsed=time.perf_counter() - t0,
    )
