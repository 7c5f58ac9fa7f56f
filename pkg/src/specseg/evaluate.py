"""Accuracy metrics and the Monte-Carlo replication harness."""

from __future__ import annotations

import multiprocessing
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import DetectorConfig, SpecsegError
from .simulate import PiecewiseSpec, case_spec, simulate_piecewise
from .solvers import detect

__all__ = [
    "rho",
    "ReplicationSummary",
    "run_replications",
    "sweep_mean_k_hat",
    "table_report",
    "parse_report_row",
    "scaled_case1",
]


def rho(a_set, b_set, n: Optional[int] = None) -> float:
    """One-sided set distance sup_{b in B} inf_{a in A} |a - b|.

    Measures how well A covers B.  Conventions for empty sets: nothing to
    cover gives 0; an empty covering set against a non-empty target gives n
    (maximal miss), which then requires ``n``.
    """
    a = np.asarray(sorted(a_set), dtype=np.float64)
    b = np.asarray(sorted(b_set), dtype=np.float64)
    if len(b) == 0:
        return 0.0
    if len(a) == 0:
        if n is None:
            raise ValueError("empty covering set needs n for the miss convention")
        return float(n)
    return float(np.max(np.min(np.abs(a[None, :] - b[:, None]), axis=1)))


@dataclass(frozen=True)
class ReplicationSummary:
    label: str
    reps: int
    n: int
    mean_rho_est_to_true: float
    mean_rho_est_to_true_norm: float
    mean_rho_true_to_est: float
    mean_rho_true_to_est_norm: float
    k_accuracy: float
    mean_k_hat: float
    runtime_seconds: float
    failures: int = 0


def _resolve_spec(spec_or_case: Union[int, PiecewiseSpec], noise: str) -> PiecewiseSpec:
    if isinstance(spec_or_case, PiecewiseSpec):
        return spec_or_case
    return case_spec(int(spec_or_case), noise)


def _replicate(args):
    spec, config, known_k, seed, want_profile = args
    values, truth = simulate_piecewise(spec, seed)
    try:
        result = detect(values, config, known_k=known_k)
    except SpecsegError as exc:
        return {"failed": repr(exc)}
    est = result.segmentation.change_points
    n = len(values)
    out = {
        "rho_est_to_true": rho(est, truth, n),
        "rho_true_to_est": rho(truth, est, n),
        "k_hat": result.k_hat,
        "k_correct": int(result.k_hat == len(truth)),
        "boundaries": result.segmentation.boundaries.tolist(),
    }
    if want_profile and result.bic is not None:
        out["objectives"] = result.bic.objectives.tolist()
        out["me_bic"] = result.penalty.me_bic
    return out


def run_replications(
    spec_or_case: Union[int, PiecewiseSpec],
    config: DetectorConfig,
    reps: int,
    seed0: int,
    known_k: Optional[int] = None,
    noise: str = "gaussian",
    jobs: Optional[int] = None,
    collect_profiles: bool = False,
    label: str = "",
) -> Tuple[ReplicationSummary, List[dict]]:
    """Simulate/detect ``reps`` times with seeds seed0, seed0+1, ...

    Returns the aggregate summary plus the per-replicate records (needed for
    penalty sweeps and boundary-level checks).  Failed replicates are
    excluded from the means but abort the run beyond a 1% share.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    spec = _resolve_spec(spec_or_case, noise)
    tasks = [(spec, config, known_k, seed0 + i, collect_profiles) for i in range(reps)]
    if jobs is None:
        jobs = multiprocessing.cpu_count()
    t0 = time.perf_counter()
    if jobs > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(processes=jobs) as pool:
            records = pool.map(_replicate, tasks, chunksize=1)
    else:
        records = [_replicate(t) for t in tasks]
    elapsed = time.perf_counter() - t0

    good = [r for r in records if "failed" not in r]
    failures = reps - len(good)
    if failures > max(1, reps // 100):
        raise SpecsegError(f"{failures}/{reps} replicates failed; aborting")
    n = spec.n
    r1 = float(np.mean([r["rho_est_to_true"] for r in good]))
    r2 = float(np.mean([r["rho_true_to_est"] for r in good]))
    summary = ReplicationSummary(
        label=label or f"n={n}",
        reps=reps,
        n=n,
        mean_rho_est_to_true=r1,
        mean_rho_est_to_true_norm=r1 / n,
        mean_rho_true_to_est=r2,
        mean_rho_true_to_est_norm=r2 / n,
        k_accuracy=float(np.mean([r["k_correct"] for r in good])),
        mean_k_hat=float(np.mean([r["k_hat"] for r in good])),
        runtime_seconds=elapsed,
        failures=failures,
    )
    return summary, records


def sweep_mean_k_hat(records: Sequence[dict], n: int, cs: Sequence[float]) -> np.ndarray:
    """Mean selected K over replicates for each penalty exponent.

    Reuses the per-replicate DP objective profiles, so a whole sweep costs
    one detection run.
    """
    means = []
    for c in cs:
        k_hats = []
        for rec in records:
            if "objectives" not in rec:
                continue
            obj = np.asarray(rec["objectives"], dtype=np.float64)
            c_n = rec["me_bic"] * n**c
            ls = np.arange(len(obj))
            bic = np.where(np.isnan(obj), np.inf, -obj + ls * c_n)
            k_hats.append(int(np.argmin(bic)))
        means.append(np.mean(k_hats))
    return np.asarray(means)


_COLUMNS = (
    "label",
    "reps",
    "n",
    "rho_est_to_true",
    "rho_est_to_true_norm",
    "rho_true_to_est",
    "rho_true_to_est_norm",
    "k_accuracy",
    "mean_k_hat",
    "runtime_seconds",
    "failures",
)


def _cell(raw: float, norm: float) -> str:
    return f"{raw:.2f} ({norm:.3f})"


def table_report(summaries: Sequence[ReplicationSummary]) -> Tuple[str, List[str]]:
    """Text table plus machine-readable TSV rows (header first)."""
    header = f"{'config':<28} {'rho(est||true)':>18} {'rho(true||est)':>18} {'K acc':>7} {'mean K':>7}"
    lines = [header, "-" * len(header)]
    rows = ["\t".join(_COLUMNS)]
    for s in summaries:
        lines.append(
            f"{s.label:<28} "
            f"{_cell(s.mean_rho_est_to_true, s.mean_rho_est_to_true_norm):>18} "
            f"{_cell(s.mean_rho_true_to_est, s.mean_rho_true_to_est_norm):>18} "
            f"{s.k_accuracy:>7.3f} {s.mean_k_hat:>7.3f}"
        )
        rows.append(
            "\t".join(
                [
                    s.label,
                    str(s.reps),
                    str(s.n),
                    repr(s.mean_rho_est_to_true),
                    repr(s.mean_rho_est_to_true_norm),
                    repr(s.mean_rho_true_to_est),
                    repr(s.mean_rho_true_to_est_norm),
                    repr(s.k_accuracy),
                    repr(s.mean_k_hat),
                    repr(s.runtime_seconds),
                    str(s.failures),
                ]
            )
        )
    return "\n".join(lines), rows


def parse_report_row(row: str) -> ReplicationSummary:
    """Inverse of the machine-readable rows of :func:`table_report`."""
    parts = row.split("\t")
    return ReplicationSummary(
        label=parts[0],
        reps=int(parts[1]),
        n=int(parts[2]),
        mean_rho_est_to_true=float(parts[3]),
        mean_rho_est_to_true_norm=float(parts[4]),
        mean_rho_true_to_est=float(parts[5]),
        mean_rho_true_to_est_norm=float(parts[6]),
        k_accuracy=float(parts[7]),
        mean_k_hat=float(parts[8]),
        runtime_seconds=float(parts[9]),
        failures=int(parts[10]),
    )


def scaled_case1(n: int, noise: str = "gaussian") -> PiecewiseSpec:
    """Case-1 regimes with segment proportions 1/2, 1/4, 1/4 at total length n."""
    from .simulate import LinearProcessSpec

    n1, n2 = n // 2, n // 4
    n3 = n - n1 - n2
    return PiecewiseSpec(
        segments=(
            (n1, LinearProcessSpec(ar=(0.9,), noise=noise)),
            (n2, LinearProcessSpec(ar=(1.69, -0.81), noise=noise)),
            (n3, LinearProcessSpec(ar=(1.32, -0.81), noise=noise)),
        )
    )
