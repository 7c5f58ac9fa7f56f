"""Command-line interface: detect / simulate / bench / spectrum.

Exit codes: 0 success, 2 input parse error, 3 infeasible configuration,
4 degenerate data.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .core import (
    DegenerateData,
    DetectorConfig,
    Infeasible,
    InvalidConfig,
    InvalidGridSize,
    SpecsegError,
    WindowTooSmall,
    ZeroMass,
    ZeroSegment,
    center_series,
    make_grid,
    restrict_grid,
)
from .divergence import normalize
from .evaluate import run_replications, sweep_mean_k_hat, table_report
from .simulate import case_spec, format_spec, parse_spec_file, simulate_piecewise
from .solvers import detect
from .spectral import build_dft_table, segment_spectrum

EXIT_PARSE = 2
EXIT_INFEASIBLE = 3
EXIT_DEGENERATE = 4


def _read_csv(path: str, rows: str | None):
    """Single numeric column, UTF-8, '.' decimals, optional one-line header."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh]
    except OSError as exc:
        raise _ParseError(f"cannot read {path}: {exc}")
    values = []
    for i, ln in enumerate(lines, start=1):
        if not ln:
            continue
        try:
            values.append(float(ln))
        except ValueError:
            if i == 1 and not values:
                continue  # header line
            raise _ParseError(f"{path}: row {i} is not numeric: {ln!r}")
    if not values:
        raise _ParseError(f"{path}: no numeric rows")
    data = np.asarray(values)
    if rows:
        try:
            a, b = (int(v) for v in rows.split(":"))
        except ValueError:
            raise _ParseError(f"--rows expects a:b, got {rows!r}")
        data = data[a:b]
    return data


class _ParseError(SpecsegError):
    pass


def _parse_band(text: str):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise _ParseError(f"--band expects lo:hi, got {text!r}")
    return lo, hi


def _config_from(args) -> DetectorConfig:
    return DetectorConfig(
        ml=args.ml,
        k_max=args.kmax,
        alpha=args.alpha,
        baseline=args.baseline,
        grid_size=args.grid,
        n_su=args.n_su,
        penalty_exponent=args.c,
        solver=args.solver,
        screen_window=args.screen_window,
    )


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--ml", type=int, default=350, help="minimum segment length")
    p.add_argument("--kmax", type=int, default=6, help="upper bound on change points")
    p.add_argument("--alpha", type=float, default=1.0 / 3.0, help="bandwidth exponent")
    p.add_argument("--baseline", choices=("pooled", "white"), default="pooled")
    p.add_argument("--grid", type=int, default=512, help="frequency grid size")
    p.add_argument("--n-su", dest="n_su", type=int, default=1, help="search unit")
    p.add_argument("--c", type=float, default=0.73, help="penalty exponent")
    p.add_argument("--solver", choices=("dp", "screen", "pelt", "bic"), default="bic")
    p.add_argument("--screen-window", type=int, default=None, help="screening window (default 2*ml)")
    p.add_argument("--known-k", type=int, default=None, help="solve for exactly this many change points")
    p.add_argument("--band", type=str, default=None, help="restrict frequencies to lo:hi (radians)")


def _write_spectra_tsv(path, grid, table, boundaries, alpha):
    cols = []
    names = []
    for a, b in zip(boundaries[:-1], boundaries[1:]):
        est = segment_spectrum(table, int(a), int(b), alpha)
        cols.append(normalize(est))
        names.append(f"st_{a}_{b}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("lambda\t" + "\t".join(names) + "\n")
        for i, lam in enumerate(grid.points):
            fh.write("\t".join([repr(float(lam))] + [repr(float(c[i])) for c in cols]) + "\n")


def cmd_detect(args) -> int:
    data = _read_csv(args.input, args.rows)
    config = _config_from(args)
    grid = make_grid(config.grid_size)
    if args.band:
        lo, hi = _parse_band(args.band)
        grid = restrict_grid(grid, lo, hi)
    result = detect(data, config, known_k=args.known_k, grid=grid)
    spectra_file = None
    if args.output:
        spectra_file = str(Path(args.output).with_suffix(".spectra.tsv"))
        _write_spectra_tsv(
            spectra_file, result.grid, result.table, result.boundaries, config.alpha
        )
    doc = {
        "command": "detect",
        "input": args.input,
        "n": result.series.n,
        "k_hat": result.k_hat,
        "boundaries": result.boundaries.tolist(),
        "change_points": result.segmentation.change_points.tolist(),
        "fractions": [float(f) for f in result.fractions],
        "objective": result.segmentation.objective,
        "candidate_count": result.candidate_count,
        "penalty": None
        if result.penalty is None
        else dataclasses.asdict(result.penalty),
        "config": dataclasses.asdict(config),
        "band": args.band,
        "seed": args.seed,
        "spectra_file": spectra_file,
        "runtime_seconds": result.elapsed,
    }
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def cmd_simulate(args) -> int:
    if (args.case is None) == (args.spec is None):
        raise _ParseError("give exactly one of --case or --spec")
    if args.case is not None:
        spec = case_spec(args.case, args.noise)
    else:
        try:
            spec = parse_spec_file(Path(args.spec).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise _ParseError(f"bad spec file {args.spec}: {exc}")
    values, truth = simulate_piecewise(spec, args.seed)
    out = Path(args.output)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("x\n")
        for v in values:
            fh.write(repr(float(v)) + "\n")
    sidecar = out.with_suffix(out.suffix + ".truth.txt")
    sidecar.write_text("".join(f"{t}\n" for t in truth), encoding="utf-8")
    print(f"wrote {len(values)} rows to {out}; true change points in {sidecar}")
    return 0


def _parse_sweep(text: str):
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise _ParseError(f"--sweep-c expects lo:hi:step, got {text!r}")
    return np.arange(lo, hi + 1e-12, step)


def cmd_bench(args) -> int:
    config = _config_from(args)
    jobs = args.jobs or os.cpu_count() or 1
    sweep = _parse_sweep(args.sweep_c) if args.sweep_c else None
    label = f"case{args.case} {config.solver}"
    if args.known_k is not None:
        label += f" k={args.known_k}"
    summary, records = run_replications(
        args.case,
        config,
        reps=args.reps,
        seed0=args.seed,
        known_k=args.known_k,
        noise=args.noise,
        jobs=jobs,
        collect_profiles=sweep is not None,
        label=label,
    )
    text, rows = table_report([summary])
    print(text)
    out_lines = rows
    if sweep is not None:
        means = sweep_mean_k_hat(records, summary.n, sweep)
        print("\nc\tmean_k_hat")
        sweep_rows = ["c\tmean_k_hat"]
        for c, mk in zip(sweep, means):
            line = f"{c:.3f}\t{mk:.4f}"
            print(line)
            sweep_rows.append(line)
        out_lines = rows + [""] + sweep_rows
    if args.output:
        Path(args.output).write_text("\n".join(out_lines) + "\n", encoding="utf-8")
    return 0


def cmd_spectrum(args) -> int:
    data = _read_csv(args.input, args.rows)
    series = center_series(data)
    grid = make_grid(args.grid)
    if args.band:
        lo, hi = _parse_band(args.band)
        grid = restrict_grid(grid, lo, hi)
    table = build_dft_table(series, grid)
    if args.boundaries:
        try:
            cps = sorted(int(v) for v in args.boundaries.split(","))
        except ValueError:
            raise _ParseError(f"--boundaries expects comma-separated integers")
        bounds = [0] + [c for c in cps if 0 < c < series.n] + [series.n]
    else:
        bounds = [0, series.n]
    _write_spectra_tsv(args.output, grid, table, bounds, args.alpha)
    print(f"wrote {len(bounds) - 1} spectrum column(s) to {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specseg",
        description="Spectral change-point segmentation of non-stationary time series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect change points in a CSV series")
    p.add_argument("input", help="single-column CSV file")
    p.add_argument("-o", "--output", default=None, help="write the JSON result here")
    p.add_argument("--rows", default=None, help="a:b half-open row trim")
    p.add_argument("--seed", type=int, default=None, help="echoed into the result doc")
    _add_config_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("simulate", help="draw a benchmark or user-defined series")
    p.add_argument("--case", type=int, default=None, choices=(1, 2, 3, 4))
    p.add_argument("--spec", default=None, help="segment spec file")
    p.add_argument("--noise", choices=("gaussian", "t4"), default="gaussian")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, help="output CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="Monte-Carlo replication benchmark")
    p.add_argument("--case", type=int, required=True, choices=(1, 2, 3, 4))
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", choices=("gaussian", "t4"), default="gaussian")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: cores)")
    p.add_argument("--sweep-c", default=None, help="lo:hi:step sweep of the penalty exponent")
    p.add_argument("-o", "--output", default=None, help="write TSV rows here")
    _add_config_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("spectrum", help="export normalized per-segment spectra as TSV")
    p.add_argument("input", help="single-column CSV file")
    p.add_argument("-o", "--output", required=True, help="output TSV path")
    p.add_argument("--boundaries", default=None, help="comma-separated change points")
    p.add_argument("--rows", default=None, help="a:b half-open row trim")
    p.add_argument("--alpha", type=float, default=1.0 / 3.0)
    p.add_argument("--grid", type=int, default=512)
    p.add_argument("--band", default=None, help="restrict frequencies to lo:hi")
    p.set_defaults(func=cmd_spectrum)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InvalidConfig, InvalidGridSize, Infeasible, WindowTooSmall) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (DegenerateData, ZeroSegment, ZeroMass) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
