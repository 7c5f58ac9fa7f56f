"""Piecewise-stationary linear-process generators and the benchmark cases.

Reproducibility: all randomness flows through numpy's counter-based Philox
bit generator.  Segment seeds are derived by hashing (seed, segment index)
through ``SeedSequence`` so that editing one segment of a spec never
perturbs the draws of the others.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from scipy.signal import lfilter

from .core import NonCausalAR, UnknownCase

__all__ = [
    "LinearProcessSpec",
    "PiecewiseSpec",
    "draw_noise",
    "simulate_linear",
    "simulate_piecewise",
    "case_spec",
    "parse_spec_file",
    "format_spec",
]

GAUSSIAN = "gaussian"
SCALED_T4 = "t4"  # t(4) / sqrt(2), unit variance


@dataclass(frozen=True)
class LinearProcessSpec:
    """One stationary regime: X_t - sum(ar_i X_{t-i}) = sum(ma_k xi_{t-k}).

    ``ma`` defaults to the identity filter (theta_0 = 1).  The AR polynomial
    must be causal (roots outside the unit circle); the MA side is free, so
    non-invertible moving averages are allowed.
    """

    ar: Tuple[float, ...] = ()
    ma: Tuple[float, ...] = (1.0,)
    noise: str = GAUSSIAN

    def __post_init__(self):
        object.__setattr__(self, "ar", tuple(float(v) for v in self.ar))
        object.__setattr__(self, "ma", tuple(float(v) for v in self.ma))
        if not self.ma:
            raise ValueError("ma must have at least theta_0")
        if self.noise not in (GAUSSIAN, SCALED_T4):
            raise ValueError(f"unknown noise kind {self.noise!r}")
        if self.ar:
            # roots of 1 - ar_1 z - ... - ar_p z^p
            poly = np.r_[1.0, -np.asarray(self.ar)][::-1]
            roots = np.roots(poly)
            if np.any(np.abs(roots) <= 1.0 + 1e-10):
                raise NonCausalAR(f"AR polynomial has a root inside the unit circle: {self.ar}")


@dataclass(frozen=True)
class PiecewiseSpec:
    """Ordered regimes with their lengths; change points at cumulative sums."""

    segments: Tuple[Tuple[int, LinearProcessSpec], ...]

    def __post_init__(self):
        segs = tuple((int(n), p) for n, p in self.segments)
        if not segs or any(n < 1 for n, _ in segs):
            raise ValueError("segments need positive lengths")
        object.__setattr__(self, "segments", segs)

    @property
    def n(self) -> int:
        return sum(n for n, _ in self.segments)

    @property
    def change_points(self) -> np.ndarray:
        lens = np.array([n for n, _ in self.segments], dtype=np.int64)
        return np.cumsum(lens)[:-1]


def _rng(seed, *extra) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, *extra))))


def draw_noise(kind: str, n: int, seed) -> np.ndarray:
    """i.i.d. unit-variance innovations, deterministic given the seed."""
    rng = seed if isinstance(seed, np.random.Generator) else _rng(seed)
    if kind == GAUSSIAN:
        return rng.standard_normal(n)
    if kind == SCALED_T4:
        return rng.standard_t(4, size=n) / np.sqrt(2.0)
    raise ValueError(f"unknown noise kind {kind!r}")


def simulate_linear(spec: LinearProcessSpec, n: int, seed) -> np.ndarray:
    """Length-n draw from the ARMA-style recursion, exactly stationary.

    The MA convolution uses innovations indexed before the output window; a
    pure MA therefore needs no burn-in, while an AR part discards
    max(500, 20p, q) warm-up samples.
    """
    p, q = len(spec.ar), len(spec.ma) - 1
    burn = max(500, 20 * p, q) if p else q
    xi = draw_noise(spec.noise, n + burn + q, seed)
    z = np.convolve(xi, spec.ma)[q : q + n + burn]
    if not p:
        return z[burn:]
    x = lfilter([1.0], np.r_[1.0, -np.asarray(spec.ar)], z)
    return x[burn:]


def simulate_piecewise(spec: PiecewiseSpec, seed) -> Tuple[np.ndarray, np.ndarray]:
    """Concatenated independent segment draws plus the true change points."""
    parts = [
        simulate_linear(proc, length, _rng(seed, idx))
        for idx, (length, proc) in enumerate(spec.segments)
    ]
    return np.concatenate(parts), spec.change_points


def _ma_cases(coeff_rows, noise):
    return tuple(
        (length, LinearProcessSpec(ma=tuple(row), noise=noise))
        for length, row in coeff_rows
    )


def case_spec(case_id: int, noise: str = GAUSSIAN) -> PiecewiseSpec:
    """The four benchmark processes.

    1: three autoregressions, lengths 1024/512/512.
    2: three ARMA regimes, lengths 500/600/700.
    3: invertible MA, (3+B)(2-B) / (3-B)(2-B) / (3+B)(2-B), 500/600/700.
    4: non-invertible MA with cubic polynomials, 500/600/700.
    """
    if case_id == 1:
        segs = (
            (1024, LinearProcessSpec(ar=(0.9,), noise=noise)),
            (512, LinearProcessSpec(ar=(1.69, -0.81), noise=noise)),
            (512, LinearProcessSpec(ar=(1.32, -0.81), noise=noise)),
        )
    elif case_id == 2:
        segs = (
            (500, LinearProcessSpec(ar=(1.0, -0.25), ma=(1.0, 0.8), noise=noise)),
            (600, LinearProcessSpec(ar=(0.5,), noise=noise)),
            (
                700,
                LinearProcessSpec(
                    ar=(1.7, -0.9, 0.168), ma=(1.0, -1.6, 0.79, -0.12), noise=noise
                ),
            ),
        )
    elif case_id == 3:
        # (3+B)(2-B) = 6 - B - B^2 ; (3-B)(2-B) = 6 - 5B + B^2
        segs = _ma_cases(
            ((500, (6.0, -1.0, -1.0)), (600, (6.0, -5.0, 1.0)), (700, (6.0, -1.0, -1.0))),
            noise,
        )
    elif case_id == 4:
        segs = _ma_cases(
            (
                (500, (1.0, 2.0, 1.0, 5.0)),
                (600, (1.0, -2.0, 2.0, -5.0)),
                (700, (1.0, 2.0, -1.0, 5.0)),
            ),
            noise,
        )
    else:
        raise UnknownCase(f"case id must be 1..4, got {case_id}")
    return PiecewiseSpec(segments=segs)


# ---------------------------------------------------------------------------
# plain-text spec files: one segment per line, e.g.
#   length=500 ar=1.0,-0.25 ma=1,0.8 noise=gaussian
# ---------------------------------------------------------------------------


def _parse_floats(text: str) -> Tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def parse_spec_file(text: str) -> PiecewiseSpec:
    """Parse the key=value segment schema; '#' starts a comment."""
    segments: List[Tuple[int, LinearProcessSpec]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = {}
        for tok in line.split():
            if "=" not in tok:
                raise ValueError(f"line {lineno}: expected key=value, got {tok!r}")
            key, val = tok.split("=", 1)
            fields[key] = val
        if "length" not in fields:
            raise ValueError(f"line {lineno}: missing length=")
        length = int(fields.pop("length"))
        ar = _parse_floats(fields.pop("ar", ""))
        ma = _parse_floats(fields.pop("ma", "")) or (1.0,)
        noise = fields.pop("noise", GAUSSIAN)
        if fields:
            raise ValueError(f"line {lineno}: unknown keys {sorted(fields)}")
        segments.append((length, LinearProcessSpec(ar=ar, ma=ma, noise=noise)))
    if not segments:
        raise ValueError("spec file defines no segments")
    return PiecewiseSpec(segments=tuple(segments))


def format_spec(spec: PiecewiseSpec) -> str:
    lines = []
    for length, proc in spec.segments:
        parts = [f"length={length}"]
        if proc.ar:
            parts.append("ar=" + ",".join(repr(v) for v in proc.ar))
        parts.append("ma=" + ",".join(repr(v) for v in proc.ma))
        parts.append(f"noise={proc.noise}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
