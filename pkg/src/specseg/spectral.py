"""Segment periodograms on a shared grid and Fejer-kernel smoothing.

The periodogram of any segment (a, b] is obtained in O(N_lambda) from a
table of cumulative DFTs.  Smoothing is the discrete periodic convolution of
the periodogram with the Fejer (Bartlett-window) kernel, using the grid's
quadrature weight; it keeps a single code path for standard and
band-restricted grids.

For real data on a standard grid the spectrum is even in lambda, so the
cumulative table only stores the non-positive half of the grid and mirrors
on demand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    BadRange,
    FrequencyGrid,
    Series,
    ZeroSegment,
)

__all__ = [
    "DftTable",
    "SpectralEstimate",
    "build_dft_table",
    "periodogram",
    "fejer_kernel_value",
    "smooth",
    "bandwidth_for",
    "segment_spectrum",
    "pooled_baseline",
    "white_noise_baseline",
]

# Phase matrices exp(-1j * j * lambda_i) are periodic in j with period
# N_lambda on a standard grid, so one (N_lambda x N_lambda) block per grid
# size serves every series.
_PHASE_CACHE: dict = {}

# Kernel rows/matrices keyed by (bandwidth, grid key); safe to re-populate
# concurrently because entries are deterministic.
_KERNEL_CACHE: dict = {}


@dataclass(frozen=True)
class DftTable:
    """Prefix sums of X_j * exp(-1j*j*lambda) over a shared grid.

    ``cumsum[t, i]`` is the sum over j <= t, so the DFT of any segment
    (a, b] is ``cumsum[b] - cumsum[a]`` exactly.  When ``half`` is true the
    stored columns cover grid points 0..N_lambda/2 only (lambda in [-pi, 0])
    and the remaining columns follow by conjugate symmetry.
    """

    grid: FrequencyGrid
    cumsum: np.ndarray
    n: int
    half: bool
    values: np.ndarray = None  # the (centered) samples the table was built from

    def segment_dft(self, a: int, b: int) -> np.ndarray:
        """Complex DFT of the segment (a, b] on the full grid."""
        if not (0 <= a < b <= self.n):
            raise BadRange(f"bad segment ({a}, {b}] for series of length {self.n}")
        d = self.cumsum[b] - self.cumsum[a]
        if not self.half:
            return d
        full = np.empty(self.grid.size, dtype=np.complex128)
        h = self.cumsum.shape[1]
        full[:h] = d
        full[h:] = np.conj(d[-2:0:-1])
        return full


def _phase_block(grid: FrequencyGrid, half: bool) -> np.ndarray:
    key = (grid._cache_key(), half)
    block = _PHASE_CACHE.get(key)
    if block is None:
        n_lam = grid.size
        pts = grid.points[: n_lam // 2 + 1] if half else grid.points
        j = np.arange(1, n_lam + 1, dtype=np.float64)
        block = np.exp(-1j * np.outer(j, pts))
        _PHASE_CACHE[key] = block
    return block


def build_dft_table(s: Series, grid: FrequencyGrid) -> DftTable:
    """Cumulative segment-DFT table for a centered series."""
    x = s.values
    n = s.n
    half = bool(grid.is_standard)
    if half:
        # exp(-1j*j*lambda_i) has exact period N_lambda in j on a standard
        # grid, so reuse one phase block instead of n rows of exp().
        block = _phase_block(grid, half=True)
        n_lam = grid.size
        rows = ((np.arange(1, n + 1) - 1) % n_lam)
        terms = x[:, None] * block[rows]
    else:
        j = np.arange(1, n + 1, dtype=np.float64)
        terms = x[:, None] * np.exp(-1j * np.outer(j, grid.points))
    cs = np.empty((n + 1, terms.shape[1]), dtype=np.complex128)
    cs[0] = 0.0
    np.cumsum(terms, axis=0, out=cs[1:])
    return DftTable(grid=grid, cumsum=cs, n=n, half=half, values=x)


def periodogram(table: DftTable, a: int, b: int) -> np.ndarray:
    """|segment DFT|^2 / (b - a) at every grid point."""
    d = table.segment_dft(a, b)
    return (d.real * d.real + d.imag * d.imag) / (b - a)


def fejer_kernel_value(u, m: int):
    """Fejer kernel sin^2(m*u/2) / (2*pi*m*sin^2(u/2)), 2*pi-periodic.

    Near u = 0 (mod 2*pi) the analytic limit m/(2*pi) is used.
    """
    u = np.asarray(u, dtype=np.float64)
    w = np.mod(u + np.pi, 2 * np.pi) - np.pi
    small = np.abs(w) < 1e-8
    safe = np.where(small, 1.0, w)
    num = np.sin(m * safe / 2.0) ** 2
    den = 2 * np.pi * m * np.sin(safe / 2.0) ** 2
    out = np.where(small, m / (2 * np.pi), num / den)
    return out if out.ndim else float(out)


def _kernel_matrix(grid: FrequencyGrid, m: int) -> np.ndarray:
    """Quadrature smoothing matrix K[i, j] = weight * W_m(wrap(l_i - l_j))."""
    key = (m, grid._cache_key())
    mat = _KERNEL_CACHE.get(key)
    if mat is None:
        diff = grid.points[:, None] - grid.points[None, :]
        mat = grid.weight * fejer_kernel_value(diff, m)
        _KERNEL_CACHE[key] = mat
    return mat


@dataclass(frozen=True)
class SpectralEstimate:
    """Non-negative smoothed spectrum values on the grid, with total mass."""

    grid: FrequencyGrid
    values: np.ndarray
    mass: float
    seg_len: int
    bandwidth_m: int


def smooth(i_vals: np.ndarray, m: int, grid: FrequencyGrid) -> SpectralEstimate:
    """Convolve a periodogram with the Fejer kernel on the grid."""
    i_vals = np.asarray(i_vals, dtype=np.float64)
    if len(i_vals) != grid.size:
        raise BadRange("periodogram length does not match the grid")
    values = _kernel_matrix(grid, m) @ i_vals
    np.maximum(values, 0.0, out=values)
    mass = float(grid.weight * values.sum())
    return SpectralEstimate(grid=grid, values=values, mass=mass, seg_len=len(i_vals), bandwidth_m=m)


def bandwidth_for(seg_len: int, alpha: float) -> int:
    """Segment-local kernel bandwidth m = max(2, round(seg_len ** alpha))."""
    if seg_len < 2:
        raise BadRange("segment length must be >= 2")
    return max(2, int(np.floor(seg_len**alpha + 0.5)))


def segment_spectrum(table: DftTable, a: int, b: int, alpha: float) -> SpectralEstimate:
    """Smoothed spectral estimate of segment (a, b] at its local bandwidth."""
    m = bandwidth_for(b - a, alpha)
    est = smooth(periodogram(table, a, b), m, table.grid)
    if est.mass < 1e-300:
        raise ZeroSegment(f"segment ({a}, {b}] has zero spectral mass")
    return SpectralEstimate(
        grid=est.grid, values=est.values, mass=est.mass, seg_len=b - a, bandwidth_m=m
    )


def pooled_baseline(table: DftTable, alpha: float) -> SpectralEstimate:
    """Whole-series spectral estimate, used as the reference spectrum."""
    return segment_spectrum(table, 0, table.n, alpha)


def white_noise_baseline(grid: FrequencyGrid) -> SpectralEstimate:
    """Constant 1/(2*pi) reference spectrum; integrates to one."""
    values = np.full(grid.size, 1.0 / (2 * np.pi))
    mass = float(grid.weight * values.sum())
    return SpectralEstimate(grid=grid, values=values, mass=mass, seg_len=0, bandwidth_m=1)
