"""Shared value types, validation and configuration.

Everything here is an immutable value object; the estimation modules build
on top of these and stay pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "SpecsegError",
    "EmptyInput",
    "InvalidGridSize",
    "BadRange",
    "ZeroSegment",
    "ZeroMass",
    "GridMismatch",
    "SupportMismatch",
    "Infeasible",
    "WindowTooSmall",
    "DegenerateData",
    "NonCausalAR",
    "UnknownCase",
    "InvalidConfig",
    "Series",
    "FrequencyGrid",
    "Segmentation",
    "DetectorConfig",
    "ViolationReport",
    "center_series",
    "validate_segmentation",
    "make_grid",
    "restrict_grid",
]


class SpecsegError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInput(SpecsegError):
    pass


class InvalidGridSize(SpecsegError):
    pass


class BadRange(SpecsegError):
    pass


class ZeroSegment(SpecsegError):
    pass


class ZeroMass(SpecsegError):
    pass


class GridMismatch(SpecsegError):
    pass


class SupportMismatch(SpecsegError):
    pass


class Infeasible(SpecsegError):
    pass


class WindowTooSmall(SpecsegError):
    pass


class DegenerateData(SpecsegError):
    pass


class NonCausalAR(SpecsegError):
    pass


class UnknownCase(SpecsegError):
    pass


class InvalidConfig(SpecsegError):
    pass


@dataclass(frozen=True)
class Series:
    """A centered observation vector.

    ``values`` holds the (possibly centered) observations, ``n`` their count.
    """

    values: np.ndarray
    n: int
    centered: bool

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.n != len(self.values):
            raise InvalidConfig("n does not match len(values)")


@dataclass(frozen=True)
class FrequencyGrid:
    """Equispaced evaluation frequencies with their quadrature weight.

    ``points`` are radians in [-pi, pi), strictly increasing with constant
    step equal to ``weight``.  A *standard* grid starts at -pi and covers the
    whole circle; band-restricted grids are contiguous subsets with the same
    step.
    """

    points: np.ndarray
    weight: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def is_standard(self) -> bool:
        n = self.size
        return (
            n >= 16
            and n % 2 == 0
            and abs(self.points[0] + np.pi) < 1e-12
            and abs(n * self.weight - 2 * np.pi) < 1e-9
        )

    def same_as(self, other: "FrequencyGrid") -> bool:
        return (
            self.size == other.size
            and abs(self.weight - other.weight) < 1e-15
            and np.array_equal(self.points, other.points)
        )

    def _cache_key(self):
        return (self.size, float(self.points[0]), float(self.points[-1]), self.weight)


@dataclass(frozen=True)
class Segmentation:
    """Ordered change-point boundaries 0 = tau_0 < ... < tau_{K+1} = N."""

    boundaries: np.ndarray
    k: int
    objective: float

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=np.int64)
        b.setflags(write=False)
        object.__setattr__(self, "boundaries", b)
        if self.k != len(b) - 2:
            raise InvalidConfig("k must equal len(boundaries) - 2")

    @property
    def change_points(self) -> np.ndarray:
        return self.boundaries[1:-1]


@dataclass(frozen=True)
class ViolationReport:
    """Result of a segmentation check; truthy iff the segmentation is valid."""

    ok: bool
    constraint: Optional[str] = None
    index: Optional[int] = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class DetectorConfig:
    """All knobs of a detection run.

    ``alpha`` is the bandwidth exponent (segment bandwidth is
    ``round(length ** alpha)``), ``n_su`` the search-unit gridding of
    candidate locations and ``screen_window`` the sliding-window length of
    the screening pre-pass (defaults to ``2 * ml``).
    """

    ml: int = 350
    k_max: int = 6
    alpha: float = 1.0 / 3.0
    baseline: str = "pooled"  # "pooled" | "white"
    grid_size: int = 512
    n_su: int = 1
    penalty_exponent: float = 0.73
    solver: str = "bic"  # "dp" | "screen" | "pelt" | "bic"
    screen_window: Optional[int] = None

    def __post_init__(self):
        if self.ml < 2:
            raise InvalidConfig("ml must be >= 2")
        if self.k_max < 0:
            raise InvalidConfig("k_max must be >= 0")
        if not (0.25 <= self.alpha < 0.5):
            raise InvalidConfig("alpha must lie in [1/4, 1/2)")
        if self.baseline not in ("pooled", "white"):
            raise InvalidConfig(f"unknown baseline {self.baseline!r}")
        if self.solver not in ("dp", "screen", "pelt", "bic"):
            raise InvalidConfig(f"unknown solver {self.solver!r}")
        if self.n_su < 1:
            raise InvalidConfig("n_su must be >= 1")
        if self.grid_size < 16 or self.grid_size % 2:
            raise InvalidConfig("grid_size must be even and >= 16")
        if self.screen_window is not None and self.screen_window < self.ml:
            raise InvalidConfig("screen_window must be >= ml")

    @property
    def window(self) -> int:
        return self.screen_window if self.screen_window is not None else 2 * self.ml

    def validate_for(self, n: int) -> None:
        """Check the feasibility constraints that depend on the series length."""
        from .spectral import bandwidth_for

        if n < 2 * self.ml:
            raise InvalidConfig(f"series of length {n} is shorter than 2*ml={2 * self.ml}")
        # k_max may exceed what fits; BIC simply skips infeasible counts.
        if bandwidth_for(n, self.alpha) >= self.ml:
            raise InvalidConfig("ml must exceed the bandwidth implied by alpha")


def center_series(raw) -> Series:
    """Subtract the sample mean from ``raw`` and return a centered Series."""
    values = np.asarray(raw, dtype=np.float64)
    if values.ndim != 1 or len(values) < 2:
        raise EmptyInput("need a 1-D series of length >= 2")
    centered = values - values.mean()
    return Series(values=centered, n=len(centered), centered=True)


def validate_segmentation(s: Segmentation, n: int, ml: int) -> ViolationReport:
    """Check monotone boundaries, 0/n endpoints, and all gaps >= ml."""
    b = s.boundaries
    if len(b) < 2:
        return ViolationReport(False, "too-few-boundaries", None)
    if b[0] != 0:
        return ViolationReport(False, "first-boundary-not-zero", 0)
    if b[-1] != n:
        return ViolationReport(False, "last-boundary-not-n", len(b) - 1)
    for i in range(1, len(b)):
        gap = b[i] - b[i - 1]
        if gap <= 0:
            return ViolationReport(False, "not-increasing", i)
        if gap < ml:
            return ViolationReport(False, "gap-below-ml", i)
    return ViolationReport(True)


def make_grid(grid_size: int) -> FrequencyGrid:
    """Equispaced grid lambda_i = -pi + (i-1) * 2*pi/N_lambda on [-pi, pi)."""
    if grid_size < 16 or grid_size % 2:
        raise InvalidGridSize("grid_size must be even and >= 16")
    weight = 2 * np.pi / grid_size
    points = -np.pi + weight * np.arange(grid_size)
    return FrequencyGrid(points=points, weight=weight)


def restrict_grid(grid: FrequencyGrid, lo: float, hi: float) -> FrequencyGrid:
    """Contiguous sub-grid with points in [lo, hi]; step is preserved."""
    if not (-np.pi <= lo < hi <= np.pi):
        raise InvalidGridSize("band must satisfy -pi <= lo < hi <= pi")
    mask = (grid.points >= lo) & (grid.points <= hi)
    points = grid.points[mask]
    if len(points) < 16:
        raise InvalidGridSize("restricted grid retains fewer than 16 points")
    return FrequencyGrid(points=points.copy(), weight=grid.weight)
