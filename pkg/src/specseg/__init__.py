"""Spectral change-point segmentation of non-stationary time series.

Segments a series into stationary pieces by maximizing a generalized
Kullback-Leibler divergence between normalized smoothed-periodogram spectra,
with exact dynamic programming, a screening pre-pass, PELT, and a calibrated
BIC rule for the number of change points.
"""

from .core import (
    DetectorConfig,
    FrequencyGrid,
    Segmentation,
    Series,
    SpecsegError,
    center_series,
    make_grid,
    restrict_grid,
    validate_segmentation,
)
from .divergence import kl_divergence, normalize, objective, segment_score
from .evaluate import ReplicationSummary, rho, run_replications, table_report
from .simulate import (
    LinearProcessSpec,
    PiecewiseSpec,
    case_spec,
    draw_noise,
    simulate_linear,
    simulate_piecewise,
)
from .solvers import (
    CandidateSet,
    PenaltySchedule,
    ScoreOracle,
    bic_select,
    calibrate_penalty,
    detect,
    dp_solve,
    grid_candidates,
    pelt_solve,
    screen,
)
from .spectral import (
    DftTable,
    SpectralEstimate,
    bandwidth_for,
    build_dft_table,
    fejer_kernel_value,
    periodogram,
    pooled_baseline,
    segment_spectrum,
    smooth,
    white_noise_baseline,
)

__version__ = "0.1.0"

__all__ = [
    "DetectorConfig",
    "FrequencyGrid",
    "Segmentation",
    "Series",
    "SpecsegError",
    "center_series",
    "make_grid",
    "restrict_grid",
    "validate_segmentation",
    "kl_divergence",
    "normalize",
    "objective",
    "segment_score",
    "ReplicationSummary",
    "rho",
    "run_replications",
    "table_report",
    "LinearProcessSpec",
    "PiecewiseSpec",
    "case_spec",
    "draw_noise",
    "simulate_linear",
    "simulate_piecewise",
    "CandidateSet",
    "PenaltySchedule",
    "ScoreOracle",
    "bic_select",
    "calibrate_penalty",
    "detect",
    "dp_solve",
    "grid_candidates",
    "pelt_solve",
    "screen",
    "DftTable",
    "SpectralEstimate",
    "bandwidth_for",
    "build_dft_table",
    "fejer_kernel_value",
    "periodogram",
    "pooled_baseline",
    "segment_spectrum",
    "smooth",
    "white_noise_baseline",
]
