"""Multivariate Isolate-Detect: offline change-point detection for panels of series.

Typical use::

    from midetect import DetectionConfig, analyze, validate_series

    report = analyze(validate_series(x), DetectionConfig(scenario="mean"))
    report.changepoints
"""

__version__ = "0.1.0"

from .aggregate import aggregate_matrix, aggregate_row
from .calibrate import calibrate_constants
from .contrast import contrast_matrix, cusum_value, slope_contrast_phi, slope_contrast_value
from .core import (
    ChangePointReport,
    Detection,
    DetectionConfig,
    Interval,
    MultiSeries,
    Norm,
    NormPolicy,
    Scenario,
    validate_series,
)
from .detect import detect, estimate_sparsity, interval_schedule, mid_detect, mid_opt, mid_perm
from .errors import MIDError
from .pipeline import analyze, prepare
from .preprocess import anscombe, estimate_sigma_mad, normalize
from .thresholds import THRESHOLD_TABLE, threshold, threshold_constant

__all__ = [
    "ChangePointReport",
    "Detection",
    "DetectionConfig",
    "Interval",
    "MIDError",
    "MultiSeries",
    "Norm",
    "NormPolicy",
    "Scenario",
    "THRESHOLD_TABLE",
    "aggregate_matrix",
    "aggregate_row",
    "analyze",
    "anscombe",
    "calibrate_constants",
    "contrast_matrix",
    "cusum_value",
    "detect",
    "estimate_sigma_mad",
    "estimate_sparsity",
    "interval_schedule",
    "mid_detect",
    "mid_opt",
    "mid_perm",
    "normalize",
    "prepare",
    "slope_contrast_phi",
    "slope_contrast_value",
    "threshold",
    "threshold_constant",
    "validate_series",
]
