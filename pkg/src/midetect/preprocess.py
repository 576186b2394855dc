"""Noise-scale estimation and variance-stabilising transforms."""

from __future__ import annotations

import warnings

import numpy as np

from .core import MultiSeries, Scenario
from .errors import DegenerateComponent, DimensionMismatch, MIDError, NegativeCount

MAD_TO_SD = 1.4826


def _mad(x: np.ndarray, axis: int = 0) -> np.ndarray:
    med = np.median(x, axis=axis, keepdims=True)
    return np.median(np.abs(x - med), axis=axis)


def _raw_sigma(series: MultiSeries, scenario: Scenario) -> np.ndarray:
    order, scale = (1, np.sqrt(2.0)) if scenario is Scenario.PIECEWISE_CONSTANT else (2, np.sqrt(6.0))
    if series.T < order + 2:
        raise MIDError(f"need T >= {order + 2} to estimate the noise scale, got {series.T}")
    return MAD_TO_SD * _mad(np.diff(series.values, n=order, axis=0)) / scale


def estimate_sigma_mad(series: MultiSeries, scenario: Scenario) -> np.ndarray:
    """Per-component noise scale from the MAD of differenced data.

    The mean scenario uses first differences (noise variance doubles, so the
    estimate is divided by ``sqrt(2)``); the linear scenario uses second
    differences (variance times six). Differencing confines each
    change-point's influence to one or two terms, so the estimate is robust
    to the structure being sought.
    """
    sigma = _raw_sigma(series, Scenario(scenario))
    zero = np.flatnonzero(sigma <= 0)
    if zero.size:
        raise DegenerateComponent(int(zero[0]) + 1)
    return sigma


def estimate_sigma_or_unit(series: MultiSeries, scenario: Scenario) -> np.ndarray:
    """Like :func:`estimate_sigma_mad` but degenerate components get sigma 1."""
    sigma = _raw_sigma(series, Scenario(scenario))
    zero = np.flatnonzero(sigma <= 0)
    if zero.size:
        warnings.warn(
            f"components {[int(j) + 1 for j in zero]} have zero MAD; using sigma = 1",
            RuntimeWarning,
            stacklevel=2,
        )
        sigma[zero] = 1.0
    return sigma


def normalize(series: MultiSeries, sigma) -> MultiSeries:
    sigma = np.asarray(sigma, dtype=float).ravel()
    if sigma.shape != (series.d,):
        raise DimensionMismatch(f"expected {series.d} scales, got {sigma.size}")
    if not (sigma > 0).all() or not np.isfinite(sigma).all():
        raise MIDError("noise scales must be finite and positive")
    return MultiSeries(series.values / sigma)


def anscombe(series: MultiSeries) -> MultiSeries:
    """Entrywise ``2 * sqrt(x + 3/8)`` for count data."""
    x = series.values
    neg = np.argwhere(x < 0)
    if neg.size:
        raise NegativeCount(int(neg[0][0]) + 1, int(neg[0][1]) + 1)
    if not np.array_equal(x, np.round(x)):
        raise MIDError("the Anscombe transform expects integer counts")
    return MultiSeries(2.0 * np.sqrt(x + 0.375))
