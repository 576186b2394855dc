"""End-to-end detection: transform, rescale, detect."""

from __future__ import annotations

import numpy as np

from .core import ChangePointReport, DetectionConfig, MultiSeries
from .detect import detect
from .preprocess import anscombe, estimate_sigma_or_unit, normalize


def prepare(series: MultiSeries, cfg: DetectionConfig, sigma="mad", use_anscombe: bool = False):
    """Apply the optional Anscombe transform, then divide by the noise scales.

    ``sigma`` is ``"mad"`` (estimate per component), ``"none"`` (assume unit
    variance) or an explicit sequence of ``d`` positive scales. Returns the
    prepared series and the scales used.
    """
    if use_anscombe:
        series = anscombe(series)
    if isinstance(sigma, str):
        if sigma == "mad":
            sigma = estimate_sigma_or_unit(series, cfg.scenario)
        elif sigma == "none":
            return series, np.ones(series.d)
        else:
            raise ValueError(f"unknown sigma policy {sigma!r}")
    sigma = np.asarray(sigma, dtype=float)
    return normalize(series, sigma), sigma


def analyze(series: MultiSeries, cfg: DetectionConfig, sigma="mad", use_anscombe: bool = False) -> ChangePointReport:
    prepared, _ = prepare(series, cfg, sigma, use_anscombe)
    return detect(prepared, cfg)
