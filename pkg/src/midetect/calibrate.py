"""Simulation-based choice of the threshold constant.

A threshold run on ``[1, T]`` returns nothing exactly when no interval of the
initial expansion schedule scores above the threshold. So for each null panel
it suffices to record the largest score over that schedule, divided by the
threshold rate: the run stays empty for every constant at or above that
ratio. Counting empty runs for a whole grid of constants then costs one scan
per panel.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import DetectionConfig, MultiSeries, Norm, Scenario, check_alpha
from .detect import iter_scores
from .errors import MIDError
from .pipeline import prepare
from .thresholds import threshold_rate

log = logging.getLogger(__name__)


def critical_constant(series: MultiSeries, scenario: Scenario, norm: Norm, lam: int = 10) -> float:
    """Smallest constant for which a threshold run on ``series`` detects nothing."""
    top = max(score for _, score in iter_scores(series, scenario, norm, lam))
    return top / threshold_rate(series.T, series.d)


def null_panel(T: int, d: int, rng: np.random.Generator) -> MultiSeries:
    return MultiSeries(rng.standard_normal((T, d)))


@dataclass
class CalibrationResult:
    constants: dict[int, float]
    grid: np.ndarray
    # d -> number of empty runs for each grid value
    empty_counts: dict[int, np.ndarray] = field(default_factory=dict)
    runs_per_d: int = 0


def select_constant(critical: np.ndarray, grid: np.ndarray, alpha: float) -> tuple[float, np.ndarray]:
    """Grid value whose empty-run count is closest to ``(1 - alpha) * runs``.

    When a count below and a count above the target are equally close, the
    larger count (the more conservative constant) wins. Constants sharing the
    winning count behave identically on the simulated panels, so the smallest
    of them is returned.
    """
    counts = (critical[None, :] <= grid[:, None]).sum(axis=1)
    gap = np.abs(counts - (1 - alpha) * critical.size)
    tied = np.flatnonzero(gap == gap.min())
    winner = counts[tied].max()
    best = np.flatnonzero(counts == winner)[0]
    return float(grid[best]), counts


def calibrate_constants(
    scenario: Scenario,
    norm: Norm,
    alpha: float,
    T_values=(700, 1400),
    d_range=(1,),
    reps: int = 500,
    candidate_grid=None,
    rng_seed: int | None = 0,
    lam: int = 10,
    sigma: str = "mad",
) -> CalibrationResult:
    """Pick, per dimension, the constant that leaves a fraction ``1 - alpha`` of null runs empty.

    For every ``d`` in ``d_range`` and ``T`` in ``T_values``, ``reps`` standard
    Gaussian panels are drawn; the target count is ``(1 - alpha)`` times the
    total number of panels for that ``d``. ``sigma`` is the noise-scale policy
    applied before detection, as in :func:`midetect.pipeline.prepare`.
    """
    scenario, norm, alpha = Scenario(scenario), Norm(norm), check_alpha(alpha)
    if reps < 1:
        raise MIDError("reps must be >= 1")
    if candidate_grid is None:
        candidate_grid = np.round(np.arange(0.3, 3.0 + 1e-9, 0.05), 10)
    grid = np.asarray(candidate_grid, dtype=float)
    if grid.size == 0 or (grid <= 0).any() or (np.diff(grid) <= 0).any():
        raise MIDError("candidate grid must be non-empty, positive and strictly increasing")
    cfg = DetectionConfig(scenario=scenario, norm=norm.value, alpha=alpha, lam=lam)
    entropy = rng_seed if rng_seed is not None else np.random.SeedSequence().entropy

    result = CalibrationResult({}, grid)
    for d in d_range:
        crit = []
        for T in T_values:
            for rep in range(reps):
                rng = np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=(d, T, rep)))
                panel, _ = prepare(null_panel(T, d, rng), cfg, sigma)
                crit.append(critical_constant(panel, scenario, norm, lam))
        crit = np.asarray(crit)
        c, counts = select_constant(crit, grid, alpha)
        log.info("d=%d: C=%.3f (%d/%d empty)", d, c, counts[np.searchsorted(grid, c)], crit.size)
        result.constants[d] = c
        result.empty_counts[d] = counts
        result.runs_per_d = crit.size
    return result
