"""Agreement between true and estimated change-point sets."""

from __future__ import annotations

import numpy as np

from ..errors import EmptyTruth, MIDError


def segment_labels(changepoints, T: int) -> np.ndarray:
    """Segment id of each time point ``1..T``; a change-point ends its segment."""
    cps = np.asarray(sorted(changepoints), dtype=int)
    return np.searchsorted(cps, np.arange(1, T + 1), side="left")


def _pairs(n: np.ndarray) -> float:
    n = n.astype(float)
    return float((n * (n - 1) / 2).sum())


def adjusted_rand_index(true_cps, est_cps, T: int) -> float:
    """Hubert-Arabie adjusted Rand index of the two induced segmentations.

    When both segmentations are a single segment the index is 1.
    """
    for cps in (true_cps, est_cps):
        if any(c < 1 or c > T - 1 for c in cps):
            raise MIDError(f"change-points must lie in [1, {T - 1}]")
    a = segment_labels(true_cps, T)
    b = segment_labels(est_cps, T)
    table = np.zeros((a.max() + 1, b.max() + 1), dtype=np.int64)
    np.add.at(table, (a, b), 1)
    index = _pairs(table.ravel())
    rows = _pairs(table.sum(axis=1))
    cols = _pairs(table.sum(axis=0))
    total = T * (T - 1) / 2
    expected = rows * cols / total
    top = (rows + cols) / 2
    if top == expected:
        return 1.0
    return float((index - expected) / (top - expected))


def hausdorff_scaled(true_cps, est_cps, T: int) -> float:
    """Two-sided Hausdorff distance between the sets, over the longest true segment.

    An empty estimate is treated as being ``T`` away from every true
    change-point, so the result is ``T / n_s``.
    """
    true = np.asarray(sorted(true_cps), dtype=float)
    est = np.asarray(sorted(est_cps), dtype=float)
    if true.size == 0:
        raise EmptyTruth("the scaled Hausdorff distance needs at least one true change-point")
    n_s = float(np.diff(np.concatenate([[0.0], true, [float(T)]])).max())
    if est.size == 0:
        return T / n_s
    dist = np.abs(true[:, None] - est[None, :])
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()) / n_s)
