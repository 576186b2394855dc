"""Mean-dominant aggregation of contrast rows."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contrast import ContrastMatrix
from .core import Norm
from .errors import NegativeEntry


def aggregate_rows(values: np.ndarray, norm: Norm) -> np.ndarray:
    """Aggregate along the last axis; no validation, used in the hot loop."""
    if norm is Norm.LINF:
        return values.max(axis=-1)
    d = values.shape[-1]
    return np.sqrt(np.einsum("...i,...i->...", values, values) / d)


def aggregate_row(y, norm: Norm) -> float:
    """``L2`` is the Euclidean norm scaled by ``1/sqrt(d)``; ``LINF`` is the max."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("expected a non-empty 1-D vector")
    if (y < 0).any():
        raise NegativeEntry("mean-dominant norms are defined on nonnegative vectors")
    top = y.max()
    if top == 0 or Norm(norm) is Norm.LINF:
        return float(top)
    # Scale first so squaring neither underflows nor overflows.
    return float(top * aggregate_rows(y / top, Norm.L2))


@dataclass(frozen=True)
class AggregatedScores:
    scores: np.ndarray
    candidates: np.ndarray
    norm: Norm

    def argmax(self) -> int:
        """Position of the largest score; ties go to the earliest candidate."""
        return int(np.argmax(self.scores))


def aggregate_matrix(B: ContrastMatrix, norm: Norm) -> AggregatedScores:
    norm = Norm(norm)
    if (B.values < 0).any():
        raise NegativeEntry("contrast matrix has negative entries")
    return AggregatedScores(aggregate_rows(B.values, norm), B.candidates, norm)
