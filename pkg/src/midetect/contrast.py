"""Per-component contrast statistics.

Two families are provided. ``cusum_value`` / ``slope_contrast_phi`` /
``slope_contrast_value`` evaluate the textbook formulas one split at a time
and serve as the reference. ``contrast_block`` computes every candidate of an
interval for every component at once through prefix sums; it is what the
detector uses, and it also accepts a leading batch axis so that permuted
copies of an interval can be scored in one call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Interval, MultiSeries, Scenario
from .errors import IntervalTooShort, InvalidSplit


def _window(x, s: int, e: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if s < 1 or e > x.shape[0]:
        raise InvalidSplit(f"interval [{s}, {e}] outside a sequence of length {x.shape[0]}")
    return x[s - 1 : e]


def cusum_value(x, s: int, e: int, b: int) -> float:
    """Signed CUSUM of ``x`` over ``[s, e]`` split after ``b``.

    ``x`` is the full sequence with 1-based positions; only ``x[s..e]`` is read.
    """
    if not s <= b < e:
        raise InvalidSplit(f"split b={b} must satisfy {s} <= b < {e}")
    w = _window(x, s, e)
    n = e - s + 1
    left = b - s + 1
    right = e - b
    return float(
        np.sqrt(right / (n * left)) * w[:left].sum() - np.sqrt(left / (n * right)) * w[left:].sum()
    )


def slope_contrast_phi(s: int, e: int, b: int) -> np.ndarray:
    """Contrast vector for a kink at ``b`` on ``[s, e]``, one entry per time point.

    The vector has unit Euclidean norm and is orthogonal to constants and to
    linear trends over ``[s, e]``.
    """
    if not s + 1 <= b <= e - 1:
        raise InvalidSplit(f"kink b={b} must satisfy {s + 1} <= b <= {e - 1}")
    n = e - s + 1
    alpha = np.sqrt(
        6.0 / (n * (n * n - 1) * (1 + (e - b + 1) * (b - s + 1) + (e - b) * (b - s)))
    )
    beta = np.sqrt((e - b + 1) * (e - b) / ((b - s + 1) * (b - s)))
    t = np.arange(s, e + 1, dtype=float)
    left = alpha * beta * ((e + 2 * b - 3 * s + 2) * t - (b * e + b * s - 2 * s * s + 2 * s))
    right = alpha / beta * ((2 * e * e + 2 * e - b * e - b * s) - (3 * e - 2 * b - s + 2) * t)
    return np.where(t <= b, left, right)


def slope_contrast_value(x, s: int, e: int, b: int) -> float:
    """Absolute inner product of ``x[s..e]`` with the kink contrast vector."""
    phi = slope_contrast_phi(s, e, b)
    return float(abs(_window(x, s, e) @ phi))


def _cusum_block(w: np.ndarray) -> np.ndarray:
    n = w.shape[-2]
    w = w - w.mean(axis=-2, keepdims=True)
    S = np.cumsum(w, axis=-2)
    m = np.arange(1, n, dtype=float)[:, None]
    num = n * S[..., :-1, :] - m * S[..., -1:, :]
    return num / np.sqrt(n * m * (n - m))


def _slope_block(w: np.ndarray) -> np.ndarray:
    n = w.shape[-2]
    t = np.arange(1, n + 1, dtype=float)
    tc = t - t.mean()
    # Remove the least-squares line; the contrast ignores it and this keeps
    # the prefix sums small.
    mean = w.mean(axis=-2, keepdims=True)
    slope = np.einsum("t,...td->...d", tc, w)[..., None, :] / (tc @ tc)
    w = w - mean - slope * tc[:, None]

    Sx = np.cumsum(w, axis=-2)
    Stx = np.cumsum(w * t[:, None], axis=-2)
    m = np.arange(2, n, dtype=float)
    alpha = np.sqrt(6.0 / (n * (n * n - 1) * (1 + (n - m + 1) * m + (n - m) * (m - 1))))
    beta = np.sqrt((n - m + 1) * (n - m) / (m * (m - 1)))
    m_ = m[:, None]
    sx, stx = Sx[..., 1:-1, :], Stx[..., 1:-1, :]
    sx_n, stx_n = Sx[..., -1:, :], Stx[..., -1:, :]
    left = (n + 2 * m_ - 1) * stx - m_ * (n + 1) * sx
    right = (2 * n * n + 2 * n - m_ * n - m_) * (sx_n - sx) - (3 * n - 2 * m_ + 1) * (stx_n - stx)
    return (alpha * beta)[:, None] * left + (alpha / beta)[:, None] * right


def contrast_block(w: np.ndarray, scenario: Scenario) -> np.ndarray:
    """Absolute contrasts for all candidates of a window.

    ``w`` has shape ``(..., n, d)`` with time on the second-to-last axis.
    Returns ``(..., J, d)`` where row ``i`` is the ``i``-th candidate:
    local splits ``1..n-1`` for the mean scenario and kinks ``2..n-1`` for the
    linear one.
    """
    if scenario is Scenario.PIECEWISE_CONSTANT:
        return np.abs(_cusum_block(w))
    return np.abs(_slope_block(w))


def candidate_offset(scenario: Scenario) -> int:
    """Local position (1-based) of the first candidate in a window."""
    return 1 if scenario is Scenario.PIECEWISE_CONSTANT else 2


@dataclass(frozen=True)
class ContrastMatrix:
    values: np.ndarray
    interval: Interval
    candidates: np.ndarray
    scenario: Scenario

    @property
    def J(self) -> int:
        return self.values.shape[0]


def contrast_matrix(series: MultiSeries, interval: Interval, scenario: Scenario) -> ContrastMatrix:
    scenario = Scenario(scenario)
    if len(interval) < scenario.min_length:
        raise IntervalTooShort(
            f"{interval} has {len(interval)} points; scenario '{scenario.value}' "
            f"needs at least {scenario.min_length}"
        )
    if interval.e > series.T:
        raise IntervalTooShort(f"{interval} extends past T={series.T}")
    values = contrast_block(series.window(interval), scenario)
    first = interval.s + candidate_offset(scenario) - 1
    candidates = np.arange(first, first + values.shape[0])
    return ContrastMatrix(values, interval, candidates, scenario)
