"""Domain types shared across the package.

All time indices exposed here are 1-based: a series of length ``T`` has time
points ``1..T`` and change-points live in ``1..T-1``. A change-point ``r``
means the structure changes between ``r`` and ``r + 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import EmptyRange, MIDError, NonFiniteEntry, TooShort, UnknownAlpha


class Scenario(str, enum.Enum):
    """Type of structural change being sought."""

    PIECEWISE_CONSTANT = "mean"
    PIECEWISE_LINEAR = "linear"

    @property
    def min_length(self) -> int:
        """Shortest interval on which the contrast has at least one candidate."""
        return 2 if self is Scenario.PIECEWISE_CONSTANT else 3


class Norm(str, enum.Enum):
    """Mean-dominant aggregation applied across components."""

    L2 = "l2"
    LINF = "linf"


class NormPolicy(str, enum.Enum):
    L2 = "l2"
    LINF = "linf"
    AUTO = "auto"
    PERM_L2 = "perm-l2"
    PERM_LINF = "perm-linf"

    @property
    def is_permutation(self) -> bool:
        return self in (NormPolicy.PERM_L2, NormPolicy.PERM_LINF)

    @property
    def norm(self) -> Norm | None:
        """Fixed aggregation norm, or None for ``AUTO``."""
        return {
            NormPolicy.L2: Norm.L2,
            NormPolicy.PERM_L2: Norm.L2,
            NormPolicy.LINF: Norm.LINF,
            NormPolicy.PERM_LINF: Norm.LINF,
        }.get(self)


SUPPORTED_ALPHAS = (0.05, 0.10)


def check_alpha(alpha: float) -> float:
    for a in SUPPORTED_ALPHAS:
        if math.isclose(alpha, a, rel_tol=0, abs_tol=1e-12):
            return a
    raise UnknownAlpha(f"alpha must be one of {SUPPORTED_ALPHAS}, got {alpha!r}")


class MultiSeries:
    """Immutable T x d panel of observations, time along rows."""

    __slots__ = ("_values",)

    def __init__(self, values: np.ndarray):
        arr = np.array(values, dtype=float, copy=True)
        if arr.ndim == 1:
            arr = arr[:, None]
        arr.setflags(write=False)
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        """Read-only view of the underlying ``(T, d)`` array."""
        return self._values

    @property
    def T(self) -> int:
        return self._values.shape[0]

    @property
    def d(self) -> int:
        return self._values.shape[1]

    def value(self, t: int, j: int) -> float:
        """Entry at time ``t`` of component ``j`` (both 1-based)."""
        if not (1 <= t <= self.T and 1 <= j <= self.d):
            raise IndexError(f"({t}, {j}) outside 1..{self.T} x 1..{self.d}")
        return float(self._values[t - 1, j - 1])

    def column(self, j: int) -> np.ndarray:
        return self._values[:, j - 1]

    def window(self, interval: Interval) -> np.ndarray:
        """Rows ``s..e`` of the panel as a ``(|I|, d)`` view."""
        return self._values[interval.s - 1 : interval.e]

    def __repr__(self) -> str:
        return f"MultiSeries(T={self.T}, d={self.d})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiSeries):
            return NotImplemented
        return self._values.shape == other._values.shape and bool(
            np.array_equal(self._values, other._values)
        )

    __hash__ = None  # type: ignore[assignment]


def validate_series(values) -> MultiSeries:
    """Check a raw matrix and wrap it as a :class:`MultiSeries`.

    A 1-D input is read as a single component. Raises ``TooShort`` when there
    are fewer than two time points and ``NonFiniteEntry`` (1-based location of
    the first offender, row-major) for NaN or infinite cells.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.size == 0:
        raise MIDError("expected a non-empty T x d matrix")
    if arr.shape[0] < 2:
        raise TooShort(f"need at least 2 time points, got {arr.shape[0]}")
    bad = ~np.isfinite(arr)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise NonFiniteEntry(int(row) + 1, int(col) + 1)
    return MultiSeries(arr)


@dataclass(frozen=True)
class Interval:
    """Closed index range ``[s, e]`` (1-based, inclusive)."""

    s: int
    e: int

    def __post_init__(self):
        if self.s < 1 or self.e < self.s:
            raise EmptyRange(f"invalid interval [{self.s}, {self.e}]")

    def __len__(self) -> int:
        return self.e - self.s + 1

    def contains(self, t: int) -> bool:
        return self.s <= t <= self.e

    def __str__(self) -> str:
        return f"[{self.s}, {self.e}]"


@dataclass(frozen=True)
class DetectionConfig:
    """Parameters of a single detection run.

    ``univariate_alpha`` selects the constant used for the per-component
    sparsity test of the adaptive (``auto``) variant; ``None`` means use
    ``alpha``.
    """

    scenario: Scenario = Scenario.PIECEWISE_CONSTANT
    norm: NormPolicy = NormPolicy.AUTO
    alpha: float = 0.05
    lam: int = 10
    threshold_constant_override: float | None = None
    permutation_count: int = 1000
    permutation_alpha: float = 0.01
    rng_seed: int | None = None
    univariate_alpha: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        object.__setattr__(self, "norm", NormPolicy(self.norm))
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        if self.univariate_alpha is not None:
            object.__setattr__(self, "univariate_alpha", check_alpha(self.univariate_alpha))
        if int(self.lam) != self.lam or self.lam < 1:
            raise MIDError(f"expansion step must be a positive integer, got {self.lam!r}")
        if self.threshold_constant_override is not None and not (
            self.threshold_constant_override > 0
        ):
            raise MIDError("threshold constant override must be positive")
        if self.permutation_count < 1:
            raise MIDError("permutation count must be >= 1")
        if not 0 < self.permutation_alpha < 1:
            raise MIDError("permutation alpha must lie in (0, 1)")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["scenario"] = self.scenario.value
        out["norm"] = self.norm.value
        return out


@dataclass(frozen=True)
class Detection:
    """Diagnostics attached to one estimated change-point.

    ``component`` is the 1-based index of the component with the largest
    contrast at the detected location; ``affected`` lists the components whose
    univariate contrast passed the univariate threshold (empty unless the
    sparsity step ran).
    """

    index: int
    interval: Interval
    value: float
    component: int
    threshold: float
    affected: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "interval": [self.interval.s, self.interval.e],
            "value": self.value,
            "component": self.component,
            "threshold": self.threshold,
            "affected": list(self.affected),
        }


@dataclass(frozen=True)
class ChangePointReport:
    per_point: tuple[Detection, ...]
    norm_used: Norm
    threshold: float | None = None
    sparsity_estimate: float | None = None
    config: DetectionConfig | None = field(default=None, compare=False)

    def __post_init__(self):
        pts = tuple(sorted(self.per_point, key=lambda p: p.index))
        idx = [p.index for p in pts]
        if len(set(idx)) != len(idx):
            raise MIDError(f"duplicate change-points in report: {idx}")
        object.__setattr__(self, "per_point", pts)

    @property
    def changepoints(self) -> list[int]:
        return [p.index for p in self.per_point]

    def __len__(self) -> int:
        return len(self.per_point)

    def to_dict(self) -> dict:
        return {
            "changepoints": self.changepoints,
            "per_point": [p.to_dict() for p in self.per_point],
            "norm_used": self.norm_used.value,
            "sparsity_estimate": self.sparsity_estimate,
            "threshold": self.threshold,
            "config_echo": self.config.to_dict() if self.config is not None else None,
        }
