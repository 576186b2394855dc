"""Synthetic panels with known change-points."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import MultiSeries, Scenario
from ..errors import MIDError


@dataclass(frozen=True)
class SignalSpec:
    """Recipe for one synthetic panel.

    Each change-point moves exactly ``ceil(sparsity * d)`` components, chosen
    uniformly at random. In the mean scenario those components jump by a
    signed ``U(lo, hi)`` amount. In the linear scenario their slope changes by
    ``U(lo, hi)``; a component's first slope change has a random sign and its
    later ones alternate, which keeps the signal from drifting off over long
    series. The signal is continuous in the linear scenario.
    """

    T: int
    d: int
    scenario: Scenario
    changepoints: tuple[int, ...]
    sparsity: float = 1.0
    magnitude_range: tuple[float, float] = (1.0, 2.0)
    noise_sd: float = 1.0
    rng_seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        cps = tuple(int(c) for c in self.changepoints)
        object.__setattr__(self, "changepoints", cps)
        if self.T < 2 or self.d < 1:
            raise MIDError("need T >= 2 and d >= 1")
        if list(cps) != sorted(set(cps)) or (cps and (cps[0] < 1 or cps[-1] > self.T - 1)):
            raise MIDError(f"change-points must be sorted, distinct and in [1, {self.T - 1}]")
        if not 0 < self.sparsity <= 1:
            raise MIDError("sparsity must lie in (0, 1]")
        lo, hi = self.magnitude_range
        if not 0 <= lo <= hi:
            raise MIDError("magnitude range must satisfy 0 <= lo <= hi")
        if self.noise_sd < 0:
            raise MIDError("noise sd must be nonnegative")

    @property
    def affected_count(self) -> int:
        return max(1, math.ceil(round(self.sparsity * self.d, 9)))


@dataclass(frozen=True)
class Truth:
    changepoints: tuple[int, ...]
    affected: tuple[tuple[int, ...], ...]
    signal: np.ndarray


def evenly_spaced(T: int, N: int) -> tuple[int, ...]:
    """``N`` change-points splitting ``1..T`` into segments of near-equal length."""
    return tuple(int(round(j * T / (N + 1))) for j in range(1, N + 1))


def generate_signal(spec: SignalSpec, rng: np.random.Generator | None = None) -> tuple[MultiSeries, Truth]:
    if rng is None:
        rng = np.random.default_rng(spec.rng_seed)
    T, d = spec.T, spec.d
    lo, hi = spec.magnitude_range
    k = spec.affected_count
    f = np.zeros((T, d))
    t = np.arange(1, T + 1, dtype=float)
    last_sign = np.zeros(d)
    affected = []
    for r in spec.changepoints:
        comps = np.sort(rng.choice(d, size=k, replace=False))
        size = rng.uniform(lo, hi, size=k)
        if spec.scenario is Scenario.PIECEWISE_CONSTANT:
            sign = rng.choice([-1.0, 1.0], size=k)
            f[r:, comps] += sign * size
        else:
            fresh = rng.choice([-1.0, 1.0], size=k)
            prev = last_sign[comps]
            sign = np.where(prev == 0, fresh, -prev)
            last_sign[comps] = sign
            f[:, comps] += np.maximum(t - r, 0.0)[:, None] * (sign * size)
        affected.append(tuple(int(c) + 1 for c in comps))
    x = f + spec.noise_sd * rng.standard_normal((T, d)) if spec.noise_sd > 0 else f.copy()
    return MultiSeries(x), Truth(spec.changepoints, tuple(affected), f)
