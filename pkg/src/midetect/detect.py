"""Isolate-then-detect engine for multivariate change-points.

The data are scanned on alternating right- and left-expanding intervals of a
working segment. The first interval whose best aggregated contrast passes the
acceptance test yields a change-point; the working segment is then shrunk to
the part not yet covered by the firing interval and the scan restarts. The
run ends when a working segment is exhausted without a detection.

Two acceptance tests are available: a fixed threshold (``mid_detect``) and a
permutation test (``mid_perm``). ``mid_opt`` chooses between the L-infinity
and L2 aggregations from an estimate of how many components each change
affects.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterator, NamedTuple

import numpy as np

from .aggregate import aggregate_rows
from .contrast import candidate_offset, contrast_block
from .core import (
    ChangePointReport,
    DetectionConfig,
    Detection,
    Interval,
    MultiSeries,
    Norm,
    NormPolicy,
    Scenario,
)
from .errors import EmptyCandidates, EmptyRange, MIDError
from .thresholds import threshold, univariate_threshold

log = logging.getLogger(__name__)

# Upper bound on floats materialised per batch of permuted windows.
_PERM_BATCH_FLOATS = 4_000_000


@dataclass(frozen=True)
class ExpandingInterval(Interval):
    """Interval of an expansion schedule; ``side`` is ``"right"`` or ``"left"``.

    A right-expanding interval is anchored at the working segment's start, a
    left-expanding one at its end.
    """

    side: str = "right"


@dataclass(frozen=True)
class WorkInterval:
    s: int
    e: int
    provenance: str = "initial"

    def __post_init__(self):
        if self.s >= self.e:
            raise EmptyRange(f"work interval [{self.s}, {self.e}] is empty")


class ScanHit(NamedTuple):
    b: int
    value: float
    q: int
    threshold: float


def interval_schedule(s: int, e: int, lam: int) -> list[ExpandingInterval]:
    """Expansion schedule ``R_1, L_1, R_2, L_2, ..., R_K, L_K`` of ``[s, e]``.

    With ``n = e - s + 1`` and ``K = ceil(n / lam)``:
    ``R_i = [s, min(s + i*lam - 1, e)]`` and ``L_i = [max(s, e - i*lam + 1), e]``.
    """
    if s >= e:
        raise EmptyRange(f"cannot build a schedule on [{s}, {e}]")
    if lam < 1:
        raise MIDError(f"expansion step must be >= 1, got {lam}")
    n = e - s + 1
    K = -(-n // lam)
    out = []
    for i in range(1, K + 1):
        out.append(ExpandingInterval(s, min(s + i * lam - 1, e), "right"))
        out.append(ExpandingInterval(max(s, e - i * lam + 1), e, "left"))
    return out


def _best_split(w: np.ndarray, scenario: Scenario, norm: Norm) -> tuple[int, float, int]:
    """Local argmax candidate (0-based row), its score and argmax component (0-based)."""
    B = contrast_block(w, scenario)
    v = aggregate_rows(B, norm)
    i = int(np.argmax(v))
    return i, float(v[i]), int(np.argmax(B[i]))


def _hit(interval: Interval, scenario: Scenario, i: int, value: float, q: int, thr: float) -> ScanHit:
    return ScanHit(interval.s + candidate_offset(scenario) - 1 + i, value, q + 1, thr)


def scan_interval(
    series: MultiSeries,
    interval: Interval,
    cfg: DetectionConfig,
    zeta: float,
    norm: Norm | None = None,
) -> ScanHit | None:
    """Test one interval against the fixed threshold ``zeta``.

    Returns the best candidate (absolute 1-based index), its aggregated score
    and the 1-based component with the largest contrast there, only when the
    score is strictly above ``zeta``. Ties go to the smallest index.
    """
    norm = Norm(norm) if norm is not None else _fixed_norm(cfg)
    if len(interval) < cfg.scenario.min_length:
        return None
    i, value, q = _best_split(series.window(interval), cfg.scenario, norm)
    if value > zeta:
        return _hit(interval, cfg.scenario, i, value, q, zeta)
    return None


def _fixed_norm(cfg: DetectionConfig) -> Norm:
    norm = cfg.norm.norm
    if norm is None:
        raise MIDError("norm policy 'auto' has no fixed aggregation norm")
    return norm


def _permutation_quantile(maxima: np.ndarray, alpha: float) -> float:
    K = maxima.size
    rank = math.ceil(round((1 - alpha) * K, 9))
    rank = min(max(rank, 1), K)
    return float(np.partition(maxima, rank - 1)[rank - 1])


def _interval_rng(entropy: int, interval: Interval) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy % 2**64, spawn_key=(interval.s, interval.e)))


def permuted_maxima(
    w: np.ndarray,
    scenario: Scenario,
    norm: Norm,
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Maximum aggregated score of ``count`` row-permuted copies of a window."""
    n, d = w.shape
    batch = max(1, min(count, _PERM_BATCH_FLOATS // (n * d)))
    out = np.empty(count)
    base = np.broadcast_to(np.arange(n), (batch, n))
    done = 0
    while done < count:
        k = min(batch, count - done)
        order = rng.permuted(base[:k], axis=1)
        scores = aggregate_rows(contrast_block(w[order], scenario), norm)
        out[done : done + k] = scores.max(axis=1)
        done += k
    return out


def permutation_scan(
    series: MultiSeries,
    interval: Interval,
    cfg: DetectionConfig,
    entropy: int,
    norm: Norm | None = None,
) -> ScanHit | None:
    """Test one interval with a permutation test on its maximal score.

    Whole rows of the interval are shuffled so the cross-component alignment
    is kept. A detection needs the observed maximum to be strictly larger than
    the order statistic of rank ``ceil((1 - alpha) K)`` of the ``K`` permuted
    maxima. The permutations depend only on ``entropy`` and the interval
    bounds.
    """
    norm = Norm(norm) if norm is not None else _fixed_norm(cfg)
    if len(interval) < cfg.scenario.min_length:
        return None
    w = series.window(interval)
    i, value, q = _best_split(w, cfg.scenario, norm)
    if value == 0.0:
        # Nothing to beat; every permutation also scores zero.
        return None
    maxima = permuted_maxima(w, cfg.scenario, norm, cfg.permutation_count, _interval_rng(entropy, interval))
    qtl = _permutation_quantile(maxima, cfg.permutation_alpha)
    if value > qtl:
        return _hit(interval, cfg.scenario, i, value, q, qtl)
    return None


def _isolate_detect(
    series: MultiSeries,
    scenario: Scenario,
    lam: int,
    test: Callable[[Interval], ScanHit | None],
    trace: list | None = None,
) -> list[Detection]:
    min_len = scenario.min_length
    found: dict[int, Detection] = {}
    work = [WorkInterval(1, series.T)] if series.T >= min_len else []
    while work:
        wi = work.pop()
        seen = set()
        for iv in interval_schedule(wi.s, wi.e, lam):
            if len(iv) < min_len or (iv.s, iv.e) in seen:
                continue
            seen.add((iv.s, iv.e))
            hit = test(iv)
            if hit is None:
                continue
            if hit.b in found:
                raise RuntimeError(f"change-point {hit.b} detected twice (interval {iv})")
            found[hit.b] = Detection(hit.b, Interval(iv.s, iv.e), hit.value, hit.q, hit.threshold)
            if trace is not None:
                trace.append((wi, iv, hit.b))
            if iv.side == "right":
                nxt = (iv.e, wi.e, "right")
            else:
                nxt = (wi.s, iv.s, "left")
            if nxt[1] - nxt[0] + 1 >= min_len:
                work.append(WorkInterval(*nxt))
            break
    return list(found.values())


def mid_detect(
    series: MultiSeries,
    cfg: DetectionConfig,
    norm: Norm | None = None,
    zeta: float | None = None,
    trace: list | None = None,
) -> ChangePointReport:
    """Threshold-based detection with a fixed aggregation norm.

    ``zeta`` defaults to the tabulated threshold for the full ``T`` and ``d``.
    If ``trace`` is a list, one ``(work_interval, firing_interval, index)``
    tuple is appended per detection, in detection order.
    """
    norm = Norm(norm) if norm is not None else (cfg.norm.norm or Norm.LINF)
    if zeta is None:
        zeta = threshold(cfg.scenario, norm, cfg.alpha, series.T, series.d, cfg.threshold_constant_override)

    def test(iv: Interval) -> ScanHit | None:
        return scan_interval(series, iv, cfg, zeta, norm)

    points = _isolate_detect(series, cfg.scenario, cfg.lam, test, trace)
    return ChangePointReport(tuple(points), norm, threshold=zeta, config=cfg)


def _contrast_at(w: np.ndarray, local_b: int, scenario: Scenario) -> np.ndarray:
    """Per-component contrast at 1-based local split ``local_b`` of window ``w``."""
    n = w.shape[0]
    off = candidate_offset(scenario)
    if not off <= local_b <= n - 1:
        return np.zeros(w.shape[1])
    return contrast_block(w, scenario)[local_b - off]


def estimate_sparsity(
    series: MultiSeries,
    candidates,
    scenario: Scenario,
    alpha: float = 0.05,
) -> tuple[float, list[tuple[int, ...]]]:
    """Fraction of components affected by the most widespread candidate.

    Each candidate ``r_m`` is tested per component on
    ``[r_{m-1} + 1, r_{m+1}]`` (with ``r_0 = 0`` and ``r_{M+1} = T``) against
    the univariate threshold. Returns the maximal fraction and, per candidate,
    the 1-based components that passed.
    """
    scenario = Scenario(scenario)
    cps = [int(c) for c in candidates]
    if not cps:
        raise EmptyCandidates("sparsity needs at least one candidate")
    if cps != sorted(set(cps)) or cps[0] < 1 or cps[-1] > series.T - 1:
        raise MIDError(f"candidates must be sorted, distinct and within [1, {series.T - 1}]")
    zeta = univariate_threshold(scenario, alpha, series.T)
    bounds = [0] + cps + [series.T]
    best = 0
    affected = []
    for m in range(1, len(bounds) - 1):
        s, b, e = bounds[m - 1] + 1, bounds[m], bounds[m + 1]
        w = series.window(Interval(s, e))
        cs = _contrast_at(w, b - s + 1, scenario)
        hits = np.flatnonzero(cs > zeta)
        affected.append(tuple(int(i) + 1 for i in hits))
        best = max(best, hits.size)
    return best / series.d, affected


def _with_affected(report: ChangePointReport, affected: list[tuple[int, ...]], sparsity: float | None):
    pts = tuple(
        Detection(p.index, p.interval, p.value, p.component, p.threshold, aff)
        for p, aff in zip(report.per_point, affected)
    )
    return ChangePointReport(pts, report.norm_used, report.threshold, sparsity, report.config)


def mid_opt(series: MultiSeries, cfg: DetectionConfig) -> ChangePointReport:
    """Sparsity-adaptive detection.

    Runs the L-infinity detector, estimates the sparsity of what it found and
    switches to L2 when at least 60% of the components take part in some
    change. Between 40% and 60% the L-infinity result is kept.
    """
    ualpha = cfg.univariate_alpha if cfg.univariate_alpha is not None else cfg.alpha
    first = mid_detect(series, cfg, Norm.LINF)
    if not first.changepoints:
        return ChangePointReport((), Norm.LINF, first.threshold, 0.0, cfg)
    sp, affected = estimate_sparsity(series, first.changepoints, cfg.scenario, ualpha)
    n_hit = round(sp * series.d)
    if 5 * n_hit >= 3 * series.d:
        log.debug("estimated sparsity %.3f: switching to L2", sp)
        second = mid_detect(series, cfg, Norm.L2)
        if not second.changepoints:
            return ChangePointReport((), Norm.L2, second.threshold, sp, cfg)
        _, affected2 = estimate_sparsity(series, second.changepoints, cfg.scenario, ualpha)
        return _with_affected(second, affected2, sp)
    return _with_affected(first, affected, sp)


def mid_perm(series: MultiSeries, cfg: DetectionConfig, norm: Norm | None = None) -> ChangePointReport:
    """Permutation-test variant; same interval logic as :func:`mid_detect`."""
    norm = Norm(norm) if norm is not None else _fixed_norm(cfg)
    entropy = cfg.rng_seed if cfg.rng_seed is not None else np.random.SeedSequence().entropy

    def test(iv: Interval) -> ScanHit | None:
        return permutation_scan(series, iv, cfg, entropy, norm)

    points = _isolate_detect(series, cfg.scenario, cfg.lam, test)
    return ChangePointReport(tuple(points), norm, threshold=None, config=cfg)


def detect(series: MultiSeries, cfg: DetectionConfig) -> ChangePointReport:
    """Dispatch on ``cfg.norm``: fixed norm, ``auto`` or permutation."""
    if cfg.norm is NormPolicy.AUTO:
        return mid_opt(series, cfg)
    if cfg.norm.is_permutation:
        return mid_perm(series, cfg)
    return mid_detect(series, cfg)


def iter_scores(series: MultiSeries, scenario: Scenario, norm: Norm, lam: int) -> Iterator[tuple[Interval, float]]:
    """Best aggregated score of every interval in the schedule of ``[1, T]``."""
    for iv in interval_schedule(1, series.T, lam):
        if len(iv) >= scenario.min_length:
            yield iv, _best_split(series.window(iv), scenario, norm)[1]
