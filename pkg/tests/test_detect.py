import math

import numpy as np
import pytest

from midetect.core import DetectionConfig, Interval, MultiSeries, Norm, Scenario
from midetect.detect import (
    WorkInterval,
    detect,
    estimate_sparsity,
    interval_schedule,
    mid_detect,
    mid_opt,
    mid_perm,
    permutation_scan,
    scan_interval,
)
from midetect.errors import EmptyCandidates, EmptyRange
from midetect.thresholds import threshold

S1, S2 = Scenario.PIECEWISE_CONSTANT, Scenario.PIECEWISE_LINEAR
LINF = DetectionConfig(norm="linf")


def bounds(ivs):
    return [(iv.s, iv.e) for iv in ivs]


# -- schedule --------------------------------------------------------------


def test_schedule_full_range():
    sch = interval_schedule(1, 200, 10)
    assert bounds(sch[:4]) == [(1, 10), (191, 200), (1, 20), (181, 200)]
    assert len(sch) == 40
    assert bounds(sch[-2:]) == [(1, 200), (1, 200)]
    assert (sch[4].s, sch[4].e, sch[4].side) == (1, 30, "right")


def test_schedule_shifted_origin():
    sch = interval_schedule(30, 200, 10)
    assert bounds(sch[:2]) == [(30, 39), (191, 200)]


@pytest.mark.parametrize("lam", [171, 500])
def test_schedule_single_step(lam):
    assert bounds(interval_schedule(30, 200, lam)) == [(30, 200), (30, 200)]


def test_schedule_empty():
    with pytest.raises(EmptyRange):
        interval_schedule(5, 5, 10)
    with pytest.raises(EmptyRange):
        WorkInterval(7, 7)


# -- single interval -------------------------------------------------------


def test_scan_example_interval(mean_example):
    hit = scan_interval(mean_example, Interval(1, 30), LINF, zeta=1.0)
    assert hit.b == 27 and hit.q == 1
    assert hit.value == pytest.approx(6 * math.sqrt(27 * 3 / 30))


def test_scan_below_threshold(mean_example):
    hit = scan_interval(mean_example, Interval(1, 30), LINF, zeta=1.0)
    assert scan_interval(mean_example, Interval(1, 30), LINF, zeta=hit.value) is None


def test_scan_zero_panel():
    z = MultiSeries(np.zeros((50, 4)))
    for zeta in (1e-12, 1.0):
        assert scan_interval(z, Interval(1, 50), LINF, zeta) is None


def test_scan_tie_smallest_index():
    # Symmetric bump: equal CUSUM magnitudes at b = 3 and b = 7.
    x = np.array([0, 0, 0, 1, 1, 1, 1, 0, 0, 0], dtype=float)
    hit = scan_interval(MultiSeries(x), Interval(1, 10), LINF, zeta=0.1)
    assert hit.b == 3


# -- full runs -------------------------------------------------------------


def test_mean_example_exact_and_phases(mean_example):
    trace = []
    rep = mid_detect(mean_example, LINF, trace=trace)
    assert rep.changepoints == [27, 73, 165]
    phases = [((w.s, w.e), (iv.s, iv.e), b) for w, iv, b in trace]
    assert phases == [((1, 200), (1, 30), 27), ((30, 200), (161, 200), 165), ((30, 161), (30, 79), 73)]


def test_linear_example_exact(linear_example):
    cfg = DetectionConfig(scenario="linear", norm="linf")
    assert mid_detect(linear_example, cfg).changepoints == [53, 100, 124]


def test_infinite_threshold_empty(mean_example):
    assert mid_detect(mean_example, LINF, zeta=math.inf).changepoints == []


def test_output_sanity_noisy():
    rng = np.random.default_rng(11)
    x = rng.standard_normal((400, 6))
    x[120:, :3] += 1.5
    x[260:, 2:] -= 2.0
    for scenario in (S1, S2):
        cfg = DetectionConfig(scenario=scenario, norm="l2")
        rep = mid_detect(MultiSeries(x), cfg)
        cps = rep.changepoints
        lo = 1 if scenario is S1 else 2
        assert all(lo <= c <= 399 for c in cps)
        assert cps == sorted(set(cps))
        assert all(p.value > rep.threshold for p in rep.per_point)


def test_raising_threshold_never_adds_first_interval_detections():
    rng = np.random.default_rng(5)
    x = MultiSeries(rng.standard_normal((300, 3)) + np.repeat([[0.0], [0.8], [0.0]], 100, axis=0))
    counts = []
    for zeta in np.linspace(1.0, 6.0, 11):
        trace = []
        mid_detect(x, LINF, zeta=zeta, trace=trace)
        counts.append(sum(1 for w, _, _ in trace if (w.s, w.e) == (1, 300)))
    assert all(a >= b for a, b in zip(counts, counts[1:]))


def test_common_shift_changes_nothing():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((300, 4))
    x[150:, 1] += 2.0
    a = mid_detect(MultiSeries(x), LINF)
    b = mid_detect(MultiSeries(x + 1234.5), LINF)
    assert a.changepoints == b.changepoints


def _panel(T, d, cps, jumps, comps):
    f = np.zeros((T, d))
    for r, j, q in zip(cps, jumps, comps):
        f[r:, q] += j
    return MultiSeries(f)


def test_isolation_safety_randomized():
    lam = 10
    rng = np.random.default_rng(2024)
    for _ in range(150):
        T = int(rng.integers(6 * lam, 401))
        d = int(rng.integers(1, 6))
        cps, t = [], int(rng.integers(3 * lam, 4 * lam))
        while t <= T - 3 * lam:
            cps.append(t)
            t += int(rng.integers(3 * lam, 12 * lam))
        jumps = rng.uniform(2, 4, len(cps)) * rng.choice([-1, 1], len(cps))
        comps = rng.integers(0, d, len(cps))
        assert mid_detect(_panel(T, d, cps, jumps, comps), LINF).changepoints == cps


def test_unit_jump_on_schedule_boundary_is_missed():
    # 30 fires in [1, 60]; the restart on [60, 90] has 60 as its first point,
    # where a one-point left segment leaves the CUSUM below threshold.
    rep = mid_detect(_panel(90, 1, [30, 60], [1.0, 1.0], [0, 0]), LINF)
    assert rep.changepoints == [30]
    assert rep.per_point[0].interval == Interval(1, 60)


def test_null_false_alarms_low():
    empty = 0
    for seed in range(50):
        x = MultiSeries(np.random.default_rng(seed).standard_normal((700, 10)))
        empty += not mid_detect(x, LINF).changepoints
    assert empty >= 45


# -- sparsity and MID_opt ------------------------------------------------


def test_sparsity_dense():
    x = _panel(200, 4, [100] * 4, [10.0] * 4, range(4))
    sp, aff = estimate_sparsity(x, [100], S1)
    assert sp == 1.0 and aff == [(1, 2, 3, 4)]


def test_sparsity_single_component():
    x = _panel(200, 10, [100], [10.0], [0])
    sp, aff = estimate_sparsity(x, [100], S1)
    assert sp == pytest.approx(0.1) and aff == [(1,)]


def test_sparsity_zero_signal():
    sp, aff = estimate_sparsity(MultiSeries(np.zeros((100, 3))), [40], S1)
    assert sp == 0.0 and aff == [()]


def test_sparsity_needs_candidates():
    with pytest.raises(EmptyCandidates):
        estimate_sparsity(MultiSeries(np.zeros((10, 2))), [], S1)


def test_opt_dense_switches_to_l2():
    x = _panel(300, 5, [150] * 5, [3.0] * 5, range(5))
    rep = mid_opt(x, DetectionConfig())
    assert rep.norm_used is Norm.L2 and rep.sparsity_estimate == 1.0
    assert rep.changepoints == [150]


def test_opt_sparse_keeps_linf():
    x = _panel(300, 30, [150], [3.0], [4])
    rep = mid_opt(x, DetectionConfig())
    assert rep.norm_used is Norm.LINF
    assert rep.sparsity_estimate == pytest.approx(1 / 30)
    assert rep.per_point[0].affected == (5,)


def test_opt_nothing_found():
    rep = mid_opt(MultiSeries(np.zeros((100, 3))), DetectionConfig())
    assert rep.changepoints == [] and rep.norm_used is Norm.LINF


def test_opt_examples(mean_example, linear_example):
    assert detect(mean_example, DetectionConfig()).changepoints == [27, 73, 165]
    assert detect(linear_example, DetectionConfig(scenario="linear")).changepoints == [53, 100, 124]


# -- permutation variant -------------------------------------------------


def test_perm_huge_jump_any_seed():
    x = np.zeros((100, 3))
    x[50:] = 100.0
    x += np.random.default_rng(0).standard_normal(x.shape)
    cfg = DetectionConfig(norm="perm-linf", permutation_count=200)
    for seed in range(5):
        hit = permutation_scan(MultiSeries(x), Interval(1, 100), cfg, entropy=seed)
        assert hit is not None and hit.b == 50


def test_perm_interval_level():
    # Per-interval rejection rate under exchangeable noise is about alpha.
    cfg = DetectionConfig(norm="perm-linf", permutation_count=1000, permutation_alpha=0.01)
    rng = np.random.default_rng(99)
    hits = sum(
        permutation_scan(MultiSeries(rng.standard_normal((50, 3))), Interval(1, 50), cfg, entropy=k) is not None
        for k in range(500)
    )
    assert hits / 500 <= 0.03


def test_perm_deterministic():
    x = MultiSeries(np.random.default_rng(4).standard_normal((200, 3)) + np.repeat([[0.0], [1.5]], 100, axis=0))
    cfg = DetectionConfig(norm="perm-linf", rng_seed=7, permutation_count=300)
    a, b = mid_perm(x, cfg), mid_perm(x, cfg)
    assert a == b and a.to_dict() == b.to_dict()


def test_perm_noiseless_example(mean_example):
    cfg = DetectionConfig(norm="perm-linf", rng_seed=1)
    assert mid_perm(mean_example, cfg).changepoints == [27, 73, 165]


def test_perm_constant_panel_empty():
    cfg = DetectionConfig(norm="perm-l2", rng_seed=1, permutation_count=50)
    assert mid_perm(MultiSeries(np.ones((60, 2))), cfg).changepoints == []


@pytest.mark.slow
@pytest.mark.xfail(
    strict=True,
    reason="the per-interval level does not bound the chance that any of the ~60 tested intervals fires",
)
def test_perm_null_runs_mostly_empty():
    empty = 0
    seeds = range(20)
    for seed in seeds:
        x = MultiSeries(np.random.default_rng(1000 + seed).standard_normal((300, 5)))
        cfg = DetectionConfig(norm="perm-linf", rng_seed=seed, permutation_count=1000, permutation_alpha=0.01)
        empty += not mid_perm(x, cfg).changepoints
    assert empty / len(seeds) >= 0.95
