import numpy as np
import pytest

from midetect.calibrate import calibrate_constants, critical_constant, null_panel, select_constant
from midetect.core import DetectionConfig, Norm, Scenario
from midetect.detect import mid_detect
from midetect.errors import MIDError
from midetect.thresholds import threshold_rate

S1 = Scenario.PIECEWISE_CONSTANT


def test_sole_candidate():
    res = calibrate_constants(S1, Norm.LINF, 0.05, T_values=(100,), reps=5, candidate_grid=[1000.0])
    assert res.constants == {1: 1000.0}


def test_huge_constant_leaves_all_runs_empty():
    res = calibrate_constants(S1, Norm.L2, 0.05, T_values=(200,), reps=500, candidate_grid=[1.0, 1e6])
    assert res.empty_counts[1][-1] == 500


def test_shortcut_matches_direct_runs():
    # Empty iff the constant is at or above the critical value.
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = null_panel(150, 3, rng)
        for norm in Norm:
            c = critical_constant(x, S1, norm)
            cfg = DetectionConfig(norm=norm.value)
            rate = threshold_rate(150, 3)
            assert mid_detect(x, cfg, zeta=c * rate * (1 + 1e-9)).changepoints == []
            assert mid_detect(x, cfg, zeta=c * rate * (1 - 1e-9)).changepoints != []


def test_select_constant_nearest_count():
    crit = np.arange(1, 101) / 100.0  # run k is empty for C >= k/100
    grid = np.array([0.5, 0.9, 0.94, 0.95, 0.96, 1.0])
    c, counts = select_constant(crit, grid, 0.05)
    assert c == 0.95
    np.testing.assert_array_equal(counts, [50, 90, 94, 95, 96, 100])


def test_select_constant_tie_prefers_more_empty_runs():
    crit = np.array([0.1] * 9 + [5.0])
    c, _ = select_constant(crit, np.array([0.05, 0.2, 10.0]), 0.05)
    # Counts 0, 9, 10 against a target of 9.5: the tie goes to 10.
    assert c == 10.0


def test_select_constant_saturated_grid_smallest():
    crit = np.array([0.1, 0.2, 0.3])
    c, _ = select_constant(crit, np.array([0.5, 1.0, 2.0]), 0.05)
    assert c == 0.5


def test_deterministic():
    kw = dict(T_values=(120,), d_range=(1, 3), reps=10, rng_seed=4)
    a = calibrate_constants(S1, Norm.L2, 0.05, **kw)
    b = calibrate_constants(S1, Norm.L2, 0.05, **kw)
    assert a.constants == b.constants


@pytest.mark.parametrize("grid", [[], [1.0, 0.5], [-1.0, 2.0]])
def test_bad_grid(grid):
    with pytest.raises(MIDError):
        calibrate_constants(S1, Norm.L2, 0.05, T_values=(50,), reps=2, candidate_grid=grid)


def test_zero_reps():
    with pytest.raises(MIDError):
        calibrate_constants(S1, Norm.L2, 0.05, reps=0)
