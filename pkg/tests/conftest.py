import numpy as np
import pytest

from midetect import MultiSeries


def example_mean_signal() -> np.ndarray:
    """Noiseless 3-d panel, T=200, mean changes at 27, 73, 165."""
    t = np.arange(1, 201)
    f1 = np.where(t <= 27, 0.0, np.where(t <= 165, 6.0, 0.0))
    f2 = np.where(t <= 73, 0.0, np.where(t <= 165, -6.0, 0.0))
    return np.column_stack([f1, f2, np.zeros(200)])


def example_linear_signal() -> np.ndarray:
    """Noiseless 3-d panel, T=200, slope changes at 53, 100, 124."""
    t = np.arange(1, 201, dtype=float)
    f1 = np.where(t <= 53, -t + 1, np.where(t <= 124, 2 * t - 158, -t + 214))
    f2 = np.where(t <= 100, -t + 1, np.where(t <= 124, 2 * t - 299, -t + 73))
    return np.column_stack([f1, f2, t])


@pytest.fixture
def mean_example():
    return MultiSeries(example_mean_signal())


@pytest.fixture
def linear_example():
    return MultiSeries(example_linear_signal())


# Acceptance verdicts, filled in by test_acceptance.py and echoed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
