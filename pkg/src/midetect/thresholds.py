"""Default threshold constants and the threshold rate.

The detection threshold is ``C * sqrt(log(T * d**0.25))``. ``C`` depends on the
scenario, the aggregation norm, the target Type-I error and the dimension; the
defaults below were obtained by simulation on null panels for ``d = 1..50``.
Dimensions above 50 reuse the ``d = 50`` constant.
"""

from __future__ import annotations

import math
from typing import Iterable, TextIO

from .core import Norm, Scenario, check_alpha
from .errors import MIDError

MAX_TABULATED_D = 50

# (first d, last d, C at alpha=0.05, C at alpha=0.10)
_ROWS = {
    (Scenario.PIECEWISE_CONSTANT, Norm.L2): [
        (1, 1, 1.7, 1.55),
        (2, 2, 1.25, 1.25),
        (3, 3, 1.1, 1.05),
        (4, 4, 1.05, 0.95),
        (5, 5, 0.95, 0.9),
        (6, 6, 0.9, 0.9),
        (7, 7, 0.9, 0.8),
        (8, 8, 0.8, 0.8),
        (9, 9, 0.8, 0.75),
        (10, 13, 0.75, 0.75),
        (14, 14, 0.75, 0.65),
        (15, 20, 0.7, 0.65),
        (21, 23, 0.65, 0.6),
        (24, 39, 0.6, 0.6),
        (40, 50, 0.6, 0.55),
    ],
    (Scenario.PIECEWISE_CONSTANT, Norm.LINF): [
        (1, 1, 1.7, 1.55),
        (2, 3, 1.75, 1.7),
        (4, 6, 1.8, 1.7),
        (7, 13, 1.85, 1.75),
        (14, 25, 1.9, 1.8),
        (26, 28, 1.9, 1.85),
        (29, 50, 1.95, 1.85),
    ],
    (Scenario.PIECEWISE_LINEAR, Norm.L2): [
        (1, 1, 1.65, 1.55),
        (2, 2, 1.25, 1.2),
        (3, 3, 1.05, 1.05),
        (4, 4, 0.95, 0.95),
        (5, 5, 0.9, 0.9),
        (6, 6, 0.9, 0.85),
        (7, 7, 0.8, 0.8),
        (8, 8, 0.8, 0.75),
        (9, 11, 0.75, 0.75),
        (12, 16, 0.7, 0.7),
        (17, 19, 0.65, 0.6),
        (20, 22, 0.6, 0.6),
        # d = 23 is not covered by the published ranges; it takes the next row.
        (23, 42, 0.6, 0.55),
        (43, 50, 0.55, 0.55),
    ],
    (Scenario.PIECEWISE_LINEAR, Norm.LINF): [
        (1, 1, 1.65, 1.55),
        (2, 2, 1.7, 1.6),
        (3, 3, 1.75, 1.6),
        (4, 5, 1.75, 1.65),
        (6, 13, 1.75, 1.7),
        (14, 25, 1.8, 1.75),
        (26, 38, 1.85, 1.8),
        (39, 50, 1.9, 1.85),
    ],
}


def _expand() -> dict[tuple[Scenario, Norm, float, int], float]:
    table = {}
    for (scenario, norm), rows in _ROWS.items():
        for lo, hi, c05, c10 in rows:
            for d in range(lo, hi + 1):
                table[(scenario, norm, 0.05, d)] = c05
                table[(scenario, norm, 0.10, d)] = c10
    return table


THRESHOLD_TABLE: dict[tuple[Scenario, Norm, float, int], float] = _expand()


def threshold_constant(scenario: Scenario, norm: Norm, alpha: float, d: int) -> float:
    """Tabulated constant; ``d > 50`` falls back to ``d = 50``."""
    if d < 1:
        raise MIDError(f"dimension must be >= 1, got {d}")
    alpha = check_alpha(alpha)
    return THRESHOLD_TABLE[(Scenario(scenario), Norm(norm), alpha, min(d, MAX_TABULATED_D))]


def threshold_rate(T: int, d: int) -> float:
    """``sqrt(log(T * d**(1/4)))``."""
    if T < 2 or d < 1:
        raise MIDError(f"need T >= 2 and d >= 1, got T={T}, d={d}")
    return math.sqrt(math.log(T * d**0.25))


def threshold(
    scenario: Scenario,
    norm: Norm,
    alpha: float,
    T: int,
    d: int,
    override: float | None = None,
) -> float:
    """Detection threshold ``C * sqrt(log(T d^{1/4}))``.

    ``override`` replaces the tabulated constant ``C``.
    """
    rate = threshold_rate(T, d)
    if override is not None:
        if not override > 0:
            raise MIDError("threshold constant must be positive")
        return override * rate
    return threshold_constant(scenario, norm, alpha, d) * rate


def univariate_threshold(scenario: Scenario, alpha: float, T: int) -> float:
    """Per-component threshold ``C_1 * sqrt(log T)`` used by the sparsity step."""
    c = threshold_constant(scenario, Norm.LINF, alpha, 1)
    return c * math.sqrt(math.log(T))


AUDIT_HEADER = "# scenario\tnorm\talpha\td\tC"


def format_audit_line(scenario: Scenario, norm: Norm, alpha: float, d: int, c: float) -> str:
    return f"{Scenario(scenario).value}\t{Norm(norm).value}\t{alpha:.2f}\t{d}\t{c:g}"


def write_audit(rows: Iterable[tuple[Scenario, Norm, float, int, float]], fh: TextIO) -> None:
    """Write constants in the plain-text audit format, one line per entry."""
    fh.write(AUDIT_HEADER + "\n")
    for row in rows:
        fh.write(format_audit_line(*row) + "\n")


def table_rows() -> list[tuple[Scenario, Norm, float, int, float]]:
    return [(sc, nm, a, d, c) for (sc, nm, a, d), c in sorted(
        THRESHOLD_TABLE.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value, kv[0][2], kv[0][3])
    )]


def read_audit(fh: TextIO) -> list[tuple[Scenario, Norm, float, int, float]]:
    rows = []
    for line in fh:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        sc, nm, a, d, c = line.split("\t")
        rows.append((Scenario(sc), Norm(nm), float(a), int(d), float(c)))
    return rows
