"""Replication engine for simulation tables.

A benchmark is a list of cells (scenario, T, d, N, sparsity). Every
replication draws a panel, runs the full detection pipeline and scores the
result against the truth. Each (cell, replication) pair gets its own random
stream derived from the master seed, so results do not depend on the order in
which cells are run.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..core import DetectionConfig, NormPolicy, Scenario
from ..errors import MIDError
from ..pipeline import analyze
from .metrics import adjusted_rand_index, hausdorff_scaled
from .signals import SignalSpec, evenly_spaced, generate_signal


@dataclass(frozen=True)
class Bucket:
    label: str
    lo: float
    hi: float

    def __contains__(self, x: int) -> bool:
        return self.lo <= x <= self.hi


INF = float("inf")

SMALL_BUCKETS = (
    Bucket("<=-2", -INF, -2),
    Bucket("-1", -1, -1),
    Bucket("0", 0, 0),
    Bucket("1", 1, 1),
    Bucket("2", 2, 2),
    Bucket(">=3", 3, INF),
)
N20_BUCKETS = (
    Bucket("<=-10", -INF, -10),
    Bucket("(-10,-2)", -9, -3),
    Bucket("[-2,2]", -2, 2),
    Bucket("(2,10]", 3, 10),
    Bucket(">10", 11, INF),
)
N50_BUCKETS = (
    Bucket("<=-40", -INF, -40),
    Bucket("(-40,-20)", -39, -21),
    Bucket("[-20,-10)", -20, -11),
    Bucket("[-10,10]", -10, 10),
    Bucket(">10", 11, INF),
)


def buckets_for(scenario: Scenario, N: int) -> tuple[Bucket, ...]:
    """Column layout of the error-count histogram for a cell."""
    if Scenario(scenario) is Scenario.PIECEWISE_CONSTANT:
        if N == 20:
            return N20_BUCKETS
        if N == 50:
            return N50_BUCKETS
    return SMALL_BUCKETS


@dataclass(frozen=True)
class Cell:
    scenario: Scenario
    T: int
    d: int
    N: int
    sparsity: float
    magnitude_range: tuple[float, float] = (1.0, 2.0)
    noise_sd: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        if self.T < 4 or self.d < 1 or self.N < 0 or self.N > self.T - 1:
            raise MIDError(f"invalid cell {self}")
        if not 0 < self.sparsity <= 1:
            raise MIDError("sparsity must lie in (0, 1]")

    def spec(self) -> SignalSpec:
        return SignalSpec(
            self.T,
            self.d,
            self.scenario,
            evenly_spaced(self.T, self.N),
            self.sparsity,
            self.magnitude_range,
            self.noise_sd,
        )


PRESETS: dict[str, list[Cell]] = {
    "paper-s1": [
        Cell(Scenario.PIECEWISE_CONSTANT, 1500, d, N, sp)
        for N in (3, 20, 50)
        for sp in (0.2, 0.5, 0.8)
        for d in (30, 100)
    ],
    "paper-s2": [
        Cell(Scenario.PIECEWISE_LINEAR, 1500, d, N, sp)
        for N in (3, 20, 50)
        for d in (10, 30, 100)
        for sp in (0.2, 0.5, 0.8)
    ],
}


@dataclass(frozen=True)
class Replication:
    n_error: int
    ari: float
    d_h: float
    runtime: float
    changepoints: tuple[int, ...] = ()


@dataclass
class CellResult:
    cell: Cell
    detector: str
    replications: list[Replication] = field(default_factory=list)

    @property
    def buckets(self) -> tuple[Bucket, ...]:
        return buckets_for(self.cell.scenario, self.cell.N)

    def frequencies(self) -> dict[str, int]:
        errors = [r.n_error for r in self.replications]
        return {b.label: sum(e in b for e in errors) for b in self.buckets}

    def fraction_exact(self) -> float:
        return float(np.mean([r.n_error == 0 for r in self.replications]))

    def fraction_within(self, k: int) -> float:
        return float(np.mean([abs(r.n_error) <= k for r in self.replications]))

    @property
    def mean_ari(self) -> float:
        return float(np.mean([r.ari for r in self.replications]))

    @property
    def mean_dh(self) -> float:
        return float(np.mean([r.d_h for r in self.replications]))

    @property
    def mean_runtime(self) -> float:
        return float(np.mean([r.runtime for r in self.replications]))


@dataclass
class BenchmarkReport:
    cells: list[CellResult]

    def bucket_labels(self) -> list[str]:
        labels = []
        for res in self.cells:
            for b in res.buckets:
                if b.label not in labels:
                    labels.append(b.label)
        return labels

    def to_csv(self, include_runtime: bool = True) -> str:
        """One row per cell. Histogram columns a cell does not use are left empty."""
        labels = self.bucket_labels()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = ["scenario", "T", "d", "N", "sp", "detector", "reps", *labels, "ari", "d_h"]
        if include_runtime:
            head.append("time_s")
        w.writerow(head)
        for res in self.cells:
            freq = res.frequencies()
            c = res.cell
            row = [c.scenario.value, c.T, c.d, c.N, c.sparsity, res.detector, len(res.replications)]
            row += [freq.get(lab, "") for lab in labels]
            row += [f"{res.mean_ari:.4f}", f"{res.mean_dh:.4f}"]
            if include_runtime:
                row.append(f"{res.mean_runtime:.3f}")
            w.writerow(row)
        return buf.getvalue()

    def to_table(self) -> str:
        """Plain-text rendering grouped by histogram layout."""
        out = []
        groups: dict[tuple[str, ...], list[CellResult]] = {}
        for res in self.cells:
            groups.setdefault(tuple(b.label for b in res.buckets), []).append(res)
        for labels, rows in groups.items():
            head = ["Method", "N", "sp", "d", *labels, "ARI", "d_H", "Time (s)"]
            lines = [head]
            for res in rows:
                freq = res.frequencies()
                lines.append(
                    [res.detector, str(res.cell.N), f"{res.cell.sparsity:g}", str(res.cell.d)]
                    + [str(freq[lab]) for lab in labels]
                    + [f"{res.mean_ari:.3f}", f"{res.mean_dh:.3f}", f"{res.mean_runtime:.2f}"]
                )
            widths = [max(len(r[i]) for r in lines) for i in range(len(head))]
            for r in lines:
                out.append("  ".join(v.rjust(wd) for v, wd in zip(r, widths)))
            out.append("")
        return "\n".join(out)


DETECTORS = {
    "opt": NormPolicy.AUTO,
    "l2": NormPolicy.L2,
    "linf": NormPolicy.LINF,
    "perm-l2": NormPolicy.PERM_L2,
    "perm-linf": NormPolicy.PERM_LINF,
}


def run_cell(
    cell: Cell,
    cfg: DetectionConfig,
    reps: int,
    entropy: int,
    cell_key: int,
    sigma="mad",
    label: str | None = None,
) -> CellResult:
    res = CellResult(cell, label or cfg.norm.value)
    spec = cell.spec()
    for rep in range(reps):
        seq = np.random.SeedSequence(entropy, spawn_key=(cell_key, rep))
        data_seq, perm_seq = seq.spawn(2)
        series, truth = generate_signal(spec, np.random.default_rng(data_seq))
        run_cfg = cfg
        if cfg.norm.is_permutation:
            run_cfg = DetectionConfig(**{**cfg.__dict__, "rng_seed": int(perm_seq.generate_state(1, np.uint64)[0])})
        t0 = time.perf_counter()
        report = analyze(series, run_cfg, sigma=sigma)
        elapsed = time.perf_counter() - t0
        est = report.changepoints
        res.replications.append(
            Replication(
                len(est) - cell.N,
                adjusted_rand_index(truth.changepoints, est, cell.T),
                hausdorff_scaled(truth.changepoints, est, cell.T) if cell.N else float("nan"),
                elapsed,
                tuple(est),
            )
        )
    return res


def run_benchmark(
    cells: Sequence[Cell],
    detector: str = "opt",
    reps: int = 100,
    rng_seed: int | None = 0,
    lam: int = 10,
    alpha: float = 0.05,
    sigma="mad",
    progress: Callable[[CellResult], None] | None = None,
    **cfg_kwargs,
) -> BenchmarkReport:
    """Run every cell ``reps`` times with the chosen detector.

    ``detector`` is one of ``opt``, ``l2``, ``linf``, ``perm-l2``,
    ``perm-linf``. Extra keyword arguments go to :class:`DetectionConfig`.
    """
    if reps < 1:
        raise MIDError("reps must be >= 1")
    if detector not in DETECTORS:
        raise MIDError(f"unknown detector {detector!r}; choose from {sorted(DETECTORS)}")
    entropy = rng_seed if rng_seed is not None else np.random.SeedSequence().entropy
    results = []
    for key, cell in enumerate(cells):
        cfg = DetectionConfig(scenario=cell.scenario, norm=DETECTORS[detector], alpha=alpha, lam=lam, **cfg_kwargs)
        res = run_cell(cell, cfg, reps, entropy, key, sigma, detector)
        if progress is not None:
            progress(res)
        results.append(res)
    return BenchmarkReport(results)
