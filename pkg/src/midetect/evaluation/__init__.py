"""Synthetic signals, segmentation metrics and the simulation harness."""

from .benchmark import PRESETS, BenchmarkReport, Cell, CellResult, run_benchmark
from .metrics import adjusted_rand_index, hausdorff_scaled, segment_labels
from .signals import SignalSpec, Truth, evenly_spaced, generate_signal

__all__ = [
    "PRESETS",
    "BenchmarkReport",
    "Cell",
    "CellResult",
    "SignalSpec",
    "Truth",
    "adjusted_rand_index",
    "evenly_spaced",
    "generate_signal",
    "hausdorff_scaled",
    "run_benchmark",
    "segment_labels",
]
