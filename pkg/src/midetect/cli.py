"""Command-line interface: ``midetect detect | simulate | calibrate``.

Exit status is 0 on success, 2 when an input file is malformed and 3 when the
flags do not describe a valid configuration.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .calibrate import calibrate_constants
from .core import DetectionConfig, Norm, NormPolicy, Scenario, SUPPORTED_ALPHAS
from .errors import MIDError, NegativeCount
from .evaluation.benchmark import DETECTORS, PRESETS, Cell, run_benchmark
from .evaluation.signals import generate_signal
from .io import (
    InputError,
    format_panel_csv,
    read_panel_csv,
    parse_panel_csv,
    read_sigma_file,
    report_to_csv,
    report_to_json,
    write_atomic,
)
from .pipeline import analyze
from .thresholds import table_rows, write_audit

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3

log = logging.getLogger("midetect")


class ConfigError(Exception):
    """Invalid flag or flag combination."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; here 2 is reserved for bad input files.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _alpha(text: str) -> float:
    try:
        a = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid alpha {text!r}") from None
    if a not in SUPPORTED_ALPHAS:
        raise argparse.ArgumentTypeError(f"alpha must be one of {SUPPORTED_ALPHAS}")
    return a


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _int_list(text: str) -> list[int]:
    """``"1,2,5"`` or ``"1-50"`` or a mix of both."""
    out = []
    try:
        for part in text.split(","):
            if "-" in part.strip()[1:]:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer list {text!r}") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError(f"invalid integer list {text!r}")
    return out


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="midetect", description="Multivariate Isolate-Detect change-point detection.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("detect", help="detect change-points in a CSV panel")
    d.add_argument("input", nargs="?", help="CSV file (rows = time, columns = components); '-' for stdin")
    d.add_argument("--scenario", choices=[s.value for s in Scenario], default="mean")
    d.add_argument("--norm", choices=[n.value for n in NormPolicy], default="auto")
    d.add_argument("--alpha", type=_alpha, default=0.05, help="threshold table level (0.05 or 0.1)")
    d.add_argument("--lambda", dest="lam", type=_positive_int, default=10, help="expansion step")
    d.add_argument("--sigma", choices=["mad", "none", "file"], default="mad", help="noise-scale policy")
    d.add_argument("--sigma-file", help="one positive noise scale per line, used with --sigma file")
    d.add_argument("--anscombe", action="store_true", help="apply 2*sqrt(x+3/8) to count data first")
    d.add_argument("--seed", type=int, help="seed for the permutation variants")
    d.add_argument("--format", choices=["json", "csv"], default="json")
    d.add_argument("--threshold-constant", type=float, help="use this constant instead of the table")
    d.add_argument("--perm-count", type=_positive_int, default=1000, help="permutations per interval")
    d.add_argument("--perm-alpha", type=float, default=0.01, help="level of each permutation test")
    d.add_argument("-o", "--output", help="write the report here instead of stdout")
    d.add_argument(
        "--dump-thresholds",
        action="store_true",
        help="print the embedded threshold constants in audit format and exit",
    )

    s = sub.add_parser("simulate", help="run a simulation grid and write a summary CSV")
    s.add_argument("--preset", choices=sorted(PRESETS))
    s.add_argument("--scenario", choices=[v.value for v in Scenario], default="mean")
    s.add_argument("--T", dest="T", type=int, default=1500)
    s.add_argument("--d", dest="d", type=_int_list, help="dimensions, e.g. '30,100'")
    s.add_argument("--N", dest="N", type=_int_list, help="numbers of change-points")
    s.add_argument("--sp", type=_float_list, help="sparsity levels in (0, 1]")
    s.add_argument("--magnitude", type=_float_list, default=[1.0, 2.0], help="jump range 'lo,hi'")
    s.add_argument("--reps", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--detector", choices=sorted(DETECTORS), default="opt")
    s.add_argument("--alpha", type=_alpha, default=0.05)
    s.add_argument("--lambda", dest="lam", type=_positive_int, default=10)
    s.add_argument("--sigma", choices=["mad", "none"], default="mad")
    s.add_argument("--perm-count", type=_positive_int, default=1000)
    s.add_argument("--perm-alpha", type=float, default=0.01)
    s.add_argument("--timing", action="store_true", help="add a mean runtime column to the CSV")
    s.add_argument("--table", help="also write a plain-text table to this path")
    s.add_argument("--panel-out", help="write the first replication's panel of the first cell as CSV")
    s.add_argument("-o", "--output", help="CSV destination (default stdout)")

    c = sub.add_parser("calibrate", help="estimate threshold constants on null panels")
    c.add_argument("--scenario", choices=[v.value for v in Scenario], default="mean")
    c.add_argument("--norm", choices=[n.value for n in Norm], default="linf")
    c.add_argument("--alpha", type=_alpha, default=0.05)
    c.add_argument("--d", dest="d", type=_int_list, default=[1], help="dimensions, e.g. '1-50'")
    c.add_argument("--T", dest="T", type=_int_list, default=[700, 1400], help="series lengths")
    c.add_argument("--reps", type=int, default=500, help="null panels per (d, T)")
    c.add_argument("--grid", type=_float_list, help="explicit candidate constants")
    c.add_argument("--grid-start", type=float, default=0.3)
    c.add_argument("--grid-stop", type=float, default=3.0)
    c.add_argument("--grid-step", type=float, default=0.05)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--lambda", dest="lam", type=_positive_int, default=10)
    c.add_argument("--sigma", choices=["mad", "none"], default="mad")
    c.add_argument("-o", "--output", help="audit-format destination (default stdout)")
    return p


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        write_atomic(path, text)


def cmd_detect(args) -> int:
    if args.dump_thresholds:
        buf = io.StringIO()
        write_audit(table_rows(), buf)
        _emit(buf.getvalue(), args.output)
        return EXIT_OK
    if args.input is None:
        raise ConfigError("detect needs an input file (or --dump-thresholds)")
    if (args.sigma == "file") != (args.sigma_file is not None):
        raise ConfigError("--sigma-file goes together with --sigma file")
    try:
        cfg = DetectionConfig(
            scenario=args.scenario,
            norm=args.norm,
            alpha=args.alpha,
            lam=args.lam,
            threshold_constant_override=args.threshold_constant,
            permutation_count=args.perm_count,
            permutation_alpha=args.perm_alpha,
            rng_seed=args.seed,
        )
    except MIDError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.norm.is_permutation and args.threshold_constant is not None:
        raise ConfigError("--threshold-constant has no effect with a permutation norm")

    if args.input == "-":
        series, _ = parse_panel_csv(sys.stdin.read())
    else:
        series, _ = read_panel_csv(args.input)
    sigma = args.sigma
    if sigma == "file":
        sigma = read_sigma_file(args.sigma_file)
    try:
        report = analyze(series, cfg, sigma=sigma, use_anscombe=args.anscombe)
    except NegativeCount as exc:
        raise ConfigError(f"--anscombe needs nonnegative counts: {exc}") from exc
    except MIDError as exc:
        raise ConfigError(str(exc)) from exc

    if args.format == "json":
        echo = {"sigma": args.sigma, "anscombe": args.anscombe, "T": series.T, "d": series.d}
        text = report_to_json(report, echo)
    else:
        text = report_to_csv(report)
    _emit(text, args.output)
    return EXIT_OK


def _cells(args) -> list[Cell]:
    if args.preset is not None:
        custom = [f for f in ("d", "N", "sp") if getattr(args, f) is not None]
        if custom:
            raise ConfigError(f"--preset cannot be combined with --{custom[0]}")
        return list(PRESETS[args.preset])
    if args.d is None or args.N is None or args.sp is None:
        raise ConfigError("give --preset, or all of --d, --N and --sp")
    if len(args.magnitude) != 2:
        raise ConfigError("--magnitude takes 'lo,hi'")
    try:
        return [
            Cell(args.scenario, args.T, d, N, sp, tuple(args.magnitude))
            for N in args.N
            for sp in args.sp
            for d in args.d
        ]
    except MIDError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_simulate(args) -> int:
    if args.reps < 1:
        raise ConfigError("--reps must be >= 1")
    cells = _cells(args)

    def progress(res):
        log.info("%s N=%d sp=%g d=%d: exact %.2f", res.cell.scenario.value, res.cell.N,
                 res.cell.sparsity, res.cell.d, res.fraction_exact())

    try:
        report = run_benchmark(
            cells, args.detector, args.reps, args.seed, args.lam, args.alpha, args.sigma,
            progress=progress, permutation_count=args.perm_count, permutation_alpha=args.perm_alpha,
        )
    except MIDError as exc:
        raise ConfigError(str(exc)) from exc
    if args.panel_out is not None:
        # Same stream as replication 0 of cell 0 inside run_cell.
        data_seq, _ = np.random.SeedSequence(args.seed, spawn_key=(0, 0)).spawn(2)
        series, truth = generate_signal(cells[0].spec(), np.random.default_rng(data_seq))
        write_atomic(args.panel_out, format_panel_csv(series))
        write_atomic(args.panel_out + ".truth.json",
                     json.dumps({"changepoints": list(truth.changepoints),
                                 "affected": [list(a) for a in truth.affected]}) + "\n")
    if args.table is not None:
        write_atomic(args.table, report.to_table())
    _emit(report.to_csv(include_runtime=args.timing), args.output)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    if args.reps < 1:
        raise ConfigError("--reps must be >= 1")
    if args.grid is not None:
        grid = np.asarray(args.grid)
    else:
        if not (0 < args.grid_start <= args.grid_stop and args.grid_step > 0):
            raise ConfigError("grid needs 0 < start <= stop and a positive step")
        grid = np.round(np.arange(args.grid_start, args.grid_stop + args.grid_step / 2, args.grid_step), 10)
    if min(args.T) < 4:
        raise ConfigError("--T values must be at least 4")
    try:
        result = calibrate_constants(
            Scenario(args.scenario), Norm(args.norm), args.alpha, tuple(args.T), tuple(args.d),
            args.reps, grid, args.seed, args.lam, args.sigma,
        )
    except MIDError as exc:
        raise ConfigError(str(exc)) from exc
    if args.reps < 100:
        log.warning("only %d replications per length; the constants are rough", args.reps)
    buf = io.StringIO()
    rows = [(Scenario(args.scenario), Norm(args.norm), args.alpha, d, c) for d, c in result.constants.items()]
    write_audit(rows, buf)
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


COMMANDS = {"detect": cmd_detect, "simulate": cmd_simulate, "calibrate": cmd_calibrate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"midetect: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConfigError as exc:
        print(f"midetect: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MIDError as exc:
        print(f"midetect: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
