"""File formats: panel CSV, noise-scale files, reports."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import ChangePointReport, MultiSeries, validate_series
from .errors import MIDError, NonFiniteEntry


class InputError(MIDError):
    """Malformed input file; ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def parse_panel_csv(text: str) -> tuple[MultiSeries, list[str] | None]:
    """Parse a comma-separated panel: rows are time points, columns components.

    A first row containing any non-numeric cell is taken as a header.
    """
    rows = [r for r in csv.reader(io.StringIO(text))]
    numbered = [(i + 1, r) for i, r in enumerate(rows) if any(c.strip() for c in r)]
    if not numbered:
        raise InputError("no data rows")
    header = None
    if not all(_is_number(c.strip()) for c in numbered[0][1]):
        header = [c.strip() for c in numbered[0][1]]
        numbered = numbered[1:]
    if not numbered:
        raise InputError("header present but no data rows")
    width = len(header) if header is not None else len(numbered[0][1])
    data = np.empty((len(numbered), width))
    for k, (line, row) in enumerate(numbered):
        if len(row) != width:
            raise InputError(f"expected {width} columns, found {len(row)}", line)
        for j, cell in enumerate(row):
            try:
                data[k, j] = float(cell.strip())
            except ValueError:
                raise InputError(f"non-numeric value {cell!r}", line, j + 1) from None
            if not math.isfinite(data[k, j]):
                raise InputError(f"non-finite value {cell!r}", line, j + 1)
    try:
        series = validate_series(data)
    except NonFiniteEntry as exc:  # pragma: no cover - caught above
        raise InputError(str(exc)) from exc
    return series, header


def read_panel_csv(path) -> tuple[MultiSeries, list[str] | None]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_panel_csv(text)


def format_panel_csv(series: MultiSeries, header: list[str] | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header is not None:
        w.writerow(header)
    for row in series.values:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def read_sigma_file(path, d: int | None = None) -> np.ndarray:
    """One positive decimal per line; blank lines are ignored."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    values = []
    for i, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            v = float(line)
        except ValueError:
            raise InputError(f"non-numeric noise scale {line.strip()!r}", i) from None
        if not (v > 0 and math.isfinite(v)):
            raise InputError(f"noise scale must be positive, got {line.strip()}", i)
        values.append(v)
    if d is not None and len(values) != d:
        raise MIDError(f"sigma file has {len(values)} entries but the panel has {d} components")
    return np.asarray(values)


def report_to_json(report: ChangePointReport, extra_echo: dict | None = None) -> str:
    payload = report.to_dict()
    if extra_echo:
        payload["config_echo"] = {**(payload["config_echo"] or {}), **extra_echo}
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


REPORT_CSV_HEADER = ["index", "start", "end", "value", "component", "threshold", "affected"]


def report_to_csv(report: ChangePointReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_CSV_HEADER)
    for p in report.per_point:
        w.writerow(
            [p.index, p.interval.s, p.interval.e, repr(p.value), p.component, repr(p.threshold),
             ";".join(str(a) for a in p.affected)]
        )
    return buf.getvalue()


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def report_schema() -> dict:
    return json.loads((Path(__file__).parent / "schemas" / "report.schema.json").read_text())
