"""CSV persistence for traces and summaries.

Floats are written with ``repr`` (shortest round-trip decimal), so reading
a file back reproduces the in-memory values exactly.  Missing optional
values are empty cells; booleans are ``1``/``0``.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from eiregret.theory import RegretTrace

TRACE_TAIL = ["y", "f", "r_t", "R_t", "xi_plus", "sigma_xt", "ei_xt", "ey_flag", "simple_regret", "info_gain"]
SUMMARY_HEADER = ["t", "mean_Rt_over_t", "ci_low", "ci_high"]
TRIALS_HEADER = ["trial", "final_R_T", "n_y", "failed"]
SIMPLE_REGRET_HEADER = ["t", "mean_simple_regret", "ci_low", "ci_high"]


class CsvValidationError(ValueError):
    pass


def trace_header(d: int) -> list[str]:
    return ["trial", "t"] + [f"x_{i}" for i in range(1, d + 1)] + TRACE_TAIL


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _check_finite(values, where: str):
    for v in values:
        if isinstance(v, (float, np.floating)) and not math.isfinite(v):
            raise CsvValidationError(f"refusing to write non-finite value {v!r} ({where})")


def _write_rows(path, header: Sequence[str], rows: list[list]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not rows:
        raise CsvValidationError(f"{path} is empty")
    return rows[0], rows[1:]


def _trace_rows(trace: RegretTrace) -> list[list]:
    rows = []
    for rec in trace.records:
        row = [trace.trial, rec.t, *map(float, rec.x), rec.y, rec.f, rec.r_t, rec.R_t,
               rec.xi_plus, rec.sigma_xt, rec.ei_xt, rec.ey_flag, rec.simple_regret, rec.info_gain]
        _check_finite(row, f"trial {trace.trial}, t={rec.t}")
        rows.append(row)
    return rows


def write_trace_csv(trace: RegretTrace | Sequence[RegretTrace], path) -> Path:
    """Write one or several traces (stacked by trial) to a single CSV."""
    traces = [trace] if isinstance(trace, RegretTrace) else list(trace)
    if not traces:
        raise CsvValidationError("no traces to write")
    d = None
    rows = []
    for tr in traces:
        if tr.records:
            d = len(tr.records[0].x) if d is None else d
        rows.extend(_trace_rows(tr))
    if d is None:
        raise CsvValidationError("traces contain no records")
    return _write_rows(path, trace_header(d), rows)


@dataclass
class TraceRow:
    trial: int
    t: int
    x: np.ndarray
    y: float
    f: float
    r_t: float
    R_t: float
    xi_plus: float
    sigma_xt: float
    ei_xt: float
    ey_flag: Optional[bool]
    simple_regret: Optional[float]
    info_gain: float


def _opt_float(s: str) -> Optional[float]:
    return None if s == "" else float(s)


def read_trace_csv(path) -> list[TraceRow]:
    header, rows = _read_rows(path)
    d = sum(1 for h in header if re.fullmatch(r"x_\d+", h))
    if header != trace_header(d):
        raise CsvValidationError(f"{path}: unexpected trace header {header}")
    out = []
    for r in rows:
        x = np.array([float(v) for v in r[2:2 + d]])
        (y, f, r_t, R_t, xi, sx, ei, ey, rs, ig) = r[2 + d:]
        out.append(TraceRow(
            int(r[0]), int(r[1]), x, float(y), float(f), float(r_t), float(R_t), float(xi),
            float(sx), float(ei), None if ey == "" else ey == "1", _opt_float(rs), float(ig),
        ))
    return out


@dataclass
class SummaryCurve:
    """A mean curve with its CI band, as stored in a summary CSV."""

    label: str
    t: np.ndarray
    mean: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray


def write_summary_csv(summary, path) -> Path:
    rows = [[int(t), m, lo, hi] for t, m, lo, hi in zip(summary.t, summary.mean, summary.ci_low, summary.ci_high)]
    for row in rows:
        _check_finite(row, f"summary t={row[0]}")
    return _write_rows(path, SUMMARY_HEADER, rows)


_RULE_TOKEN = re.compile(r"(?:^|_)(bpmi|bspmi|boi)(?:_|$)", re.IGNORECASE)


def label_from_path(path) -> str:
    m = _RULE_TOKEN.search(Path(path).stem)
    return m.group(1).upper() if m else Path(path).stem


def read_summary_csv(path, label: str | None = None) -> SummaryCurve:
    header, rows = _read_rows(path)
    if header != SUMMARY_HEADER:
        raise CsvValidationError(f"{path}: expected header {','.join(SUMMARY_HEADER)}, got {','.join(header)}")
    if not rows:
        raise CsvValidationError(f"{path}: no data rows")
    a = np.array([[float(v) for v in r] for r in rows])
    return SummaryCurve(label or label_from_path(path), a[:, 0].astype(int), a[:, 1], a[:, 2], a[:, 3])


def write_trials_csv(summary, path) -> Path:
    n_y = summary.n_y if summary.n_y is not None else [None] * len(summary.trials)
    rows = [[tr, R, ny, False] for tr, R, ny in zip(summary.trials, summary.final_regret, n_y)]
    rows += [[tr, None, None, True] for tr in summary.failed]
    rows.sort(key=lambda r: r[0])
    return _write_rows(path, TRIALS_HEADER, rows)


def write_simple_regret_csv(summary, path) -> Path:
    m, hw = summary.simple_regret_mean, summary.simple_regret_half_width
    rows = [[int(t), a, a - h, a + h] for t, a, h in zip(summary.t, m, hw)]
    return _write_rows(path, SIMPLE_REGRET_HEADER, rows)
