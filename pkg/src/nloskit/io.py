"""CSV schemas for measurement logs, fixes, truth, and reports.

All files are UTF-8 with LF line endings and a mandatory header row. Floats
are written with repr so a write -> read -> write cycle is byte-identical;
missing values (dropped ranges, absent truth) are empty cells.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

from .estimators import AnchorFix, PositionFix
from .geometry import Point2
from .metrics import ErrorReport
from .rangesim import RangeEpoch


class LogFormatError(ValueError):
    """CSV schema violation; the message carries the 1-based row number."""


def _fmt(value: float) -> str:
    value = float(value)
    return "" if math.isnan(value) else repr(value)


def _parse_float(text: str, row: int, col: str) -> float:
    if text == "":
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise LogFormatError(f"row {row}: column {col}: not a number: {text!r}") from None


def _parse_int(text: str, row: int, col: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise LogFormatError(f"row {row}: column {col}: not an integer: {text!r}") from None


def _open_writer(path: Path):
    f = open(path, "w", newline="", encoding="utf-8")
    return f, csv.writer(f, lineterminator="\n")


# measurement log: k, t, r_1..r_N, truth_x, truth_y ------------------------

def log_header(n_anchors: int) -> list[str]:
    return ["k", "t"] + [f"r_{i + 1}" for i in range(n_anchors)] + ["truth_x", "truth_y"]


def write_measurement_log(path: str | Path, epochs: list[RangeEpoch]) -> None:
    if not epochs:
        raise ValueError("refusing to write an empty measurement log")
    n = len(epochs[0].r)
    f, writer = _open_writer(Path(path))
    with f:
        writer.writerow(log_header(n))
        for ep in epochs:
            row = [str(ep.k), _fmt(ep.t)]
            row += [_fmt(r) for r in ep.r]
            if ep.truth is None:
                row += ["", ""]
            else:
                row += [_fmt(ep.truth.x), _fmt(ep.truth.y)]
            writer.writerow(row)


def read_measurement_log(path: str | Path) -> list[RangeEpoch]:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise LogFormatError("row 1: empty file, expected measurement-log header")
    header = rows[0]
    if len(header) < 5 or header[:2] != ["k", "t"] or header[-2:] != ["truth_x", "truth_y"]:
        raise LogFormatError("row 1: header does not match k,t,r_1..r_N,truth_x,truth_y")
    n = len(header) - 4
    if header[2:-2] != [f"r_{i + 1}" for i in range(n)]:
        raise LogFormatError("row 1: range columns must be named r_1..r_N")

    epochs: list[RangeEpoch] = []
    for idx, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise LogFormatError(f"row {idx}: expected {len(header)} cells, got {len(row)}")
        k = _parse_int(row[0], idx, "k")
        t = _parse_float(row[1], idx, "t")
        if math.isnan(t):
            raise LogFormatError(f"row {idx}: column t: must not be empty")
        ranges = [_parse_float(row[2 + i], idx, f"r_{i + 1}") for i in range(n)]
        tx = _parse_float(row[-2], idx, "truth_x")
        ty = _parse_float(row[-1], idx, "truth_y")
        if math.isnan(tx) != math.isnan(ty):
            raise LogFormatError(f"row {idx}: truth_x and truth_y must both be set or both empty")
        truth = None if math.isnan(tx) else Point2(tx, ty)
        try:
            epochs.append(RangeEpoch(k, t, ranges, truth))
        except ValueError as exc:
            raise LogFormatError(f"row {idx}: {exc}") from exc
    if not epochs:
        raise LogFormatError("row 2: log contains a header but no epochs")
    return epochs


# fixes: k, t, est_x, est_y, quality, then verdict_i, gamma_i, weight_i, rhat_i

def fixes_header(n_anchors: int) -> list[str]:
    cols = ["k", "t", "est_x", "est_y", "quality"]
    for i in range(1, n_anchors + 1):
        cols += [f"verdict_{i}", f"gamma_{i}", f"weight_{i}", f"rhat_{i}"]
    return cols


def write_fixes(path: str | Path, fixes: list[PositionFix]) -> None:
    if not fixes:
        raise ValueError("refusing to write an empty fix file")
    n = len(fixes[0].anchors)
    f, writer = _open_writer(Path(path))
    with f:
        writer.writerow(fixes_header(n))
        for fix in fixes:
            row = [str(fix.k), _fmt(fix.t), _fmt(fix.position.x), _fmt(fix.position.y), fix.quality]
            for rec in fix.anchors:
                row += [rec.verdict, _fmt(rec.gamma), _fmt(rec.weight), _fmt(rec.distance_used)]
            writer.writerow(row)


def read_fixes(path: str | Path) -> list[PositionFix]:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise LogFormatError("row 1: empty file, expected fix header")
    header = rows[0]
    if len(header) < 9 or (len(header) - 5) % 4 != 0 or header[:5] != ["k", "t", "est_x", "est_y", "quality"]:
        raise LogFormatError("row 1: header does not match the fix schema")
    n = (len(header) - 5) // 4
    if header != fixes_header(n):
        raise LogFormatError("row 1: per-anchor columns must be verdict_i,gamma_i,weight_i,rhat_i")

    fixes: list[PositionFix] = []
    for idx, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise LogFormatError(f"row {idx}: expected {len(header)} cells, got {len(row)}")
        records = []
        for i in range(n):
            base = 5 + 4 * i
            records.append(
                AnchorFix(
                    verdict=row[base],
                    gamma=_parse_float(row[base + 1], idx, f"gamma_{i + 1}"),
                    weight=_parse_float(row[base + 2], idx, f"weight_{i + 1}"),
                    distance_used=_parse_float(row[base + 3], idx, f"rhat_{i + 1}"),
                )
            )
        fixes.append(
            PositionFix(
                k=_parse_int(row[0], idx, "k"),
                t=_parse_float(row[1], idx, "t"),
                position=Point2(_parse_float(row[2], idx, "est_x"), _parse_float(row[3], idx, "est_y")),
                anchors=records,
                quality=row[4],
            )
        )
    if not fixes:
        raise LogFormatError("row 2: fix file contains a header but no rows")
    return fixes


# ground truth: k, truth_x, truth_y -----------------------------------------

def write_truth(path: str | Path, epochs: list[RangeEpoch]) -> None:
    f, writer = _open_writer(Path(path))
    with f:
        writer.writerow(["k", "truth_x", "truth_y"])
        for ep in epochs:
            if ep.truth is not None:
                writer.writerow([str(ep.k), _fmt(ep.truth.x), _fmt(ep.truth.y)])


def read_truth(path: str | Path) -> dict[int, Point2]:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows or rows[0] != ["k", "truth_x", "truth_y"]:
        raise LogFormatError("row 1: header does not match k,truth_x,truth_y")
    truth: dict[int, Point2] = {}
    for idx, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise LogFormatError(f"row {idx}: expected 3 cells, got {len(row)}")
        k = _parse_int(row[0], idx, "k")
        truth[k] = Point2(_parse_float(row[1], idx, "truth_x"), _parse_float(row[2], idx, "truth_y"))
    return truth


def truth_from_log(epochs: list[RangeEpoch]) -> dict[int, Point2]:
    return {ep.k: ep.truth for ep in epochs if ep.truth is not None}


# reports --------------------------------------------------------------------

REPORT_HEADER = ["estimator", "n_epochs", "rms_cm", "p90_cm", "exclusion"]


def write_report_csv(path: str | Path, reports: list[ErrorReport]) -> None:
    f, writer = _open_writer(Path(path))
    with f:
        writer.writerow(REPORT_HEADER)
        for rep in reports:
            writer.writerow([rep.estimator, str(rep.n_epochs), _fmt(rep.rms_cm), _fmt(rep.p90_cm), rep.exclusion])


def read_report_csv(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows or rows[0] != REPORT_HEADER:
        raise LogFormatError("row 1: header does not match the report schema")
    out = []
    for idx, row in enumerate(rows[1:], start=2):
        if len(row) != len(REPORT_HEADER):
            raise LogFormatError(f"row {idx}: expected {len(REPORT_HEADER)} cells")
        out.append(
            {
                "estimator": row[0],
                "n_epochs": _parse_int(row[1], idx, "n_epochs"),
                "rms_cm": _parse_float(row[2], idx, "rms_cm"),
                "p90_cm": _parse_float(row[3], idx, "p90_cm"),
                "exclusion": row[4],
            }
        )
    return out


def write_report_text(path: str | Path, reports: list[ErrorReport]) -> None:
    """Human-readable fixed-width table mirroring the report CSV."""
    lines = [f"{'estimator':<10} {'n':>7} {'rms(cm)':>9} {'p90(cm)':>9}  exclusion"]
    for rep in reports:
        lines.append(
            f"{rep.estimator:<10} {rep.n_epochs:>7} {rep.rms_cm:>9.2f} {rep.p90_cm:>9.2f}  {rep.exclusion}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_cdf_csv(path: str | Path, report: ErrorReport) -> None:
    f, writer = _open_writer(Path(path))
    with f:
        writer.writerow(["error_cm", "cum_fraction"])
        for err_cm, frac in report.cdf:
            writer.writerow([_fmt(err_cm), _fmt(frac)])
