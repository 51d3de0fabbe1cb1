"""Error statistics over position fixes: RMS, 90th percentile, CDF."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .estimators import PositionFix
from .geometry import Point2

METRIC_MODES = ("euclidean", "x", "y")


@dataclass
class ErrorReport:
    """Summary of per-epoch location errors; rms/p90/cdf are in centimeters."""

    estimator: str
    n_epochs: int
    rms_cm: float
    p90_cm: float
    cdf: list[tuple[float, float]]
    exclusion: str


def compute_errors(
    fixes: Iterable[PositionFix],
    truth: Mapping[int, Point2],
    mode: str = "euclidean",
) -> list[tuple[int, float]]:
    """Per-epoch |error| in meters, as (k, error) pairs in fix order.

    mode selects the full Euclidean error or a single axis (useful when a
    straight run is parallel to one axis and only the cross-track error is
    meaningful).
    """
    if mode not in METRIC_MODES:
        raise ValueError(f"mode must be one of {METRIC_MODES}, got {mode!r}")
    out: list[tuple[int, float]] = []
    for fix in fixes:
        ref = truth.get(fix.k)
        if ref is None:
            raise ValueError(f"no ground truth for epoch {fix.k}")
        if mode == "euclidean":
            err = fix.position.dist(ref)
        elif mode == "x":
            err = abs(fix.position.x - ref.x)
        else:
            err = abs(fix.position.y - ref.y)
        out.append((fix.k, err))
    return out


def summarize(
    errors: list[tuple[int, float]],
    exclude: Callable[[int], bool] | None = None,
    estimator: str = "",
    exclusion: str = "none",
) -> ErrorReport:
    """Reduce per-epoch errors to an ErrorReport.

    exclude is a predicate on the epoch index; excluded epochs do not enter
    any statistic. The 90th percentile uses linear interpolation between
    closest ranks (numpy's default), and the CDF is the empirical one over
    the included epochs.
    """
    kept = [e for k, e in errors if exclude is None or not exclude(k)]
    if not kept:
        raise ValueError("all epochs excluded; nothing to summarize")
    e = np.array(kept)
    rms = math.sqrt(float(np.mean(e**2)))
    p90 = float(np.percentile(e, 90.0))
    e_cm = np.sort(e) * 100.0
    n = len(e_cm)
    cdf = [(float(e_cm[i]), (i + 1) / n) for i in range(n)]
    return ErrorReport(estimator, n, rms * 100.0, p90 * 100.0, cdf, exclusion)
