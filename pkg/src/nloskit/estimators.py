"""Per-epoch position estimators: LS, RKF, and WLS-RKF.

All three share the same per-epoch contract: they consume one RangeEpoch and
produce a PositionFix (plus, for the filtered variants, the updated filter
bank). WLS-RKF runs, per anchor,

  1. predict the distance d and innovation variance S from the anchor's filter,
  2. gate the measurement with the squared Mahalanobis distance gamma,
  3. flag NLOS when gamma exceeds the chi^2 threshold AND the measurement is
     longer than predicted (the bias is always positive),
  4. NLOS: keep the predicted distance, weight sqrt(threshold / gamma);
     LOS: update the filter with the measurement, use the filtered distance,
     weight 1,

then solves the weighted range problem for the position, and finally feeds
every NLOS anchor's filter with the distance from the solved position to that
anchor so its state keeps tracking the true range rather than the biased one.

The RKF baseline instead inflates the measurement variance of gated
measurements (by gamma / threshold, iterated until the statistic passes) and
always updates with the raw measurement; the LS baseline solves the raw
ranges unweighted with no filtering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .geometry import Point2
from .kfbank import (
    KfParams,
    KfState,
    Prediction,
    kf_coast,
    kf_empty,
    kf_init,
    kf_predict,
    kf_update,
    mahalanobis_sq,
)
from .rangesim import Anchor, RangeEpoch
from .wls import WlsProblem, wls_solve

LOS = "LOS"
NLOS = "NLOS"
SKIP = "SKIP"  # missing/invalid measurement this epoch

QUALITY_OK = "OK"
QUALITY_DEGRADED = "DEGRADED"
QUALITY_BOOTSTRAP = "BOOTSTRAP"

ESTIMATOR_NAMES = ("LS", "RKF", "WLS-RKF")

_MAX_INFLATIONS = 20


class PipelineError(RuntimeError):
    """Estimator failure with the epoch index attached."""

    def __init__(self, k: int, cause: Exception):
        super().__init__(f"epoch {k}: {cause}")
        self.k = k
        self.cause = cause


def normalize_estimator(name: str) -> str:
    canon = name.strip().upper().replace("_", "-").replace("WLSRKF", "WLS-RKF")
    if canon not in ESTIMATOR_NAMES:
        raise ValueError(f"unknown estimator {name!r}; expected one of {ESTIMATOR_NAMES}")
    return canon


@dataclass(frozen=True)
class EstimatorConfig:
    """Shared estimator knobs; defaults mirror the reference setup."""

    kf: KfParams
    chi2_threshold: float = 6.2
    wls_tol: float = 1e-6
    wls_max_iter: int = 50
    min_los: int = 2
    init_rate_var: float = 0.0

    def __post_init__(self) -> None:
        if self.chi2_threshold <= 0.0:
            raise ValueError(f"chi2_threshold must be > 0, got {self.chi2_threshold}")
        if self.min_los < 2:
            raise ValueError(f"min_los must be >= 2, got {self.min_los}")


@dataclass
class AnchorFix:
    """Per-anchor diagnostics inside a PositionFix.

    gamma and distance_used are NaN when undefined (bootstrap epoch, skipped
    anchor).
    """

    verdict: str
    gamma: float
    weight: float
    distance_used: float


@dataclass
class PositionFix:
    k: int
    t: float
    position: Point2
    anchors: list[AnchorFix] = field(default_factory=list)
    quality: str = QUALITY_OK
    solver_converged: bool = True


def identify_nlos(gamma: float, r: float, d_pred: float, threshold: float) -> str:
    """NLOS iff the gating statistic trips AND the range is longer than
    predicted; a short outlier cannot be a positive NLOS bias."""
    if gamma < 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    if gamma > threshold and r > d_pred:
        return NLOS
    return LOS


def _validate_epoch(epoch: RangeEpoch, n_anchors: int) -> list[int]:
    if len(epoch.r) != n_anchors:
        raise ValueError(
            f"epoch {epoch.k} has {len(epoch.r)} ranges for {n_anchors} anchors"
        )
    usable = [i for i, r in enumerate(epoch.r) if math.isfinite(r)]
    if len(usable) < 3:
        raise ValueError(
            f"epoch {epoch.k} has only {len(usable)} finite ranges; need >= 3"
        )
    return usable


def _solve(
    anchors: list[Anchor],
    distances: list[float],
    weights: list[float],
    guess: Point2,
    config: EstimatorConfig,
) -> tuple[Point2, bool]:
    """Weighted solve over the anchors with positive weight."""
    idx = [i for i, w in enumerate(weights) if w > 0.0]
    problem = WlsProblem(
        anchors=[anchors[i].position for i in idx],
        distances=[distances[i] for i in idx],
        weights=[weights[i] for i in idx],
        initial_guess=guess,
    )
    sol = wls_solve(problem, tol=config.wls_tol, max_iter=config.wls_max_iter)
    return sol.position, sol.converged


def _centroid(anchors: list[Anchor], idx: list[int]) -> Point2:
    return Point2(
        sum(anchors[i].position.x for i in idx) / len(idx),
        sum(anchors[i].position.y for i in idx) / len(idx),
    )


def _bootstrap(
    bank: list[KfState],
    epoch: RangeEpoch,
    anchors: list[Anchor],
    config: EstimatorConfig,
) -> tuple[PositionFix, list[KfState]]:
    """First epoch: no predictions exist, so the gate is undefined. Filters
    initialize from the raw ranges and the fix is an unweighted solve started
    at the centroid of the usable anchors."""
    usable = _validate_epoch(epoch, len(anchors))
    new_bank: list[KfState] = []
    records: list[AnchorFix] = []
    distances: list[float] = []
    weights: list[float] = []
    for i, state in enumerate(bank):
        r = epoch.r[i]
        if math.isfinite(r):
            new_bank.append(kf_init(r, config.kf, config.init_rate_var))
            records.append(AnchorFix(LOS, math.nan, 1.0, r))
            distances.append(r)
            weights.append(1.0)
        else:
            new_bank.append(state)
            records.append(AnchorFix(SKIP, math.nan, 0.0, math.nan))
            distances.append(0.0)
            weights.append(0.0)
    position, converged = _solve(anchors, distances, weights, _centroid(anchors, usable), config)
    fix = PositionFix(epoch.k, epoch.t, position, records, QUALITY_BOOTSTRAP, converged)
    return fix, new_bank


def wlsrkf_step(
    bank: list[KfState],
    epoch: RangeEpoch,
    anchors: list[Anchor],
    config: EstimatorConfig,
    prev_fix: PositionFix | None,
) -> tuple[PositionFix, list[KfState]]:
    """One epoch of the WLS-RKF estimator (see module docstring)."""
    if prev_fix is None:
        return _bootstrap(bank, epoch, anchors, config)
    _validate_epoch(epoch, len(anchors))

    new_bank = list(bank)
    records: list[AnchorFix] = []
    distances: list[float] = []
    weights: list[float] = []
    feedback: list[tuple[int, Prediction]] = []

    for i, state in enumerate(bank):
        r = epoch.r[i]
        if not math.isfinite(r):
            if state.initialized:
                new_bank[i] = kf_coast(state, kf_predict(state))
            records.append(AnchorFix(SKIP, math.nan, 0.0, math.nan))
            distances.append(0.0)
            weights.append(0.0)
            continue
        if not state.initialized:
            # Anchor was missing at bootstrap; adopt its first range now.
            new_bank[i] = kf_init(r, config.kf, config.init_rate_var)
            records.append(AnchorFix(LOS, math.nan, 1.0, r))
            distances.append(r)
            weights.append(1.0)
            continue

        pred = kf_predict(state)
        gamma = mahalanobis_sq(pred, r)
        verdict = identify_nlos(gamma, r, pred.d, config.chi2_threshold)
        if verdict == NLOS:
            # Biased range: trust the prediction, down-weight in the solve,
            # defer the filter update until the position is known.
            rhat = pred.d
            weight = math.sqrt(config.chi2_threshold / gamma)
            feedback.append((i, pred))
        else:
            new_bank[i] = kf_update(state, pred, r)
            rhat = float(new_bank[i].x[0])
            weight = 1.0
        records.append(AnchorFix(verdict, gamma, weight, rhat))
        distances.append(rhat)
        weights.append(weight)

    position, converged = _solve(anchors, distances, weights, prev_fix.position, config)

    # Feed NLOS filters with the solved geometry so their states keep
    # tracking the true distance while the measurement is biased.
    for i, pred in feedback:
        y = position.dist(anchors[i].position)
        new_bank[i] = kf_update(bank[i], pred, y)

    los_count = sum(1 for rec in records if rec.verdict == LOS)
    quality = QUALITY_OK if los_count >= config.min_los else QUALITY_DEGRADED
    fix = PositionFix(epoch.k, epoch.t, position, records, quality, converged)
    return fix, new_bank


def rkf_step(
    bank: list[KfState],
    epoch: RangeEpoch,
    anchors: list[Anchor],
    config: EstimatorConfig,
    prev_fix: PositionFix | None,
) -> tuple[PositionFix, list[KfState]]:
    """Robust-KF baseline: gated measurements update under an inflated
    variance (factor gamma / threshold, iterated until the recomputed
    statistic passes), the position is an unweighted solve on the filtered
    distances. No positivity constraint and no feedback."""
    if prev_fix is None:
        return _bootstrap(bank, epoch, anchors, config)
    _validate_epoch(epoch, len(anchors))

    new_bank = list(bank)
    records: list[AnchorFix] = []
    distances: list[float] = []
    weights: list[float] = []

    for i, state in enumerate(bank):
        r = epoch.r[i]
        if not math.isfinite(r):
            if state.initialized:
                new_bank[i] = kf_coast(state, kf_predict(state))
            records.append(AnchorFix(SKIP, math.nan, 0.0, math.nan))
            distances.append(0.0)
            weights.append(0.0)
            continue
        if not state.initialized:
            new_bank[i] = kf_init(r, config.kf, config.init_rate_var)
            records.append(AnchorFix(LOS, math.nan, 1.0, r))
            distances.append(r)
            weights.append(1.0)
            continue

        pred = kf_predict(state)
        gamma = mahalanobis_sq(pred, r)
        meas_var = config.kf.meas_var
        p00 = float(pred.P[0, 0])
        innov_sq = (r - pred.d) ** 2
        stat = gamma
        for _ in range(_MAX_INFLATIONS):
            if stat <= config.chi2_threshold:
                break
            meas_var *= stat / config.chi2_threshold
            stat = innov_sq / (p00 + meas_var)
        new_bank[i] = kf_update(state, pred, r, meas_var=meas_var)
        rhat = float(new_bank[i].x[0])
        records.append(AnchorFix(LOS, gamma, 1.0, rhat))
        distances.append(rhat)
        weights.append(1.0)

    position, converged = _solve(anchors, distances, weights, prev_fix.position, config)
    los_count = sum(1 for rec in records if rec.verdict == LOS)
    quality = QUALITY_OK if los_count >= config.min_los else QUALITY_DEGRADED
    fix = PositionFix(epoch.k, epoch.t, position, records, quality, converged)
    return fix, new_bank


def ls_step(
    epoch: RangeEpoch,
    anchors: list[Anchor],
    config: EstimatorConfig,
    prev_fix: PositionFix | None,
) -> PositionFix:
    """Unweighted solve on the raw measured ranges; no filtering."""
    usable = _validate_epoch(epoch, len(anchors))
    records: list[AnchorFix] = []
    distances: list[float] = []
    weights: list[float] = []
    for i in range(len(anchors)):
        r = epoch.r[i]
        if math.isfinite(r):
            records.append(AnchorFix(LOS, math.nan, 1.0, r))
            distances.append(r)
            weights.append(1.0)
        else:
            records.append(AnchorFix(SKIP, math.nan, 0.0, math.nan))
            distances.append(0.0)
            weights.append(0.0)
    guess = prev_fix.position if prev_fix is not None else _centroid(anchors, usable)
    position, converged = _solve(anchors, distances, weights, guess, config)
    quality = QUALITY_BOOTSTRAP if prev_fix is None else (
        QUALITY_OK if len(usable) >= config.min_los else QUALITY_DEGRADED
    )
    return PositionFix(epoch.k, epoch.t, position, records, quality, converged)


def run_pipeline(
    estimator: str,
    log: list[RangeEpoch],
    anchors: list[Anchor],
    config: EstimatorConfig,
) -> list[PositionFix]:
    """Fold the chosen per-epoch step over a measurement log, in order."""
    name = normalize_estimator(estimator)
    if not log:
        raise ValueError("empty measurement log")

    fixes: list[PositionFix] = []
    prev: PositionFix | None = None
    bank = [kf_empty(config.kf) for _ in anchors]
    for epoch in log:
        try:
            if name == "LS":
                fix = ls_step(epoch, anchors, config, prev)
            elif name == "RKF":
                fix, bank = rkf_step(bank, epoch, anchors, config, prev)
            else:
                fix, bank = wlsrkf_step(bank, epoch, anchors, config, prev)
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError(epoch.k, exc) from exc
        fixes.append(fix)
        prev = fix
    return fixes
