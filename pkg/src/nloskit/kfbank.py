"""Per-anchor distance Kalman filters with an innovation gating statistic.

Each anchor gets an independent scalar-measurement filter over the state
[distance, distance-rate]:

    x_k = A x_{k-1} + G w_{k-1},   A = [[1, dt], [0, 1]],  G = [0, dt]^T
    y_k = H x_k + u_k,             H = [1, 0]

with driving-noise variance sigma_u^2 entering through G and measurement
variance sigma_x^2. The squared Mahalanobis distance of a measurement from
the predicted distance is chi^2 with 1 degree of freedom under line-of-sight
conditions, which is what the NLOS hypothesis test keys on.

The 2x2 recursions are written out in scalar form (this sits in the hot loop
of every estimator); covariances stay symmetric by construction and the
off-diagonal term of the update is averaged with its transpose counterpart to
suppress rounding drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class UninitializedFilterError(RuntimeError):
    """Predict/update requested on a filter that has no state yet."""


@dataclass(frozen=True)
class KfParams:
    """Filter constants: sample interval and noise standard deviations."""

    dt: float
    sigma_u: float
    sigma_x: float

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.sigma_u <= 0.0:
            raise ValueError(f"sigma_u must be > 0, got {self.sigma_u}")
        if self.sigma_x <= 0.0:
            raise ValueError(f"sigma_x must be > 0, got {self.sigma_x}")

    @property
    def meas_var(self) -> float:
        return self.sigma_x * self.sigma_x


@dataclass(frozen=True)
class KfState:
    """Filter state: estimate x = [distance, rate], covariance P (2x2)."""

    x: np.ndarray
    P: np.ndarray
    params: KfParams
    initialized: bool = True


@dataclass(frozen=True)
class Prediction:
    """One-step prediction: x_pred, P_pred, predicted distance d and
    innovation variance S = P_pred[0,0] + sigma_x^2."""

    x: np.ndarray
    P: np.ndarray
    d: float
    S: float


def kf_empty(params: KfParams) -> KfState:
    """Placeholder state for a bank slot that has seen no measurement yet."""
    return KfState(np.zeros(2), np.zeros((2, 2)), params, initialized=False)


def kf_init(r0: float, params: KfParams, rate_var: float = 0.0) -> KfState:
    """Initialize from a first range: x = [r0, 0], P = diag(sigma_x^2, rate_var).

    rate_var defaults to 0 (the reference configuration); a positive value
    speeds up early rate convergence when replaying logs with unknown motion.
    """
    if not math.isfinite(r0) or r0 < 0.0:
        raise ValueError(f"initial range must be finite and >= 0, got {r0}")
    if rate_var < 0.0:
        raise ValueError(f"rate_var must be >= 0, got {rate_var}")
    x = np.array([r0, 0.0])
    P = np.array([[params.meas_var, 0.0], [0.0, rate_var]])
    return KfState(x, P, params)


def kf_predict(state: KfState) -> Prediction:
    """Time update: x_pred = A x, P_pred = A P A^T + G sigma_u^2 G^T."""
    if not state.initialized:
        raise UninitializedFilterError("kf_predict on uninitialized filter")
    dt = state.params.dt
    x0, x1 = state.x
    p00, p01 = state.P[0, 0], state.P[0, 1]
    p11 = state.P[1, 1]

    x0p = x0 + dt * x1
    p00p = p00 + 2.0 * dt * p01 + dt * dt * p11
    p01p = p01 + dt * p11
    p11p = p11 + dt * dt * state.params.sigma_u * state.params.sigma_u

    x_pred = np.array([x0p, x1])
    P_pred = np.array([[p00p, p01p], [p01p, p11p]])
    return Prediction(x_pred, P_pred, x0p, p00p + state.params.meas_var)


def kf_update(state: KfState, pred: Prediction, y: float, meas_var: float | None = None) -> KfState:
    """Measurement update with range y.

    meas_var overrides sigma_x^2 for this update only (the robust baseline
    inflates it for gated measurements); the innovation variance is then
    recomputed from P_pred rather than taken from pred.S.
    """
    if not state.initialized:
        raise UninitializedFilterError("kf_update on uninitialized filter")
    if not math.isfinite(y):
        raise ValueError(f"measurement must be finite, got {y}")
    r_var = state.params.meas_var if meas_var is None else meas_var

    p00, p01 = pred.P[0, 0], pred.P[0, 1]
    p11 = pred.P[1, 1]
    s = p00 + r_var
    k0 = p00 / s
    k1 = p01 / s
    innov = y - pred.d

    x = np.array([pred.x[0] + k0 * innov, pred.x[1] + k1 * innov])
    # (I - K H) P_pred, with the off-diagonal re-symmetrized as (P + P^T)/2.
    q00 = (1.0 - k0) * p00
    q01 = 0.5 * ((1.0 - k0) * p01 + (p01 - k1 * p00))
    q11 = p11 - k1 * p01
    P = np.array([[q00, q01], [q01, q11]])
    return KfState(x, P, state.params)


def kf_coast(state: KfState, pred: Prediction) -> KfState:
    """Advance to the predicted state without a measurement (dropped packet)."""
    return KfState(pred.x, pred.P, state.params)


def mahalanobis_sq(pred: Prediction, r: float) -> float:
    """Squared Mahalanobis distance of range r from the predicted distance."""
    if not math.isfinite(r):
        raise ValueError(f"range must be finite, got {r}")
    innov = r - pred.d
    return innov * innov / pred.S
