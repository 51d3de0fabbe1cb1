"""Weighted nonlinear least-squares position solve via damped Gauss-Newton.

The objective is sum_i w_i^2 (r_i - ||z - a_i||)^2 over anchors a_i with
measured (or filtered) distances r_i. Residuals are rho_i = w_i (r_i - ||z - a_i||)
so the squared-residual sum equals the objective exactly. Gauss-Newton steps
are damped by step halving: a step that does not decrease the cost is halved
up to 10 times, and the solver stops at the best point if no decrease is
found. A brute-force grid refinement is included as an independent check on
the solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Point2

_STEP_HALVINGS = 10
_COLLINEAR_TOL = 1e-9


class RankDeficiencyError(ValueError):
    """Positively weighted anchors are collinear; the 2-D fix is unobservable."""


@dataclass
class WlsProblem:
    """One multilateration problem: anchors, distances, weights, warm start."""

    anchors: list[Point2]
    distances: list[float]
    weights: list[float]
    initial_guess: Point2

    def __post_init__(self) -> None:
        n = len(self.anchors)
        if n < 3:
            raise ValueError(f"need at least 3 anchors, got {n}")
        if len(self.distances) != n or len(self.weights) != n:
            raise ValueError(
                f"length mismatch: {n} anchors, {len(self.distances)} distances, "
                f"{len(self.weights)} weights"
            )
        for r in self.distances:
            if not math.isfinite(r) or r < 0.0:
                raise ValueError(f"distances must be finite and >= 0, got {r}")
        for w in self.weights:
            if not math.isfinite(w) or w < 0.0:
                raise ValueError(f"weights must be finite and >= 0, got {w}")
        if sum(1 for w in self.weights if w > 0.0) < 2:
            raise ValueError("need at least 2 strictly positive weights")


@dataclass
class WlsSolution:
    position: Point2
    iterations: int
    final_cost: float
    converged: bool
    cost_trace: list[float] = field(default_factory=list)


def wls_cost(problem: WlsProblem, z: Point2) -> float:
    """Objective value sum_i w_i^2 (r_i - ||z - a_i||)^2 at z."""
    total = 0.0
    for a, r, w in zip(problem.anchors, problem.distances, problem.weights):
        res = w * (r - math.hypot(z.x - a.x, z.y - a.y))
        total += res * res
    return total


def residual_jacobian(problem: WlsProblem, z: Point2) -> tuple[np.ndarray, np.ndarray]:
    """Residual vector rho and its 2-column Jacobian at z.

    rho_i = w_i (r_i - d_i), J_i = -w_i (z - a_i) / d_i. An anchor coincident
    with z (d_i ~ 0) contributes a zero row; the damping loop handles it.
    """
    n = len(problem.anchors)
    rho = np.zeros(n)
    jac = np.zeros((n, 2))
    for i, (a, r, w) in enumerate(zip(problem.anchors, problem.distances, problem.weights)):
        dx = z.x - a.x
        dy = z.y - a.y
        d = math.hypot(dx, dy)
        if d < 1e-12:
            rho[i] = w * r
            continue
        rho[i] = w * (r - d)
        jac[i, 0] = -w * dx / d
        jac[i, 1] = -w * dy / d
    return rho, jac


def _check_geometry(problem: WlsProblem) -> None:
    pts = np.array(
        [[a.x, a.y] for a, w in zip(problem.anchors, problem.weights) if w > 0.0]
    )
    centered = pts - pts.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    if svals[1] <= _COLLINEAR_TOL:
        raise RankDeficiencyError(
            "positively weighted anchors are collinear within tolerance"
        )


def wls_solve(problem: WlsProblem, tol: float = 1e-6, max_iter: int = 50) -> WlsSolution:
    """Minimize the weighted range objective from problem.initial_guess.

    Gauss-Newton with step halving; stops when the accepted step norm drops
    below tol (converged) or when max_iter is reached / no damped step
    decreases the cost (not converged, best point returned).
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be > 0, got {tol}")
    _check_geometry(problem)

    x, y = problem.initial_guess.x, problem.initial_guess.y
    cost = wls_cost(problem, Point2(x, y))
    trace = [cost]

    for it in range(1, max_iter + 1):
        j00 = j01 = j11 = g0 = g1 = 0.0
        for a, r, w in zip(problem.anchors, problem.distances, problem.weights):
            dx = x - a.x
            dy = y - a.y
            d = math.hypot(dx, dy)
            if d < 1e-12 or w == 0.0:
                continue
            ux = -w * dx / d
            uy = -w * dy / d
            res = w * (r - d)
            j00 += ux * ux
            j01 += ux * uy
            j11 += uy * uy
            g0 += ux * res
            g1 += uy * res
        det = j00 * j11 - j01 * j01
        if not math.isfinite(det) or abs(det) < 1e-18:
            # Normal equations singular at this iterate (e.g. sitting on an
            # anchor with the rest degenerate): stop at the best point.
            return WlsSolution(Point2(x, y), it - 1, cost, False, trace)
        # Solve (J^T J) step = -J^T rho for the 2x2 system.
        sx = -(j11 * g0 - j01 * g1) / det
        sy = -(j00 * g1 - j01 * g0) / det

        scale = 1.0
        accepted = False
        for _ in range(_STEP_HALVINGS + 1):
            cand = Point2(x + scale * sx, y + scale * sy)
            cand_cost = wls_cost(problem, cand)
            if cand_cost < cost:
                x, y = cand.x, cand.y
                cost = cand_cost
                trace.append(cost)
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            return WlsSolution(Point2(x, y), it, cost, False, trace)
        if math.hypot(scale * sx, scale * sy) < tol:
            return WlsSolution(Point2(x, y), it, cost, True, trace)

    return WlsSolution(Point2(x, y), max_iter, cost, False, trace)


def grid_search_min(
    problem: WlsProblem,
    lo: tuple[float, float],
    hi: tuple[float, float],
    coarse: float = 0.1,
    fine: float = 0.001,
) -> Point2:
    """Two-stage brute-force minimizer of the objective over [lo, hi].

    Exhaustive coarse grid, then a fine grid around the coarse winner. Slow by
    design; exists as an independent reference for the Gauss-Newton path.
    """
    ax = np.array([a.x for a in problem.anchors])
    ay = np.array([a.y for a in problem.anchors])
    r = np.array(problem.distances)
    w2 = np.array(problem.weights) ** 2

    def best_on(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        cost = np.zeros_like(gx)
        for i in range(len(r)):
            d = np.hypot(gx - ax[i], gy - ay[i])
            cost += w2[i] * (r[i] - d) ** 2
        flat = int(np.argmin(cost))
        return float(gx.flat[flat]), float(gy.flat[flat])

    cx, cy = best_on(
        np.arange(lo[0], hi[0] + coarse / 2, coarse),
        np.arange(lo[1], hi[1] + coarse / 2, coarse),
    )
    fx, fy = best_on(
        np.arange(cx - coarse, cx + coarse + fine / 2, fine),
        np.arange(cy - coarse, cy + coarse + fine / 2, fine),
    )
    return Point2(fx, fy)
