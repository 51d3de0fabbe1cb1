"""Request/response models for the positioning service.

NaN does not exist in JSON, so missing ranges and undefined diagnostics
travel as null; the converters below map them to/from the NaN convention of
the core types.
"""

from __future__ import annotations

import math

from pydantic import BaseModel, Field

from ..estimators import AnchorFix, EstimatorConfig, PositionFix
from ..geometry import Point2, Wall
from ..kfbank import KfParams
from ..rangesim import Anchor, RangeEpoch


class HealthResponse(BaseModel):
    status: str
    version: str


class AnchorModel(BaseModel):
    name: str
    x: float
    y: float


class WallModel(BaseModel):
    """A resolved wall (ranges already sampled)."""

    center: tuple[float, float]
    length: float
    thickness: float
    orientation: float
    permittivity: float


class EpochModel(BaseModel):
    k: int
    t: float
    r: list[float | None]
    truth: tuple[float, float] | None = None


class ScenarioListResponse(BaseModel):
    names: list[str]


class SimulateRequest(BaseModel):
    scenario: dict = Field(description="Scenario object (same schema as scenario files)")
    seed: int | None = Field(default=None, description="Overrides the scenario's seed")


class SimulateResponse(BaseModel):
    name: str
    anchors: list[AnchorModel]
    walls: list[WallModel]
    epochs: list[EpochModel]


class EstimatorConfigModel(BaseModel):
    dt: float
    sigma_u: float = 0.5
    sigma_x: float = 0.02
    chi2_threshold: float = 6.2
    min_los: int = 2
    wls_tol: float = 1e-6
    wls_max_iter: int = 50
    init_rate_var: float = 0.0


class EstimateRequest(BaseModel):
    anchors: list[AnchorModel]
    epochs: list[EpochModel]
    estimator: str
    config: EstimatorConfigModel


class AnchorFixModel(BaseModel):
    verdict: str
    gamma: float | None
    weight: float
    distance_used: float | None


class FixModel(BaseModel):
    k: int
    t: float
    x: float
    y: float
    quality: str
    converged: bool
    anchors: list[AnchorFixModel]


class EstimateResponse(BaseModel):
    estimator: str
    fixes: list[FixModel]


class ReportRequest(BaseModel):
    points: list[tuple[int, float, float]] = Field(description="(k, est_x, est_y) per fix")
    truth: list[tuple[int, float, float]]
    metric: str = "euclidean"
    exclude_start: int | None = None
    exclude_end: int | None = None
    label: str = ""


class ReportResponse(BaseModel):
    estimator: str
    n_epochs: int
    rms_cm: float
    p90_cm: float
    cdf: list[tuple[float, float]]
    exclusion: str


class SessionCreateRequest(BaseModel):
    anchors: list[AnchorModel]
    estimator: str
    config: EstimatorConfigModel


class SessionCreateResponse(BaseModel):
    session_id: str
    estimator: str


class SessionInfoResponse(BaseModel):
    session_id: str
    estimator: str
    epochs_processed: int


class SessionEpochRequest(BaseModel):
    t: float
    r: list[float | None]


# converters -----------------------------------------------------------------

def _none_to_nan(v: float | None) -> float:
    return math.nan if v is None else v


def _nan_to_none(v: float) -> float | None:
    return None if math.isnan(v) else v


def anchors_to_core(models: list[AnchorModel]) -> list[Anchor]:
    return [Anchor(m.name, Point2(m.x, m.y)) for m in models]


def anchors_to_wire(anchors: list[Anchor]) -> list[AnchorModel]:
    return [AnchorModel(name=a.name, x=a.position.x, y=a.position.y) for a in anchors]


def wall_to_wire(wall: Wall) -> WallModel:
    return WallModel(
        center=(wall.center.x, wall.center.y),
        length=wall.length,
        thickness=wall.thickness,
        orientation=wall.orientation,
        permittivity=wall.permittivity,
    )


def wall_to_core(model: WallModel) -> Wall:
    return Wall(
        Point2(model.center[0], model.center[1]),
        model.length,
        model.thickness,
        model.orientation,
        model.permittivity,
    )


def epoch_to_wire(epoch: RangeEpoch) -> EpochModel:
    truth = None if epoch.truth is None else (epoch.truth.x, epoch.truth.y)
    return EpochModel(k=epoch.k, t=epoch.t, r=[_nan_to_none(v) for v in epoch.r], truth=truth)


def epoch_to_core(model: EpochModel) -> RangeEpoch:
    truth = None if model.truth is None else Point2(model.truth[0], model.truth[1])
    return RangeEpoch(model.k, model.t, [_none_to_nan(v) for v in model.r], truth)


def config_to_core(model: EstimatorConfigModel) -> EstimatorConfig:
    return EstimatorConfig(
        kf=KfParams(model.dt, model.sigma_u, model.sigma_x),
        chi2_threshold=model.chi2_threshold,
        wls_tol=model.wls_tol,
        wls_max_iter=model.wls_max_iter,
        min_los=model.min_los,
        init_rate_var=model.init_rate_var,
    )


def fix_to_wire(fix: PositionFix) -> FixModel:
    return FixModel(
        k=fix.k,
        t=fix.t,
        x=fix.position.x,
        y=fix.position.y,
        quality=fix.quality,
        converged=fix.solver_converged,
        anchors=[
            AnchorFixModel(
                verdict=rec.verdict,
                gamma=_nan_to_none(rec.gamma),
                weight=rec.weight,
                distance_used=_nan_to_none(rec.distance_used),
            )
            for rec in fix.anchors
        ],
    )


def fix_to_core(model: FixModel) -> PositionFix:
    return PositionFix(
        k=model.k,
        t=model.t,
        position=Point2(model.x, model.y),
        anchors=[
            AnchorFix(
                verdict=rec.verdict,
                gamma=_none_to_nan(rec.gamma),
                weight=rec.weight,
                distance_used=_none_to_nan(rec.distance_used),
            )
            for rec in model.anchors
        ],
        quality=model.quality,
        solver_converged=model.converged,
    )
