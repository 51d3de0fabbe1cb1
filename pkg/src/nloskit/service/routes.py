"""HTTP endpoints wrapping the core pipeline.

Batch endpoints (/simulate, /estimate, /report) are stateless; /sessions
holds a live filter bank per client for streaming use, protected by a lock
since each pipeline owns its bank exclusively.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field

from fastapi import APIRouter, FastAPI, HTTPException

from .. import __version__, metrics, scenarios
from ..estimators import (
    EstimatorConfig,
    PipelineError,
    PositionFix,
    ls_step,
    normalize_estimator,
    rkf_step,
    run_pipeline,
    wlsrkf_step,
)
from ..geometry import Point2
from ..kfbank import KfState, kf_empty
from ..rangesim import Anchor, RangeEpoch, ScenarioValidityError, resolve_walls, simulate
from . import models as m

router = APIRouter()


@dataclass
class _Session:
    anchors: list[Anchor]
    estimator: str
    config: EstimatorConfig
    bank: list[KfState]
    prev_fix: PositionFix | None = None
    epochs_processed: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)


_sessions: dict[str, _Session] = {}
_sessions_lock = threading.Lock()


def _bad_request(exc: Exception) -> HTTPException:
    return HTTPException(status_code=400, detail=str(exc))


@router.get("/health", response_model=m.HealthResponse)
def health() -> m.HealthResponse:
    return m.HealthResponse(status="ok", version=__version__)


@router.get("/scenarios", response_model=m.ScenarioListResponse)
def scenario_list() -> m.ScenarioListResponse:
    return m.ScenarioListResponse(names=list(scenarios.BUILTIN_NAMES))


@router.get("/scenarios/{name}")
def scenario_get(name: str) -> dict:
    if name not in scenarios.BUILTIN_NAMES:
        raise HTTPException(status_code=404, detail=f"no bundled scenario named {name!r}")
    return scenarios.builtin_scenario(name)


@router.post("/simulate", response_model=m.SimulateResponse)
def simulate_scenario(req: m.SimulateRequest) -> m.SimulateResponse:
    obj = dict(req.scenario)
    if req.seed is not None:
        obj["seed"] = req.seed
    try:
        config = scenarios.parse_scenario(obj)
        epochs = simulate(config)
        walls = resolve_walls(config)
    except (scenarios.ScenarioFormatError, ScenarioValidityError, ValueError) as exc:
        raise _bad_request(exc) from exc
    return m.SimulateResponse(
        name=config.name,
        anchors=m.anchors_to_wire(config.anchors),
        walls=[m.wall_to_wire(w) for w in walls],
        epochs=[m.epoch_to_wire(ep) for ep in epochs],
    )


@router.post("/estimate", response_model=m.EstimateResponse)
def estimate(req: m.EstimateRequest) -> m.EstimateResponse:
    try:
        name = normalize_estimator(req.estimator)
        anchors = m.anchors_to_core(req.anchors)
        log = [m.epoch_to_core(ep) for ep in req.epochs]
        config = m.config_to_core(req.config)
        fixes = run_pipeline(name, log, anchors, config)
    except (PipelineError, ValueError) as exc:
        raise _bad_request(exc) from exc
    return m.EstimateResponse(estimator=name, fixes=[m.fix_to_wire(f) for f in fixes])


@router.post("/report", response_model=m.ReportResponse)
def report(req: m.ReportRequest) -> m.ReportResponse:
    truth = {k: Point2(x, y) for k, x, y in req.truth}
    fixes = [
        PositionFix(k=k, t=0.0, position=Point2(x, y)) for k, x, y in req.points
    ]
    exclude = None
    exclusion = "none"
    if req.exclude_start is not None or req.exclude_end is not None:
        lo = req.exclude_start if req.exclude_start is not None else 0
        hi = req.exclude_end
        if hi is None:
            raise _bad_request(ValueError("exclude_end is required when excluding a range"))
        exclude = lambda k: lo <= k < hi  # noqa: E731
        exclusion = f"epochs [{lo}:{hi}) excluded"
    try:
        errors = metrics.compute_errors(fixes, truth, mode=req.metric)
        rep = metrics.summarize(errors, exclude=exclude, estimator=req.label, exclusion=exclusion)
    except ValueError as exc:
        raise _bad_request(exc) from exc
    return m.ReportResponse(
        estimator=rep.estimator,
        n_epochs=rep.n_epochs,
        rms_cm=rep.rms_cm,
        p90_cm=rep.p90_cm,
        cdf=rep.cdf,
        exclusion=rep.exclusion,
    )


@router.post("/sessions", response_model=m.SessionCreateResponse, status_code=201)
def session_create(req: m.SessionCreateRequest) -> m.SessionCreateResponse:
    try:
        name = normalize_estimator(req.estimator)
        anchors = m.anchors_to_core(req.anchors)
        config = m.config_to_core(req.config)
    except ValueError as exc:
        raise _bad_request(exc) from exc
    session = _Session(anchors, name, config, [kf_empty(config.kf) for _ in anchors])
    session_id = uuid.uuid4().hex
    with _sessions_lock:
        _sessions[session_id] = session
    return m.SessionCreateResponse(session_id=session_id, estimator=name)


def _get_session(session_id: str) -> _Session:
    with _sessions_lock:
        session = _sessions.get(session_id)
    if session is None:
        raise HTTPException(status_code=404, detail=f"no session {session_id!r}")
    return session


@router.get("/sessions/{session_id}", response_model=m.SessionInfoResponse)
def session_info(session_id: str) -> m.SessionInfoResponse:
    session = _get_session(session_id)
    return m.SessionInfoResponse(
        session_id=session_id,
        estimator=session.estimator,
        epochs_processed=session.epochs_processed,
    )


@router.post("/sessions/{session_id}/epochs", response_model=m.FixModel)
def session_step(session_id: str, req: m.SessionEpochRequest) -> m.FixModel:
    session = _get_session(session_id)
    with session.lock:
        epoch = RangeEpoch(
            session.epochs_processed,
            req.t,
            [v if v is not None else float("nan") for v in req.r],
        )
        try:
            if session.estimator == "LS":
                fix = ls_step(epoch, session.anchors, session.config, session.prev_fix)
            elif session.estimator == "RKF":
                fix, session.bank = rkf_step(
                    session.bank, epoch, session.anchors, session.config, session.prev_fix
                )
            else:
                fix, session.bank = wlsrkf_step(
                    session.bank, epoch, session.anchors, session.config, session.prev_fix
                )
        except ValueError as exc:
            raise _bad_request(exc) from exc
        session.prev_fix = fix
        session.epochs_processed += 1
    return m.fix_to_wire(fix)


@router.delete("/sessions/{session_id}", status_code=204)
def session_delete(session_id: str) -> None:
    with _sessions_lock:
        if _sessions.pop(session_id, None) is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")


def create_app() -> FastAPI:
    app = FastAPI(title="nloskit", version=__version__)
    app.include_router(router)
    return app
