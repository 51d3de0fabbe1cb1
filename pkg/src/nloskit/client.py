"""Client for the positioning service.

Talks to a remote server when given a base URL; otherwise runs the service
in-process (no socket) so the CLI works standalone with identical behavior.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import httpx

from .estimators import PositionFix
from .geometry import Point2, Wall
from .metrics import ErrorReport
from .rangesim import Anchor, RangeEpoch
from .service import create_app
from .service import models as m


class ApiError(RuntimeError):
    """Non-success response from the service."""

    def __init__(self, status: int, detail: str):
        super().__init__(f"service returned {status}: {detail}")
        self.status = status
        self.detail = detail


@dataclass
class SimulationResult:
    name: str
    anchors: list[Anchor]
    walls: list[Wall]
    epochs: list[RangeEpoch]


class ApiClient:
    def __init__(self, server: str | None = None):
        if server:
            self._client: httpx.Client = httpx.Client(base_url=server, timeout=300.0)
        else:
            # Sync in-process ASGI bridge; httpx's own ASGITransport is
            # async-only, so the starlette test client does the job here.
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from starlette.testclient import TestClient

                self._client = TestClient(create_app())

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> ApiClient:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _call(self, method: str, path: str, json_body: dict | None = None) -> dict | list | None:
        resp = self._client.request(method, path, json=json_body)
        if resp.status_code >= 400:
            try:
                detail = resp.json().get("detail", resp.text)
            except Exception:
                detail = resp.text
            raise ApiError(resp.status_code, str(detail))
        if resp.status_code == 204:
            return None
        return resp.json()

    # ------------------------------------------------------------------

    def health(self) -> dict:
        return self._call("GET", "/health")

    def scenario_names(self) -> list[str]:
        return self._call("GET", "/scenarios")["names"]

    def get_scenario(self, name: str) -> dict:
        return self._call("GET", f"/scenarios/{name}")

    def simulate(self, scenario: dict, seed: int | None = None) -> SimulationResult:
        body = {"scenario": scenario, "seed": seed}
        data = m.SimulateResponse.model_validate(self._call("POST", "/simulate", body))
        return SimulationResult(
            name=data.name,
            anchors=m.anchors_to_core(data.anchors),
            walls=[m.wall_to_core(w) for w in data.walls],
            epochs=[m.epoch_to_core(ep) for ep in data.epochs],
        )

    def estimate(
        self,
        anchors: list[Anchor],
        epochs: list[RangeEpoch],
        estimator: str,
        config: m.EstimatorConfigModel,
    ) -> list[PositionFix]:
        body = {
            "anchors": [am.model_dump() for am in m.anchors_to_wire(anchors)],
            "epochs": [m.epoch_to_wire(ep).model_dump() for ep in epochs],
            "estimator": estimator,
            "config": config.model_dump(),
        }
        data = m.EstimateResponse.model_validate(self._call("POST", "/estimate", body))
        return [m.fix_to_core(f) for f in data.fixes]

    def report(
        self,
        fixes: list[PositionFix],
        truth: dict[int, Point2],
        metric: str = "euclidean",
        exclude: tuple[int, int] | None = None,
        label: str = "",
    ) -> ErrorReport:
        body = {
            "points": [(f.k, f.position.x, f.position.y) for f in fixes],
            "truth": [(k, p.x, p.y) for k, p in sorted(truth.items())],
            "metric": metric,
            "exclude_start": exclude[0] if exclude else None,
            "exclude_end": exclude[1] if exclude else None,
            "label": label,
        }
        data = m.ReportResponse.model_validate(self._call("POST", "/report", body))
        return ErrorReport(
            estimator=data.estimator,
            n_epochs=data.n_epochs,
            rms_cm=data.rms_cm,
            p90_cm=data.p90_cm,
            cdf=[(e, fr) for e, fr in data.cdf],
            exclusion=data.exclusion,
        )
