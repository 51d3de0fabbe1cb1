"""Bundled benchmark scenarios and the strict scenario-file schema.

Scenario files are JSON with an explicit ``schema_version``; unknown keys are
rejected so a typo in a physics parameter cannot silently fall back to a
default. Four scenarios ship with the package:

  case1  four corner anchors, straight line run, one wall
  case2  case1 plus a fifth anchor outside the square
  case3  four corner anchors, two laps around a rounded rectangle, two
         orthogonal walls
  case4  case3 plus the fifth anchor

Anchor coordinates, speeds, noise level and wall-dimension ranges follow the
reference setup; exact wall placement is chosen so each straight run starts
with every path unobstructed and paths drop to NLOS one after another as the
tag moves.
"""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path

from ..geometry import Point2
from ..rangesim import (
    Anchor,
    LineSpec,
    RoundedRectSpec,
    ScenarioConfig,
    WallSpec,
    rect_perimeter,
)

SCHEMA_VERSION = 1
BUILTIN_NAMES = ("case1", "case2", "case3", "case4")


class ScenarioFormatError(ValueError):
    """Scenario JSON violates the schema; the message names the bad key."""


def builtin_scenario(name: str) -> dict:
    """Raw JSON object of a bundled scenario."""
    if name not in BUILTIN_NAMES:
        raise ScenarioFormatError(
            f"unknown bundled scenario {name!r}; available: {', '.join(BUILTIN_NAMES)}"
        )
    text = resources.files(__package__).joinpath(f"{name}.json").read_text("utf-8")
    return json.loads(text)


def _require(obj: dict, key: str, ctx: str):
    if key not in obj:
        raise ScenarioFormatError(f"missing key '{key}' in {ctx}")
    return obj[key]


def _no_unknown(obj: dict, allowed: set[str], ctx: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ScenarioFormatError(f"unknown key '{key}' in {ctx}")


def _num(value, key: str, ctx: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ScenarioFormatError(f"key '{key}' in {ctx} must be a number")
    return float(value)


def _point(value, key: str, ctx: str) -> Point2:
    if not (isinstance(value, list) and len(value) == 2):
        raise ScenarioFormatError(f"key '{key}' in {ctx} must be an [x, y] pair")
    return Point2(_num(value[0], key, ctx), _num(value[1], key, ctx))


def _dimension(value, key: str, ctx: str) -> float | tuple[float, float]:
    """A wall dimension: a number, or a [lo, hi] range sampled per scenario seed."""
    if isinstance(value, list):
        if len(value) != 2:
            raise ScenarioFormatError(f"key '{key}' in {ctx} must be a number or [lo, hi]")
        lo, hi = _num(value[0], key, ctx), _num(value[1], key, ctx)
        if not 0.0 < lo <= hi:
            raise ScenarioFormatError(f"key '{key}' in {ctx}: invalid range [{lo}, {hi}]")
        return (lo, hi)
    return _num(value, key, ctx)


def parse_scenario(obj: dict) -> ScenarioConfig:
    """Validate a scenario JSON object and build the simulation config."""
    if not isinstance(obj, dict):
        raise ScenarioFormatError("scenario must be a JSON object")
    _no_unknown(
        obj,
        {"schema_version", "name", "description", "anchors", "walls", "trajectory",
         "dt", "sigma_m", "seed"},
        "scenario",
    )
    version = _require(obj, "schema_version", "scenario")
    if version != SCHEMA_VERSION:
        raise ScenarioFormatError(f"unsupported schema_version {version!r}")
    name = _require(obj, "name", "scenario")
    if not isinstance(name, str):
        raise ScenarioFormatError("key 'name' in scenario must be a string")

    anchors = []
    for i, entry in enumerate(_require(obj, "anchors", "scenario")):
        ctx = f"anchors[{i}]"
        _no_unknown(entry, {"name", "x", "y"}, ctx)
        anchors.append(
            Anchor(
                str(_require(entry, "name", ctx)),
                Point2(_num(_require(entry, "x", ctx), "x", ctx),
                       _num(_require(entry, "y", ctx), "y", ctx)),
            )
        )

    walls = []
    for i, entry in enumerate(obj.get("walls", [])):
        ctx = f"walls[{i}]"
        _no_unknown(entry, {"center", "length", "thickness", "orientation", "permittivity"}, ctx)
        walls.append(
            WallSpec(
                center=_point(_require(entry, "center", ctx), "center", ctx),
                length=_dimension(_require(entry, "length", ctx), "length", ctx),
                thickness=_dimension(_require(entry, "thickness", ctx), "thickness", ctx),
                orientation=_num(_require(entry, "orientation", ctx), "orientation", ctx),
                permittivity=_num(entry.get("permittivity", 6.0), "permittivity", ctx),
            )
        )

    traj_obj = _require(obj, "trajectory", "scenario")
    kind = _require(traj_obj, "kind", "trajectory")
    if kind == "line":
        _no_unknown(traj_obj, {"kind", "start", "end", "speed"}, "trajectory")
        trajectory: LineSpec | RoundedRectSpec = LineSpec(
            start=_point(_require(traj_obj, "start", "trajectory"), "start", "trajectory"),
            end=_point(_require(traj_obj, "end", "trajectory"), "end", "trajectory"),
            speed=_num(_require(traj_obj, "speed", "trajectory"), "speed", "trajectory"),
        )
    elif kind == "rounded_rect":
        _no_unknown(
            traj_obj,
            {"kind", "center", "width", "height", "corner_radius", "speed", "laps"},
            "trajectory",
        )
        laps = _require(traj_obj, "laps", "trajectory")
        if not isinstance(laps, int) or isinstance(laps, bool):
            raise ScenarioFormatError("key 'laps' in trajectory must be an integer")
        trajectory = RoundedRectSpec(
            center=_point(_require(traj_obj, "center", "trajectory"), "center", "trajectory"),
            width=_num(_require(traj_obj, "width", "trajectory"), "width", "trajectory"),
            height=_num(_require(traj_obj, "height", "trajectory"), "height", "trajectory"),
            corner_radius=_num(
                _require(traj_obj, "corner_radius", "trajectory"), "corner_radius", "trajectory"
            ),
            speed=_num(_require(traj_obj, "speed", "trajectory"), "speed", "trajectory"),
            laps=laps,
        )
    else:
        raise ScenarioFormatError(f"unknown trajectory kind {kind!r}")

    seed = _require(obj, "seed", "scenario")
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ScenarioFormatError("key 'seed' in scenario must be an integer")

    try:
        return ScenarioConfig(
            name=name,
            anchors=anchors,
            walls=walls,
            trajectory=trajectory,
            dt=_num(_require(obj, "dt", "scenario"), "dt", "scenario"),
            sigma_m=_num(_require(obj, "sigma_m", "scenario"), "sigma_m", "scenario"),
            seed=seed,
        )
    except ValueError as exc:
        raise ScenarioFormatError(str(exc)) from exc


def load_scenario(source: str | Path) -> ScenarioConfig:
    """Load a scenario by bundled name or file path."""
    if isinstance(source, str) and source in BUILTIN_NAMES:
        return parse_scenario(builtin_scenario(source))
    path = Path(source)
    try:
        obj = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"{path}: not valid JSON ({exc})") from exc
    return parse_scenario(obj)


def lap_epochs(config: ScenarioConfig) -> int | None:
    """Number of epochs in one lap for looping trajectories, else None."""
    spec = config.trajectory
    if not isinstance(spec, RoundedRectSpec):
        return None
    per_lap = rect_perimeter(spec) / (spec.speed * config.dt)
    return int(math.floor(per_lap)) + 1
