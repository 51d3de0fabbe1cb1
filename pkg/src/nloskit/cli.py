"""Command-line front end.

Subcommands: simulate (run a scenario, Monte-Carlo style), replay (run
estimators over a recorded range log), report (recompute metrics from
persisted fixes), serve (run the HTTP service). All computation happens in
the service; by default the CLI hosts it in-process, with --server pointing
it at a remote instance instead. NLOSKIT_OUT overrides --out.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import io as nio
from . import scenarios
from .client import ApiClient, ApiError, SimulationResult
from .estimators import PositionFix, normalize_estimator
from .geometry import Point2
from .metrics import METRIC_MODES, ErrorReport
from .rangesim import Anchor
from .scenarios import ScenarioFormatError
from .service.models import EstimatorConfigModel
from .svgplot import write_scene_svg

_DEFAULT_ESTIMATORS = "ls,rkf,wls-rkf"


def _out_dir(args) -> Path:
    out = os.environ.get("NLOSKIT_OUT") or args.out
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _parse_estimators(spec: str) -> list[str]:
    names = []
    for part in spec.split(","):
        name = normalize_estimator(part)
        if name not in names:
            names.append(name)
    return names


def _parse_exclude(spec: str | None, lap: int | None) -> tuple[int, int] | None:
    if spec is None:
        return None
    if spec == "lap1":
        if lap is None:
            raise ValueError("--exclude lap1 needs a looping trajectory")
        return (0, lap)
    try:
        lo, hi = spec.split(":")
        return (int(lo), int(hi))
    except ValueError:
        raise ValueError(f"--exclude must be 'lap1' or 'START:END', got {spec!r}") from None


def _load_scenario_object(source: str) -> dict:
    if source in scenarios.BUILTIN_NAMES:
        return scenarios.builtin_scenario(source)
    path = Path(source)
    try:
        return json.loads(path.read_text("utf-8"))
    except FileNotFoundError:
        raise ValueError(f"scenario file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"{path}: not valid JSON ({exc})") from exc


def _estimator_config(dt: float, sigma_m: float, chi2: float) -> EstimatorConfigModel:
    sigma_x = sigma_m if sigma_m > 0.0 else 0.02
    return EstimatorConfigModel(dt=dt, sigma_x=sigma_x, chi2_threshold=chi2)


def _write_reports(out: Path, reports: list[ErrorReport]) -> None:
    nio.write_report_csv(out / "report.csv", reports)
    nio.write_report_text(out / "report.txt", reports)
    for rep in reports:
        nio.write_cdf_csv(out / f"cdf_{rep.estimator.lower()}.csv", rep)


def cmd_simulate(args) -> int:
    out = _out_dir(args)
    obj = _load_scenario_object(args.scenario)
    config = scenarios.parse_scenario(obj)  # fail fast with the offending key
    lap = scenarios.lap_epochs(config)
    exclude = _parse_exclude(args.exclude, lap)
    est_names = _parse_estimators(args.estimators)
    est_config = _estimator_config(config.dt, config.sigma_m, args.chi2)

    with ApiClient(args.server) as client:
        pooled: dict[str, list[PositionFix]] = {name: [] for name in est_names}
        truth: dict[int, Point2] = {}
        first_rep: SimulationResult | None = None
        first_fixes: dict[str, list[PositionFix]] = {}
        for j in range(args.reps):
            sim = client.simulate(obj, seed=args.seed + j)
            rep_dir = out / f"rep{j:03d}"
            rep_dir.mkdir(exist_ok=True)
            nio.write_measurement_log(rep_dir / "log.csv", sim.epochs)
            if j == 0:
                first_rep = sim
                truth = nio.truth_from_log(sim.epochs)
                nio.write_truth(out / "truth.csv", sim.epochs)
            for name in est_names:
                fixes = client.estimate(sim.anchors, sim.epochs, name, est_config)
                nio.write_fixes(rep_dir / f"fixes_{name.lower()}.csv", fixes)
                pooled[name].extend(fixes)
                if j == 0:
                    first_fixes[name] = fixes

        reports = [
            client.report(pooled[name], truth, metric=args.metric, exclude=exclude, label=name)
            for name in est_names
        ]
    _write_reports(out, reports)

    if args.svg and first_rep is not None:
        truth_path = [ep.truth for ep in first_rep.epochs if ep.truth is not None]
        paths = {name: [f.position for f in first_fixes[name]] for name in est_names}
        write_scene_svg(out / "trajectory.svg", first_rep.anchors, first_rep.walls, truth_path, paths)

    for rep in reports:
        print(
            f"{rep.estimator}: rms={rep.rms_cm:.2f} cm  p90={rep.p90_cm:.2f} cm "
            f"({rep.n_epochs} epochs, {rep.exclusion})"
        )
    print(f"artifacts written to {out}")
    return 0


def _load_anchors_file(path: str) -> list[Anchor]:
    try:
        entries = json.loads(Path(path).read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    anchors = []
    for i, entry in enumerate(entries):
        try:
            anchors.append(Anchor(str(entry["name"]), Point2(float(entry["x"]), float(entry["y"]))))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"{path}: anchors[{i}] needs name/x/y") from exc
    return anchors


def cmd_replay(args) -> int:
    out = _out_dir(args)
    log = nio.read_measurement_log(args.log)

    sigma_m = 0.02
    if args.scenario:
        config = scenarios.parse_scenario(_load_scenario_object(args.scenario))
        anchors = config.anchors
        sigma_m = config.sigma_m
    elif args.anchors:
        anchors = _load_anchors_file(args.anchors)
    else:
        raise ValueError("replay needs anchor positions: pass --scenario or --anchors")
    if len(log[0].r) != len(anchors):
        raise ValueError(f"log has {len(log[0].r)} range columns but {len(anchors)} anchors given")

    truth = nio.read_truth(args.truth) if args.truth else nio.truth_from_log(log)
    dt = log[1].t - log[0].t if len(log) > 1 else 0.05
    est_names = _parse_estimators(args.estimators)
    est_config = _estimator_config(dt, sigma_m, args.chi2)
    exclude = _parse_exclude(args.exclude, None)

    reports = []
    with ApiClient(args.server) as client:
        for name in est_names:
            fixes = client.estimate(anchors, log, name, est_config)
            nio.write_fixes(out / f"fixes_{name.lower()}.csv", fixes)
            if truth:
                reports.append(
                    client.report(fixes, truth, metric=args.metric, exclude=exclude, label=name)
                )
    if truth:
        _write_reports(out, reports)
        for rep in reports:
            print(f"{rep.estimator}: rms={rep.rms_cm:.2f} cm  p90={rep.p90_cm:.2f} cm")
    else:
        print("no ground truth available; fixes written, report step skipped")
    print(f"artifacts written to {out}")
    return 0


def cmd_report(args) -> int:
    out = _out_dir(args)
    fixes: list[PositionFix] = []
    for path in args.fixes:
        fixes.extend(nio.read_fixes(path))
    if not fixes:
        raise ValueError("no fixes found in the given files")
    truth = nio.read_truth(args.truth)
    exclude = _parse_exclude(args.exclude, None)
    label = args.name or Path(args.fixes[0]).stem

    with ApiClient(args.server) as client:
        rep = client.report(fixes, truth, metric=args.metric, exclude=exclude, label=label)
    nio.write_report_csv(out / "report.csv", [rep])
    nio.write_report_text(out / "report.txt", [rep])
    nio.write_cdf_csv(out / f"cdf_{label.lower()}.csv", rep)
    print(f"{rep.estimator}: rms={rep.rms_cm:.2f} cm  p90={rep.p90_cm:.2f} cm ({rep.n_epochs} epochs)")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def _add_common(parser: argparse.ArgumentParser, with_estimators: bool = True) -> None:
    parser.add_argument("--out", default="out", help="output directory (NLOSKIT_OUT overrides)")
    parser.add_argument("--server", default=None, help="service URL; default runs in-process")
    parser.add_argument("--metric", default="euclidean", choices=METRIC_MODES)
    parser.add_argument("--exclude", default=None, help="epoch range START:END or 'lap1'")
    if with_estimators:
        parser.add_argument("--estimators", default=_DEFAULT_ESTIMATORS,
                            help="comma-separated subset of ls,rkf,wls-rkf")
        parser.add_argument("--chi2", type=float, default=6.2,
                            help="NLOS gating threshold (chi-square, 1 dof)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nloskit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="simulate a scenario and run estimators")
    p_sim.add_argument("--scenario", required=True, help="bundled name (case1..case4) or JSON path")
    p_sim.add_argument("--reps", type=int, default=1, help="Monte-Carlo repetitions")
    p_sim.add_argument("--seed", type=int, default=1234, help="base seed; rep j uses seed+j")
    svg = p_sim.add_mutually_exclusive_group()
    svg.add_argument("--svg", dest="svg", action="store_true", default=True)
    svg.add_argument("--no-svg", dest="svg", action="store_false")
    _add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_rep = sub.add_parser("replay", help="run estimators over a recorded range log")
    p_rep.add_argument("--log", required=True, help="measurement log CSV")
    p_rep.add_argument("--truth", default=None, help="truth CSV (k,truth_x,truth_y)")
    p_rep.add_argument("--scenario", default=None, help="scenario supplying anchor positions")
    p_rep.add_argument("--anchors", default=None, help="JSON file with [{name,x,y},...]")
    _add_common(p_rep)
    p_rep.set_defaults(func=cmd_replay)

    p_met = sub.add_parser("report", help="recompute metrics from persisted fixes")
    p_met.add_argument("--fixes", nargs="+", required=True, help="fix CSV file(s), pooled in order")
    p_met.add_argument("--truth", required=True, help="truth CSV")
    p_met.add_argument("--name", default=None, help="label for the report row")
    _add_common(p_met, with_estimators=False)
    p_met.set_defaults(func=cmd_report)

    p_srv = sub.add_parser("serve", help="run the HTTP service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ApiError, ScenarioFormatError, nio.LogFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
