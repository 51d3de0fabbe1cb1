"""Trajectory generation and range-measurement simulation.

Each measured range is true distance + through-the-wall (TTW) bias + Gaussian
noise. The TTW bias of one wall traversal is

    b = w (sqrt(eps_r) - 1) + 0.31 w theta^2

for thickness w, relative permittivity eps_r and incidence angle theta;
multiple traversals on one path sum their biases. Noise is drawn from
numpy's PCG64 generator seeded with the scenario's 64-bit seed, one
standard-normal matrix of shape (epochs, anchors) in epoch-major order,
after any ranged wall dimensions have been drawn. Identical configs
therefore produce bit-identical logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Point2, Wall, path_obstructions


class ScenarioValidityError(ValueError):
    """Generated scenario violates the minimum line-of-sight guarantee."""


@dataclass(frozen=True)
class Anchor:
    """Fixed node at a known position."""

    name: str
    position: Point2


@dataclass(frozen=True)
class WallSpec:
    """Wall placement whose length/thickness may be a (lo, hi) sampling range."""

    center: Point2
    length: float | tuple[float, float]
    thickness: float | tuple[float, float]
    orientation: float
    permittivity: float = 6.0

    def resolve(self, rng: np.random.Generator) -> Wall:
        """Fix ranged dimensions by uniform draws (length first, then thickness)."""
        length = self.length
        if isinstance(length, tuple):
            length = float(rng.uniform(length[0], length[1]))
        thickness = self.thickness
        if isinstance(thickness, tuple):
            thickness = float(rng.uniform(thickness[0], thickness[1]))
        return Wall(self.center, length, thickness, self.orientation, self.permittivity)


@dataclass(frozen=True)
class LineSpec:
    start: Point2
    end: Point2
    speed: float


@dataclass(frozen=True)
class RoundedRectSpec:
    center: Point2
    width: float
    height: float
    corner_radius: float
    speed: float
    laps: int


@dataclass
class Trajectory:
    """Uniformly sampled path: times (K,), positions xy (K, 2)."""

    times: np.ndarray
    xy: np.ndarray
    nominal_speed: float

    def __post_init__(self) -> None:
        if len(self.times) != len(self.xy) or len(self.times) < 2:
            raise ValueError("trajectory needs >= 2 samples with matching times")
        dt = np.diff(self.times)
        if np.any(dt <= 0.0) or not np.allclose(dt, dt[0], rtol=0.0, atol=1e-9):
            raise ValueError("timestamps must increase with constant spacing")
        hops = np.hypot(*np.diff(self.xy, axis=0).T)
        if np.any(hops > self.nominal_speed * dt[0] + 1e-9):
            raise ValueError("consecutive positions exceed nominal speed")

    def __len__(self) -> int:
        return len(self.times)

    def point(self, k: int) -> Point2:
        return Point2(float(self.xy[k, 0]), float(self.xy[k, 1]))


@dataclass
class RangeEpoch:
    """One measurement epoch: index, timestamp, per-anchor ranges, optional truth.

    A NaN range marks a missing/invalid measurement for that anchor.
    """

    k: int
    t: float
    r: list[float]
    truth: Point2 | None = None

    def __post_init__(self) -> None:
        for v in self.r:
            if not math.isnan(v) and not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"epoch {self.k}: ranges must be NaN or finite >= 0, got {v}")


@dataclass
class ScenarioConfig:
    name: str
    anchors: list[Anchor]
    walls: list[WallSpec]
    trajectory: LineSpec | RoundedRectSpec
    dt: float
    sigma_m: float
    seed: int

    def __post_init__(self) -> None:
        if len(self.anchors) < 3:
            raise ValueError(f"need at least 3 anchors, got {len(self.anchors)}")
        positions = {(a.position.x, a.position.y) for a in self.anchors}
        if len(positions) != len(self.anchors):
            raise ValueError("anchor positions must be pairwise distinct")
        if self.dt <= 0.0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.sigma_m < 0.0:
            raise ValueError(f"sigma_m must be >= 0, got {self.sigma_m}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


def make_line_trajectory(start: Point2, end: Point2, speed: float, dt: float) -> Trajectory:
    """Constant-speed straight line, sampled every dt from start.

    The last regular sample is the one that does not overshoot the end point;
    the end point itself is appended (one dt later) if not already reached.
    """
    if speed <= 0.0 or dt <= 0.0:
        raise ValueError(f"speed and dt must be > 0, got {speed}, {dt}")
    total = start.dist(end)
    if total == 0.0:
        raise ValueError("start and end coincide")
    step = speed * dt
    n = int(math.floor(total / step + 1e-9))
    fracs = [min(1.0, i * step / total) for i in range(n + 1)]
    pts = [(start.x + f * (end.x - start.x), start.y + f * (end.y - start.y)) for f in fracs]
    if math.hypot(pts[-1][0] - end.x, pts[-1][1] - end.y) > 1e-9:
        pts.append((end.x, end.y))
    times = np.arange(len(pts)) * dt
    return Trajectory(times, np.array(pts), speed)


def _rect_segments(spec: RoundedRectSpec) -> list[tuple[float, object]]:
    """Piecewise arc-length parameterization of the rounded rectangle,
    starting at the midpoint of the bottom edge, counter-clockwise."""
    cx, cy = spec.center.x, spec.center.y
    w, h, r = spec.width, spec.height, spec.corner_radius
    ex, ey = w / 2.0 - r, h / 2.0 - r

    def straight(x0: float, y0: float, dx: float, dy: float):
        return lambda s: (x0 + dx * s, y0 + dy * s)

    def arc(ax: float, ay: float, a0: float):
        return lambda s: (ax + r * math.cos(a0 + s / r), ay + r * math.sin(a0 + s / r))

    quarter = math.pi * r / 2.0
    segs = [
        (ex, straight(cx, cy - h / 2.0, 1.0, 0.0)),
        (quarter, arc(cx + ex, cy - h / 2.0 + r, -math.pi / 2.0)),
        (h - 2.0 * r, straight(cx + w / 2.0, cy - ey, 0.0, 1.0)),
        (quarter, arc(cx + ex, cy + ey, 0.0)),
        (w - 2.0 * r, straight(cx + ex, cy + h / 2.0, -1.0, 0.0)),
        (quarter, arc(cx - ex, cy + ey, math.pi / 2.0)),
        (h - 2.0 * r, straight(cx - w / 2.0, cy + ey, 0.0, -1.0)),
        (quarter, arc(cx - ex, cy - h / 2.0 + r, math.pi)),
        (ex, straight(cx - ex, cy - h / 2.0, 1.0, 0.0)),
    ]
    return [(length, fn) for length, fn in segs if length > 0.0]


def rect_perimeter(spec: RoundedRectSpec) -> float:
    return 2.0 * (spec.width - 2.0 * spec.corner_radius) + 2.0 * (
        spec.height - 2.0 * spec.corner_radius
    ) + 2.0 * math.pi * spec.corner_radius


def make_rounded_rect_trajectory(
    center: Point2,
    width: float,
    height: float,
    corner_radius: float,
    speed: float,
    dt: float,
    laps: int,
) -> Trajectory:
    """Constant-speed loop around a rounded rectangle, counter-clockwise from
    the midpoint of the bottom edge, repeated ``laps`` times."""
    if width <= 0.0 or height <= 0.0:
        raise ValueError(f"width and height must be > 0, got {width} x {height}")
    if not 0.0 <= corner_radius <= min(width, height) / 2.0:
        raise ValueError(f"corner radius {corner_radius} out of range for {width} x {height}")
    if speed <= 0.0 or dt <= 0.0:
        raise ValueError(f"speed and dt must be > 0, got {speed}, {dt}")
    if laps < 1:
        raise ValueError(f"laps must be >= 1, got {laps}")

    spec = RoundedRectSpec(center, width, height, corner_radius, speed, laps)
    segs = _rect_segments(spec)
    perimeter = rect_perimeter(spec)
    n = int(math.floor(laps * perimeter / (speed * dt) + 1e-9))
    pts = []
    for k in range(n + 1):
        s = math.fmod(k * speed * dt, perimeter)
        for length, fn in segs:
            if s <= length:
                pts.append(fn(s))
                break
            s -= length
        else:  # fp spill past the last segment end
            pts.append(segs[-1][1](segs[-1][0]))
    times = np.arange(len(pts)) * dt
    return Trajectory(times, np.array(pts), speed)


def ttw_bias(wall: Wall, incidence_angle: float) -> float:
    """Ranging bias of one through-the-wall traversal, meters."""
    if not 0.0 <= incidence_angle < math.pi / 2.0:
        raise ValueError(f"incidence angle must be in [0, pi/2), got {incidence_angle}")
    w = wall.thickness
    return w * (math.sqrt(wall.permittivity) - 1.0) + 0.31 * w * incidence_angle * incidence_angle


def resolve_walls(config: ScenarioConfig) -> list[Wall]:
    """The wall set simulate() will use: ranged dimensions are drawn from the
    scenario seed before any noise, so this matches the simulation exactly."""
    rng = np.random.default_rng(config.seed)
    return [spec.resolve(rng) for spec in config.walls]


def build_trajectory(config: ScenarioConfig) -> Trajectory:
    spec = config.trajectory
    if isinstance(spec, LineSpec):
        return make_line_trajectory(spec.start, spec.end, spec.speed, config.dt)
    return make_rounded_rect_trajectory(
        spec.center, spec.width, spec.height, spec.corner_radius, spec.speed, config.dt, spec.laps
    )


def simulate(config: ScenarioConfig) -> list[RangeEpoch]:
    """Generate the measurement log for a scenario.

    Every epoch is guaranteed at least 2 line-of-sight anchors; a layout that
    violates this raises ScenarioValidityError instead of producing a log the
    estimators cannot be expected to handle.
    """
    rng = np.random.default_rng(config.seed)
    walls = [spec.resolve(rng) for spec in config.walls]
    traj = build_trajectory(config)
    n_anchors = len(config.anchors)
    noise = rng.normal(0.0, config.sigma_m, size=(len(traj), n_anchors))

    epochs: list[RangeEpoch] = []
    for k in range(len(traj)):
        pos = traj.point(k)
        ranges: list[float] = []
        los = 0
        for i, anchor in enumerate(config.anchors):
            d = pos.dist(anchor.position)
            obstructions = path_obstructions(pos, anchor.position, walls)
            if not obstructions:
                los += 1
            bias = sum(ttw_bias(o.wall, o.incidence_angle) for o in obstructions)
            ranges.append(float(d + bias + noise[k, i]))
        if los < 2:
            raise ScenarioValidityError(
                f"epoch {k}: only {los} line-of-sight anchor(s); scenario layout invalid"
            )
        epochs.append(RangeEpoch(k, float(traj.times[k]), ranges, pos))
    return epochs
