"""2-D primitives: points, oriented wall rectangles, and segment crossings.

Walls are filled oriented rectangles. A signal path is obstructed when the
open segment between two nodes passes through a wall's interior with positive
length; the incidence angle against the wall's long-face normal feeds the
through-the-wall ranging bias model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Slack for "strictly inside" tests so nodes sitting exactly on a wall face
# (a common layout in the bundled scenarios) are not counted as embedded.
_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class Point2:
    """Planar point, coordinates in meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"coordinates must be finite, got ({self.x}, {self.y})")

    def dist(self, other: Point2) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Wall:
    """Oriented rectangular obstacle.

    The wall occupies the closed rectangle of extent length x thickness
    around ``center``, with the long axis rotated by ``orientation`` radians
    from the x-axis. ``permittivity`` is the material's real relative
    permittivity (>= 1; 1 behaves like air).
    """

    center: Point2
    length: float
    thickness: float
    orientation: float
    permittivity: float = 6.0

    def __post_init__(self) -> None:
        if not (self.length > self.thickness > 0.0):
            raise ValueError(
                f"wall requires length > thickness > 0, got {self.length} x {self.thickness}"
            )
        if self.permittivity < 1.0:
            raise ValueError(f"permittivity must be >= 1, got {self.permittivity}")

    def to_frame(self, p: Point2) -> tuple[float, float]:
        """Coordinates of p in the wall frame (long axis = x, center = origin)."""
        c = math.cos(self.orientation)
        s = math.sin(self.orientation)
        dx = p.x - self.center.x
        dy = p.y - self.center.y
        return dx * c + dy * s, -dx * s + dy * c

    def contains(self, p: Point2) -> bool:
        """True if p lies strictly inside the rectangle."""
        u, v = self.to_frame(p)
        return (
            abs(u) < self.length / 2.0 - _EDGE_TOL
            and abs(v) < self.thickness / 2.0 - _EDGE_TOL
        )


@dataclass(frozen=True)
class Obstruction:
    """One wall crossed by a signal path.

    incidence_angle is measured between the path direction and the wall's
    long-face normal, folded into [0, pi/2); 0 means perpendicular traversal.
    """

    wall: Wall
    incidence_angle: float


def _clip_to_wall(p: Point2, q: Point2, wall: Wall) -> tuple[float, float, float] | None:
    """Clip segment pq to the wall rectangle (Liang-Barsky in the wall frame).

    Returns (t_entry, t_exit, incidence_angle) for a positive-length interior
    crossing, else None. Corner grazes and runs along a face clip to an
    interval whose midpoint is not strictly inside and are rejected.
    """
    ux, uy = wall.to_frame(p)
    vx, vy = wall.to_frame(q)
    dx = vx - ux
    dy = vy - uy
    half_l = wall.length / 2.0
    half_t = wall.thickness / 2.0

    t0, t1 = 0.0, 1.0
    for delta, lo, hi in ((dx, -half_l - ux, half_l - ux), (dy, -half_t - uy, half_t - uy)):
        if abs(delta) < _EDGE_TOL:
            if lo > 0.0 or hi < 0.0:
                return None
            continue
        ta, tb = lo / delta, hi / delta
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
        if t0 >= t1:
            return None
    if t1 - t0 < _EDGE_TOL:
        return None

    # Positive-length overlap with the *interior*: the clipped midpoint must
    # sit strictly inside, which drops segments running along a face.
    tm = 0.5 * (t0 + t1)
    mx, my = ux + tm * dx, uy + tm * dy
    if not (abs(mx) < half_l - _EDGE_TOL and abs(my) < half_t - _EDGE_TOL):
        return None

    norm = math.hypot(dx, dy)
    angle = math.acos(min(1.0, abs(dy) / norm))
    # A run parallel to the long axis through the end caps hits exactly pi/2;
    # clamp just inside the open bound.
    angle = min(angle, math.nextafter(math.pi / 2.0, 0.0))
    return t0, t1, angle


def segment_crosses_wall(p: Point2, q: Point2, wall: Wall) -> Obstruction | None:
    """Obstruction of the open segment pq by a wall, or None for line of sight.

    A node located inside the wall counts as obstructed with incidence angle 0
    (degenerate placement, traversal direction is meaningless). Grazing a
    corner or running exactly along a face is not a crossing.
    """
    if p.x == q.x and p.y == q.y:
        raise ValueError("degenerate segment: p == q")
    if wall.contains(p) or wall.contains(q):
        return Obstruction(wall, 0.0)
    clipped = _clip_to_wall(p, q, wall)
    if clipped is None:
        return None
    return Obstruction(wall, clipped[2])


def path_obstructions(p: Point2, q: Point2, walls: list[Wall]) -> list[Obstruction]:
    """All walls crossed by segment pq, ordered by entry point from p."""
    if p.x == q.x and p.y == q.y:
        raise ValueError("degenerate segment: p == q")
    hits: list[tuple[float, Obstruction]] = []
    for wall in walls:
        if wall.contains(p):
            hits.append((0.0, Obstruction(wall, 0.0)))
            continue
        clipped = _clip_to_wall(p, q, wall)
        if wall.contains(q):
            entry = clipped[0] if clipped is not None else 1.0
            hits.append((entry, Obstruction(wall, 0.0)))
        elif clipped is not None:
            hits.append((clipped[0], Obstruction(wall, clipped[2])))
    hits.sort(key=lambda h: h[0])
    return [obs for _, obs in hits]
