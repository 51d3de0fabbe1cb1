import math

import numpy as np
import pytest

from nloskit.geometry import Obstruction, Point2, Wall, path_obstructions, segment_crosses_wall


def wall(cx, cy, length, thickness, orientation=0.0, permittivity=6.0):
    return Wall(Point2(cx, cy), length, thickness, orientation, permittivity)


class TestSegmentCrossesWall:
    def test_perpendicular_traversal_through_center(self):
        obs = segment_crosses_wall(Point2(0, 0), Point2(0, 10), wall(0, 5, 4, 0.5))
        assert obs is not None
        assert obs.incidence_angle == pytest.approx(0.0, abs=1e-12)

    def test_segment_missing_rectangle(self):
        assert segment_crosses_wall(Point2(0, 0), Point2(10, 0), wall(0, 5, 4, 0.5)) is None

    def test_45_degree_ray_against_horizontal_wall(self):
        # direction (1,1)/sqrt(2) against the long-face normal (the y-axis)
        obs = segment_crosses_wall(Point2(0, 0), Point2(10, 10), wall(5, 5, 6, 0.4))
        assert obs is not None
        assert obs.incidence_angle == pytest.approx(math.pi / 4, abs=1e-12)

    def test_corner_graze_is_not_a_crossing(self):
        # passes exactly through the corner (1, 0.5): measure-zero intersection
        assert segment_crosses_wall(Point2(0, 1.5), Point2(2, -0.5), wall(0, 0, 2, 1)) is None

    def test_run_along_face_is_not_a_crossing(self):
        assert segment_crosses_wall(Point2(-5, 0.25), Point2(5, 0.25), wall(0, 0, 4, 0.5)) is None

    def test_endpoint_inside_wall_is_obstructed_with_zero_angle(self):
        obs = segment_crosses_wall(Point2(0, 0), Point2(20, 0), wall(0.1, 0, 4, 0.5))
        assert obs == Obstruction(wall(0.1, 0, 4, 0.5), 0.0)

    def test_end_cap_traversal_angle_stays_below_right_angle(self):
        obs = segment_crosses_wall(Point2(-5, 0.1), Point2(5, 0.1), wall(0, 0, 4, 0.5))
        assert obs is not None
        assert 0.0 <= obs.incidence_angle < math.pi / 2

    def test_degenerate_segment_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            segment_crosses_wall(Point2(1, 1), Point2(1, 1), wall(0, 0, 4, 0.5))

    def test_oriented_wall(self):
        # wall rotated to vertical: long axis along y, faces normal to x
        w = wall(5, 5, 4, 0.5, orientation=math.pi / 2)
        obs = segment_crosses_wall(Point2(0, 5), Point2(10, 5), w)
        assert obs is not None
        assert obs.incidence_angle == pytest.approx(0.0, abs=1e-12)
        assert segment_crosses_wall(Point2(0, 8), Point2(10, 8), w) is None


class TestPathObstructions:
    def test_two_perpendicular_crossings_in_order(self):
        walls = [wall(0, 7, 2, 0.4), wall(0, 3, 2, 0.4)]
        obs = path_obstructions(Point2(0, 0), Point2(0, 10), walls)
        assert [o.incidence_angle for o in obs] == [pytest.approx(0.0)] * 2
        assert obs[0].wall.center.y == 3  # nearer wall first
        assert obs[1].wall.center.y == 7

    def test_no_crossing_gives_empty_list(self):
        assert path_obstructions(Point2(0, 0), Point2(1, 0), [wall(5, 5, 2, 0.4)]) == []

    def test_single_crossing_at_30_degrees(self):
        # direction (sin30, cos30): 30 degrees off the long-face normal
        p = Point2(2.0, 0.0)
        q = Point2(2.0 + 2 * math.sin(math.pi / 6), 2 * math.cos(math.pi / 6))
        walls = [wall(-10, 0, 2, 0.2), wall(2.6, 1.0, 2, 0.2)]
        obs = path_obstructions(p, q, walls)
        assert len(obs) == 1
        assert obs[0].incidence_angle == pytest.approx(math.pi / 6, abs=1e-12)


def _random_setup(rng):
    p = Point2(*rng.uniform(-10, 10, 2))
    q = Point2(*rng.uniform(-10, 10, 2))
    thickness = rng.uniform(0.2, 1.0)
    w = Wall(
        Point2(*rng.uniform(-8, 8, 2)),
        rng.uniform(thickness + 0.1, 8.0),
        thickness,
        rng.uniform(0, 2 * math.pi),
        rng.uniform(1, 9),
    )
    return p, q, w


class TestProperties:
    def test_symmetry_under_endpoint_swap(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            p, q, w = _random_setup(rng)
            if p.dist(q) < 1e-6:
                continue
            fwd = segment_crosses_wall(p, q, w)
            rev = segment_crosses_wall(q, p, w)
            assert (fwd is None) == (rev is None)
            if fwd is not None:
                assert fwd.incidence_angle == pytest.approx(rev.incidence_angle, abs=1e-9)

    def test_rigid_transform_equivariance(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            p, q, w = _random_setup(rng)
            if p.dist(q) < 1e-6:
                continue
            theta = rng.uniform(0, 2 * math.pi)
            tx, ty = rng.uniform(-5, 5, 2)
            c, s = math.cos(theta), math.sin(theta)

            def move(pt):
                return Point2(c * pt.x - s * pt.y + tx, s * pt.x + c * pt.y + ty)

            w2 = Wall(move(w.center), w.length, w.thickness, w.orientation + theta, w.permittivity)
            base = segment_crosses_wall(p, q, w)
            moved = segment_crosses_wall(move(p), move(q), w2)
            assert (base is None) == (moved is None)
            if base is not None:
                assert moved.incidence_angle == pytest.approx(base.incidence_angle, abs=1e-9)

    def test_incidence_angle_range(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            p, q, w = _random_setup(rng)
            if p.dist(q) < 1e-6:
                continue
            obs = segment_crosses_wall(p, q, w)
            if obs is not None:
                assert 0.0 <= obs.incidence_angle < math.pi / 2


class TestValidation:
    def test_point_must_be_finite(self):
        with pytest.raises(ValueError):
            Point2(math.inf, 0)

    def test_wall_length_must_exceed_thickness(self):
        with pytest.raises(ValueError):
            Wall(Point2(0, 0), 0.5, 0.5, 0.0, 6.0)

    def test_wall_permittivity_at_least_one(self):
        with pytest.raises(ValueError):
            Wall(Point2(0, 0), 4.0, 0.5, 0.0, 0.5)
