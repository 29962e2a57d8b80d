import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from biolidar_slam.geometry import (GeometryError, Pose, PoseDelta, Scan, between, compose,
                                    normalize_angle, normalize_angles, scan_to_points,
                                    transform_point, transform_points)

finite = st.floats(-1e6, 1e6, allow_nan=False)
coord = st.floats(-1e3, 1e3, allow_nan=False)


def scan_of(ranges, angle_min=0.0, inc=math.pi / 2, rmax=10.0):
    return Scan(np.array(ranges, dtype=float), angle_min, inc, rmax)


class TestNormalizeAngle:
    def test_examples(self):
        assert normalize_angle(0.0) == 0.0
        assert normalize_angle(3 * math.pi) == pytest.approx(-math.pi)
        assert normalize_angle(-5 * math.pi / 2) == pytest.approx(-math.pi / 2)

    def test_half_open_interval(self):
        assert normalize_angle(math.pi) == -math.pi
        assert normalize_angle(-math.pi) == -math.pi

    def test_rejects_non_finite(self):
        for bad in (math.inf, -math.inf, math.nan):
            with pytest.raises(GeometryError):
                normalize_angle(bad)

    @given(finite)
    def test_range_and_congruence(self, a):
        r = normalize_angle(a)
        assert -math.pi <= r < math.pi
        k = (a - r) / (2 * math.pi)
        assert abs(k - round(k)) < 1e-6

    @given(finite)
    def test_idempotent(self, a):
        r = normalize_angle(a)
        assert normalize_angle(r) == r

    @given(st.lists(finite, min_size=1, max_size=20))
    def test_vectorized_matches_scalar(self, xs):
        np.testing.assert_array_equal(normalize_angles(np.array(xs)),
                                      [normalize_angle(x) for x in xs])


class TestTransform:
    def test_examples(self):
        assert transform_point(Pose(0, 0, 0), (1, 2)) == (1, 2)
        np.testing.assert_allclose(transform_point(Pose(1, 0, math.pi / 2), (1, 0)), (1, 1), atol=1e-12)
        np.testing.assert_allclose(transform_point(Pose.of(2, 3, math.pi), (1, 1)), (1, 2), atol=1e-12)

    @given(coord, coord)
    def test_identity_exact(self, x, y):
        assert transform_point(Pose(0.0, 0.0, 0.0), (x, y)) == (x, y)

    @given(coord, coord, st.floats(-10, 10), coord, coord, coord, coord)
    def test_preserves_distances(self, px, py, th, ax, ay, bx, by):
        p = Pose.of(px, py, th)
        a, b = transform_point(p, (ax, ay)), transform_point(p, (bx, by))
        assert math.dist(a, b) == pytest.approx(math.dist((ax, ay), (bx, by)), abs=1e-9)

    def test_vectorized(self, rng):
        p = Pose.of(0.3, -2.0, 1.1)
        pts = rng.normal(size=(50, 2))
        np.testing.assert_allclose(transform_points(p, pts),
                                   [transform_point(p, tuple(q)) for q in pts], atol=1e-12)


class TestCompose:
    def test_identity(self):
        assert compose(Pose(0, 0, 0), PoseDelta(0, 0, 0)) == Pose(0, 0, 0)

    def test_wrap_case(self):
        p = compose(Pose(0, 0, 0), PoseDelta(1, 0, math.pi))
        assert (p.x, p.y, p.theta) == (1.0, 0.0, -math.pi)

    def test_repeated_quarter_turns(self):
        # pi/2 + pi/2 + pi/2 = 3pi/2, which wraps to -pi/2
        p = Pose.of(1, 1, math.pi / 2)
        for _ in range(2):
            p = compose(p, PoseDelta(0, 0, math.pi / 2))
        assert p.theta == pytest.approx(-math.pi / 2)
        assert (p.x, p.y) == (1.0, 1.0)

    def test_delta_is_robot_frame(self):
        p = compose(Pose.of(1, 1, math.pi / 2), PoseDelta(1, 0, 0))
        assert p.x == pytest.approx(1.0) and p.y == pytest.approx(2.0)

    @given(coord, coord, st.floats(-4, 4), coord, coord, st.floats(-4, 4))
    def test_between_inverts_compose(self, x, y, t, dx, dy, dt):
        a = Pose.of(x, y, t)
        d = PoseDelta.of(dx, dy, dt)
        b = compose(a, d)
        back = between(a, b)
        assert back.dx == pytest.approx(d.dx, abs=1e-7)
        assert back.dy == pytest.approx(d.dy, abs=1e-7)
        assert math.cos(back.dtheta - d.dtheta) == pytest.approx(1.0, abs=1e-12)


class TestScan:
    def test_invariants(self):
        with pytest.raises(GeometryError):
            scan_of([1.0])
        with pytest.raises(GeometryError):
            Scan(np.ones(4), 0.0, 0.0, 10.0)
        with pytest.raises(GeometryError):
            scan_of([1.0, math.nan])
        with pytest.raises(GeometryError):
            scan_of([1.0, 0.0])
        with pytest.raises(GeometryError):
            scan_of([1.0, 11.0])

    def test_invalid_marker_and_fill(self):
        s = scan_of([1.0, math.inf, 2.0, math.inf])
        np.testing.assert_array_equal(s.valid, [True, False, True, False])
        np.testing.assert_array_equal(s.filled(), [1.0, 10.0, 2.0, 10.0])

    def test_immutable(self):
        s = scan_of([1.0, 2.0])
        with pytest.raises(ValueError):
            s.ranges[0] = 3.0


class TestScanToPoints:
    def test_examples(self):
        np.testing.assert_allclose(scan_to_points(scan_of([1.0, math.inf])), [[1.0, 0.0]], atol=1e-12)
        np.testing.assert_allclose(scan_to_points(scan_of([math.inf, 2.0])), [[0.0, 2.0]], atol=1e-12)
        np.testing.assert_allclose(scan_to_points(scan_of([1, 1, 1, 1])),
                                   [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-12)

    def test_rejects_empty(self):
        with pytest.raises(GeometryError):
            scan_to_points(scan_of([math.inf, math.inf]))

    @given(st.lists(st.floats(0.01, 10.0), min_size=2, max_size=64), st.floats(-math.pi, math.pi))
    def test_polar_round_trip(self, ranges, a0):
        s = Scan(np.array(ranges), a0, 2 * math.pi / len(ranges), 10.0)
        pts = scan_to_points(s)
        np.testing.assert_allclose(np.hypot(pts[:, 0], pts[:, 1]), ranges, atol=1e-9)
        ang = np.arctan2(pts[:, 1], pts[:, 0])
        np.testing.assert_allclose(np.cos(ang - s.angles), 1.0, atol=1e-9)
