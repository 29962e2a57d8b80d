import math

import numpy as np
import pytest
from scipy.interpolate import RegularGridInterpolator

from biolidar_slam import odometry as od
from biolidar_slam import scenarios
from biolidar_slam.geometry import Pose, Scan
from biolidar_slam.sim import LidarModel, MazeLayout, TrajectoryScript, World, build_maze_world, raycast, run_trajectory

QUIET = LidarModel(range_noise_sigma=0.0)


def symmetric_room():
    # walls on cell centres on every pyramid level and mirror-symmetric
    # about the map-frame origin, so the matching objective is stationary
    # at the true pose
    h = 2.025
    return World.from_segments([((-h, -h), (h, -h)), ((h, -h), (h, h)),
                                ((h, h), (-h, h)), ((-h, h), (-h, -h))], (-3, -3, 3, 3))


def seeded_state(world, pose=Pose(0, 0, 0), model=QUIET, seed=0, **cfg):
    st = od.OdometryState(od.OdometryConfig(**cfg))
    od.integrate_scan(st, raycast(world, pose, model, seed), st.pose)
    return st


class TestInterpolate:
    def test_cell_centre_is_node_value(self):
        m = od.LocalMap(0.5, 6, (0.0, 0.0))
        m.log_odds[2, 3] = 1.3
        val, _ = od.interpolate(od.ContinuousMapView(m), (2.5 * 0.5, 3.5 * 0.5))
        assert val == pytest.approx(1 / (1 + math.exp(-1.3)), abs=1e-15)

    def test_uniform_map(self, rng):
        m = od.LocalMap(0.1, 20, (-1.0, -1.0))
        view = od.ContinuousMapView(m)
        for xy in rng.uniform(-0.9, 0.9, size=(20, 2)):
            val, g = od.interpolate(view, tuple(xy))
            assert val == 0.5 and g == (0.0, 0.0)

    def test_midpoint_of_empty_and_full(self):
        m = od.LocalMap(1.0, 4, (0.0, 0.0))
        m.log_odds[:2, :] = -50.0
        m.log_odds[2:, :] = 50.0
        val, _ = od.interpolate(od.ContinuousMapView(m), (2.0, 1.5))
        assert val == pytest.approx(0.5, abs=1e-15)

    def test_outside_reads_unknown(self):
        m = od.LocalMap(1.0, 4, (0.0, 0.0))
        m.log_odds[:] = 2.0
        view = od.ContinuousMapView(m)
        for xy in [(-1.0, 1.0), (0.2, 2.0), (3.9, 2.0), (2.0, 10.0)]:
            assert od.interpolate(view, xy) == (0.0, (0.0, 0.0))

    def test_matches_dense_oracle(self, rng):
        m = od.LocalMap(0.05, 60, (-1.2, 0.4))
        m.log_odds[:] = rng.uniform(-4, 4, m.log_odds.shape)
        centres_x = m.origin[0] + (np.arange(60) + 0.5) * 0.05
        centres_y = m.origin[1] + (np.arange(60) + 0.5) * 0.05
        oracle = RegularGridInterpolator((centres_x, centres_y), m.probability(), method="linear")
        xy = np.column_stack((rng.uniform(centres_x[0], centres_x[-1] - 1e-9, 1000),
                              rng.uniform(centres_y[0], centres_y[-1] - 1e-9, 1000)))
        val, _, _ = od.ContinuousMapView(m).sample(xy)
        np.testing.assert_allclose(val, oracle(xy), atol=1e-9)
        assert np.all((val >= 0) & (val <= 1))

    def test_gradient_finite_differences(self, rng):
        m = od.LocalMap(0.05, 60, (0.0, 0.0))
        m.log_odds[:] = rng.uniform(-4, 4, m.log_odds.shape)
        view = od.ContinuousMapView(m)
        h = 1e-5
        checked = 0
        for x, y in rng.uniform(0.2, 2.8, size=(300, 2)):
            fu = (x - m.origin[0]) / m.resolution - 0.5
            fv = (y - m.origin[1]) / m.resolution - 0.5
            # stay away from the kinks on cell-centre lines
            if min(abs(fu - round(fu)), abs(fv - round(fv))) * m.resolution < 3 * h:
                continue
            _, (gx, gy) = od.interpolate(view, (x, y))
            fx = (od.interpolate(view, (x + h, y))[0] - od.interpolate(view, (x - h, y))[0]) / (2 * h)
            fy = (od.interpolate(view, (x, y + h))[0] - od.interpolate(view, (x, y - h))[0]) / (2 * h)
            assert gx == pytest.approx(fx, rel=1e-4, abs=1e-8)
            assert gy == pytest.approx(fy, rel=1e-4, abs=1e-8)
            checked += 1
        assert checked > 200


class TestIntegrate:
    def one_beam(self, length):
        return Scan(np.array([length, math.inf]), 0.0, math.pi, 5.0)

    def test_single_beam_cells(self):
        st = od.OdometryState(od.OdometryConfig(resolution=0.5, map_size=5.0, levels=1))
        pose = Pose(0.25, 0.25, 0.0)  # centre of a cell
        od.integrate_scan(st, self.one_beam(1.0), pose)
        g = st.map.log_odds
        i, j = st.map.cell_of(0.25, 0.25)
        assert g[i, j] == -0.4 and g[i + 1, j] == -0.4 and g[i + 2, j] == 0.9
        assert np.count_nonzero(g) == 3

    def test_additive_then_clamped(self):
        st = od.OdometryState(od.OdometryConfig(resolution=0.5, map_size=5.0, levels=1))
        pose = Pose(0.25, 0.25, 0.0)
        i, j = st.map.cell_of(1.25, 0.25)
        od.integrate_scan(st, self.one_beam(1.0), pose)
        od.integrate_scan(st, self.one_beam(1.0), pose)
        assert st.map.log_odds[i, j] == pytest.approx(1.8, abs=1e-15)
        k = math.ceil(4.0 / 0.9)
        for _ in range(k):
            od.integrate_scan(st, self.one_beam(1.0), pose)
        assert st.map.log_odds[i, j] == 4.0

    def test_pose_outside_map(self):
        st = od.OdometryState(od.OdometryConfig(map_size=4.0))
        with pytest.raises(od.OdometryError):
            od.integrate_scan(st, self.one_beam(1.0), Pose(3.0, 0.0, 0.0))

    def test_match_before_integrate(self):
        st = od.OdometryState()
        with pytest.raises(od.OdometryError):
            od.match_scan(st, self.one_beam(1.0))


class TestMatch:
    def test_self_match_exact_on_symmetric_scene(self):
        w = symmetric_room()
        st = seeded_state(w)
        res = od.match_scan(st, raycast(w, Pose(0, 0, 0), QUIET))
        assert max(abs(v) for v in res.delta) < 1e-6
        assert not res.low_confidence

    def test_self_match_within_half_cell(self, rng):
        # the bilinear occupancy interpolant peaks on cell nodes, so a
        # general scene self-matches only to sub-cell accuracy
        for k in range(10):
            w = scenarios.random_room(rng)
            st = seeded_state(w, seed=k)
            res = od.match_scan(st, raycast(w, Pose(0, 0, 0), QUIET))
            half = 0.5 * st.config.resolution
            assert abs(res.delta.dx) < half and abs(res.delta.dy) < half
            assert abs(res.delta.dtheta) < math.radians(0.5)

    def test_translation(self):
        rng = np.random.default_rng(2)
        w = scenarios.random_room(rng)
        st = seeded_state(w, model=LidarModel())
        res = od.match_scan(st, raycast(w, Pose(0.05, 0, 0), LidarModel(), 1))
        assert math.hypot(res.delta.dx - 0.05, res.delta.dy) < 0.01

    def test_rotation(self):
        rng = np.random.default_rng(3)
        w = scenarios.random_room(rng)
        st = seeded_state(w, model=LidarModel())
        res = od.match_scan(st, raycast(w, Pose.of(0, 0, math.radians(2)), LidarModel(), 1))
        assert abs(math.degrees(res.delta.dtheta) - 2.0) < 0.5

    def test_objective_non_decreasing(self, rng):
        for k in range(5):
            w = scenarios.random_room(rng)
            st = seeded_state(w, model=LidarModel(), seed=k)
            d = rng.uniform(-0.15, 0.15, 3)
            res = od.match_scan(st, raycast(w, Pose.of(d[0], d[1], d[2] / 3), LidarModel(), k + 100))
            assert len(res.scores) >= 1
            assert all(b >= a for a, b in zip(res.scores, res.scores[1:]))

    def test_featureless_corridor_low_confidence(self):
        # two long parallel walls, nothing along the corridor axis in range
        w = World.from_segments([((-50, -1), (50, -1)), ((-50, 1), (50, 1))], (-50, -2, 50, 2))
        model = LidarModel(range_max=4.0, range_noise_sigma=0.0)
        st = seeded_state(w, model=model)
        res = od.match_scan(st, raycast(w, Pose(0.1, 0, 0), model))
        assert res.low_confidence
        assert tuple(res.delta) == (0.0, 0.0, 0.0)

    def test_single_level_option(self):
        rng = np.random.default_rng(5)
        w = scenarios.random_room(rng)
        st = seeded_state(w, model=LidarModel(), levels=1)
        assert len(st.levels) == 1
        res = od.match_scan(st, raycast(w, Pose(0.02, -0.01, 0), LidarModel(), 1))
        assert math.hypot(res.delta.dx - 0.02, res.delta.dy + 0.01) < 0.02


class TestStep:
    def test_first_scan_zero(self):
        st = od.OdometryState()
        w = symmetric_room()
        assert tuple(od.step(st, raycast(w, Pose(0, 0, 0), QUIET))) == (0.0, 0.0, 0.0)
        assert st.integrated == 1

    def test_stationary_fixed_point(self):
        st = od.OdometryState()
        w = symmetric_room()
        scan = raycast(w, Pose(0, 0, 0), QUIET)
        for _ in range(5):
            d = od.step(st, scan)
            assert max(abs(v) for v in d) < 1e-6

    def test_straight_line_drift(self):
        w = build_maze_world(MazeLayout(16.0, 8.0, (((4, 0), (4, 1.5)), ((8, 8), (8, 6.5)),
                                                    ((11, 0), (11.5, 2.0)), ((6, 4.8), (6.5, 5.3)))))
        script = TrajectoryScript(((Pose(2, 3.5, 0), 0.0), (Pose(12, 3.5, 0), 10.0)), scan_rate=10.0)
        frames = run_trajectory(w, LidarModel(), script, 0)
        st = od.OdometryState()
        dx = []
        for f in frames:
            d = od.step(st, f.scan)
            dx.append(d)
        steps = np.array(dx[1:])
        assert np.all(np.abs(steps[:, 0] - 0.1) < 0.02)
        assert np.all(np.abs(steps[:, 1]) < 0.02) and np.all(np.abs(steps[:, 2]) < math.radians(1))
        drift = math.hypot(st.pose.x - 10.0, st.pose.y)
        assert drift < 0.02 * 10.0

    def test_returns_robot_frame_delta(self):
        rng = np.random.default_rng(7)
        w = scenarios.random_room(rng)
        st = od.OdometryState(pose=Pose(0, 0, 0))
        start = Pose.of(0, 0, math.pi / 2)
        # the map frame is the first scan's frame; moving "forward" from a
        # heading of pi/2 in the world is +x in the robot frame
        od.step(st, raycast(w, start, LidarModel(), 0))
        d = od.step(st, raycast(w, Pose.of(0, 0.08, math.pi / 2), LidarModel(), 1))
        assert d.dx == pytest.approx(0.08, abs=0.01)
        assert abs(d.dy) < 0.01
