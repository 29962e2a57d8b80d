import math

import numpy as np
import pytest
import shapely
from hypothesis import given
from hypothesis import strategies as st

from biolidar_slam import scenarios
from biolidar_slam.geometry import Pose
from biolidar_slam.sim import (LidarModel, MazeLayout, SimError, TrajectoryScript, World,
                               build_maze_world, iter_trajectory, raycast, run_trajectory)

QUIET = dict(range_noise_sigma=0.0)


def shapely_ranges(world, pose, angles, rmax):
    """Nearest hit along each beam via shapely intersections."""
    walls = shapely.MultiLineString([[(s[0], s[1]), (s[2], s[3])] for s in world.segments])
    origin = shapely.Point(pose.x, pose.y)
    out = []
    for a in angles:
        far = (pose.x + 2 * rmax * math.cos(a), pose.y + 2 * rmax * math.sin(a))
        hit = shapely.LineString([(pose.x, pose.y), far]).intersection(walls)
        d = min((origin.distance(g) for g in getattr(hit, "geoms", [hit]) if not g.is_empty),
                default=math.inf)
        out.append(d if d <= rmax else math.inf)
    return np.array(out)


def test_perpendicular_wall():
    w = World.from_segments([((2, -1), (2, 1))], (-3, -3, 3, 3))
    s = raycast(w, Pose(0, 0, 0), LidarModel(beam_count=2, angle_min=0.0, **QUIET))
    assert s.ranges[0] == pytest.approx(2.0, abs=1e-12)


def test_wall_beyond_range_is_invalid():
    w = World.from_segments([((9, -1), (9, 1))], (-10, -10, 10, 10))
    s = raycast(w, Pose(0, 0, 0), LidarModel(beam_count=2, angle_min=0.0, range_max=8.0, **QUIET))
    assert not s.valid[0] and math.isinf(s.ranges[0])


def test_square_room_cardinal():
    w = build_maze_world(MazeLayout(4.0, 4.0))
    s = raycast(w, Pose(2, 2, 0), LidarModel(beam_count=4, angle_min=0.0, **QUIET))
    np.testing.assert_allclose(s.ranges, 2.0, atol=1e-12)


def test_outside_bounds_rejected():
    w = build_maze_world(MazeLayout(4.0, 4.0))
    with pytest.raises(SimError):
        raycast(w, Pose(5, 2, 0), LidarModel())


def test_matches_shapely_oracle_in_maze(rng):
    w = scenarios.maze_world()
    m = LidarModel(beam_count=90, **QUIET)
    for _ in range(20):
        p = Pose.of(rng.uniform(0.1, 16.7), rng.uniform(0.1, 12.5), rng.uniform(-3, 3))
        s = raycast(w, p, m)
        ref = shapely_ranges(w, p, m.angles + p.theta, m.range_max)
        fin = np.isfinite(ref)
        np.testing.assert_array_equal(np.isfinite(s.ranges), fin)
        np.testing.assert_allclose(s.ranges[fin], ref[fin], atol=1e-9)


def test_seeded_noise_deterministic():
    w = scenarios.maze_world()
    m = LidarModel()
    a = raycast(w, Pose(1, 1, 0), m, (3, 7))
    b = raycast(w, Pose(1, 1, 0), m, (3, 7))
    c = raycast(w, Pose(1, 1, 0), m, (3, 8))
    assert a == b
    assert not np.array_equal(a.ranges, c.ranges)
    assert np.all(a.ranges[a.valid] > 0) and np.all(a.ranges[a.valid] <= m.range_max)


def test_beam_angles_half_open():
    m = LidarModel(beam_count=4, angle_min=-math.pi)
    np.testing.assert_allclose(m.angles, [-math.pi, -math.pi / 2, 0, math.pi / 2])


class TestTrajectory:
    def world(self):
        return build_maze_world(MazeLayout(20.0, 20.0))

    def test_stationary_inclusive_endpoints(self):
        p = Pose(5, 5, 0)
        script = TrajectoryScript(((p, 0.0), (p, 1.0)), scan_rate=1.0)
        frames = run_trajectory(self.world(), LidarModel(beam_count=8), script)
        assert len(frames) == 2
        assert all(f.truth_pose == p for f in frames)

    def test_single_waypoint(self):
        script = TrajectoryScript(((Pose(5, 5, 0), 0.0),), scan_rate=1.0)
        assert len(script.frame_times()) == 1

    def test_linear_motion(self):
        script = TrajectoryScript(((Pose(5, 5, 0), 0.0), (Pose(15, 5, 0), 10.0)), scan_rate=1.0)
        frames = run_trajectory(self.world(), LidarModel(beam_count=8), script)
        assert len(frames) == 11
        np.testing.assert_allclose([f.truth_pose.x for f in frames], 5 + np.arange(11), atol=1e-12)

    def test_shortest_arc(self):
        script = TrajectoryScript(((Pose(5, 5, 3.0), 0.0), (Pose(5, 5, -3.0), 1.0)), scan_rate=50.0)
        th = np.array([script.pose_at(t).theta for t in script.frame_times()])
        assert np.all(np.abs(th) >= 3.0 - 1e-12)

    def test_leaving_bounds_reports_time(self):
        script = TrajectoryScript(((Pose(5, 5, 0), 0.0), (Pose(25, 5, 0), 10.0)), scan_rate=1.0)
        with pytest.raises(SimError, match="t=8.000"):
            run_trajectory(self.world(), LidarModel(beam_count=8), script)

    def test_times_strictly_increasing(self):
        with pytest.raises(SimError):
            TrajectoryScript(((Pose(), 1.0), (Pose(), 1.0)))

    @given(st.floats(0.0, 10.0))
    def test_truth_on_interpolated_path(self, t):
        script = TrajectoryScript(((Pose(1, 2, 0), 0.0), (Pose(4, 6, 1.0), 5.0),
                                   (Pose(4, 6, 2.0), 10.0)))
        p = script.pose_at(t)
        if t <= 5.0:
            f = t / 5.0
            assert math.hypot(p.x - (1 + 3 * f), p.y - (2 + 4 * f)) < 1e-9
        else:
            assert math.hypot(p.x - 4, p.y - 6) < 1e-9

    def test_deterministic(self):
        script = scenarios.square_trajectory(laps=1)
        w = scenarios.square_world()
        a = run_trajectory(w, LidarModel(), script, 4)
        b = list(iter_trajectory(w, LidarModel(), script, 4))
        assert len(a) == len(b)
        assert all(x.scan == y.scan and x.truth_pose == y.truth_pose for x, y in zip(a, b))


class TestMaze:
    def test_rectangle(self):
        w = build_maze_world(MazeLayout(16.8, 12.6))
        assert w.segments.shape == (4, 4)
        assert w.bounds == (0.0, 0.0, 16.8, 12.6)

    def test_interior_wall(self):
        w = build_maze_world(MazeLayout(16.8, 12.6, (((1, 1), (2, 1)),)))
        assert w.segments.shape == (5, 4)

    def test_degenerate(self):
        with pytest.raises(SimError):
            build_maze_world(MazeLayout(0.0, 0.0))
        with pytest.raises(SimError):
            build_maze_world(MazeLayout(5.0, 5.0, (((1, 1), (1, 1)),)))

    def test_maze_extent(self):
        assert scenarios.maze_world().bounds == (0.0, 0.0, 16.8, 12.6)

    def test_maze_trajectory_stays_clear_of_walls(self):
        w = scenarios.maze_world()
        walls = shapely.MultiLineString([[(s[0], s[1]), (s[2], s[3])] for s in w.segments])
        script = scenarios.maze_trajectory()
        assert script.end == pytest.approx(1200.0)
        for t in script.frame_times()[::25]:
            p = script.pose_at(float(t))
            assert walls.distance(shapely.Point(p.x, p.y)) > 0.3
