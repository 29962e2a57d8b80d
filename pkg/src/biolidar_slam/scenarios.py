"""Built-in worlds and trajectories used by the tests, benchmarks and the
reference data files."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .geometry import Pose
from .sim import MazeLayout, TrajectoryScript, World, build_maze_world

Point = tuple[float, float]


def _box(x0: float, y0: float, x1: float, y1: float):
    return [((x0, y0), (x1, y0)), ((x1, y0), (x1, y1)),
            ((x1, y1), (x0, y1)), ((x0, y1), (x0, y0))]


def maze_layout() -> MazeLayout:
    """16.8 m x 12.6 m arena with four interior blocks of different sizes.

    The blocks leave a 2 m ring corridor along the outer walls and two
    offset cross corridors, so no two places look alike under rotation.
    """
    walls = []
    walls += _box(2.0, 2.0, 7.0, 5.5)    # south-west
    walls += _box(9.0, 2.0, 14.8, 4.5)   # south-east
    walls += _box(2.0, 7.5, 6.0, 10.6)   # north-west
    walls += _box(8.0, 6.5, 14.8, 10.6)  # north-east
    # stubs and a pillar along the walls
    walls += [((4.0, 0.0), (4.0, 0.5)), ((12.5, 0.0), (12.5, 0.6)),
              ((16.8, 3.0), (16.2, 3.0)), ((6.0, 12.6), (6.0, 12.1)),
              ((0.0, 9.0), (0.6, 9.0)), ((11.0, 4.5), (11.0, 4.8)),
              ((14.8, 9.0), (15.2, 9.4))]
    walls += _box(3.0, 5.5, 3.6, 5.8)
    return MazeLayout(16.8, 12.6, tuple(walls))


def maze_world() -> World:
    return build_maze_world(maze_layout())


def waypoint_path(points: Sequence[Point], speed: float = 0.4,
                  turn_rate: float = math.radians(45.0), t0: float = 0.0,
                  heading: float | None = None) -> list[tuple[Pose, float]]:
    """Drive through ``points``: turn in place towards the next point, then
    move straight to it."""
    x, y = points[0]
    th = math.atan2(points[1][1] - y, points[1][0] - x) if heading is None else heading
    t = t0
    out = [(Pose.of(x, y, th), t)]
    for nx, ny in points[1:]:
        want = math.atan2(ny - y, nx - x)
        dth = (want - th + math.pi) % (2 * math.pi) - math.pi
        if abs(dth) > 1e-9:
            t += abs(dth) / turn_rate
            th = want
            out.append((Pose.of(x, y, th), t))
        t += math.hypot(nx - x, ny - y) / speed
        x, y = nx, ny
        out.append((Pose.of(x, y, th), t))
    return out


MAZE_START: Point = (1.0, 1.0)


def maze_route(duration: float = 1200.0, speed: float = 0.4) -> list[Point]:
    """Corridor route from the south-west corner cycling through the outer
    ring, the western loop and the eastern loop, so every stretch is
    revisited several times."""
    outer = [(15.8, 1.0), (15.8, 11.6), (1.0, 11.6), (1.0, 1.0)]
    west = [(8.0, 1.0), (8.0, 5.5), (7.0, 6.5), (1.0, 6.5), (1.0, 1.0)]
    east = [(8.0, 1.0), (8.0, 5.5), (15.8, 5.5), (15.8, 11.6), (7.0, 11.6),
            (7.0, 6.5), (1.0, 6.5), (1.0, 1.0)]
    cycle = outer + west + east
    pts: list[Point] = [MAZE_START]
    length = 0.0
    # enough corridor to cover ``duration`` at ``speed`` (turns add time)
    while length < duration * speed:
        for p in cycle:
            length += math.hypot(p[0] - pts[-1][0], p[1] - pts[-1][1])
            pts.append(p)
    return pts


def maze_trajectory(duration: float = 1200.0, speed: float = 0.4,
                    scan_rate: float = 5.0) -> TrajectoryScript:
    wps = waypoint_path(maze_route(duration, speed), speed)
    # cut the route at ``duration`` by interpolating the last leg
    kept = [w for w in wps if w[1] <= duration]
    if kept[-1][1] < duration:
        probe = TrajectoryScript(tuple(wps), scan_rate)
        kept.append((probe.pose_at(duration), duration))
    return TrajectoryScript(tuple(kept), scan_rate)


def square_world(side: float = 6.0) -> World:
    """Open square room with an off-centre block and a few wall features."""
    s = side
    walls = _box(0.35 * s, 0.4 * s, 0.55 * s, 0.6 * s)
    walls += [((0.3 * s, 0.0), (0.3 * s, 0.3)), ((s, 0.7 * s), (s - 0.4, 0.7 * s))]
    return build_maze_world(MazeLayout(s, s, tuple(walls)))


def square_trajectory(side: float = 6.0, margin: float = 1.0, laps: int = 2,
                      speed: float = 0.4, scan_rate: float = 5.0) -> TrajectoryScript:
    a, b = margin, side - margin
    loop = [(b, a), (b, b), (a, b), (a, a)]
    pts = [(a, a)] + loop * laps
    return TrajectoryScript(tuple(waypoint_path(pts, speed)), scan_rate)


def random_room(rng: np.random.Generator) -> World:
    """Rectangular room of random size containing the origin, with 3 to 6
    randomly rotated boxes kept at least 1.2 m away from the origin."""
    w, h = rng.uniform(6, 12), rng.uniform(5, 10)
    x0, y0 = -rng.uniform(1.5, w - 1.5), -rng.uniform(1.5, h - 1.5)
    segs = [((x0, y0), (x0 + w, y0)), ((x0 + w, y0), (x0 + w, y0 + h)),
            ((x0 + w, y0 + h), (x0, y0 + h)), ((x0, y0 + h), (x0, y0))]
    for _ in range(rng.integers(3, 7)):
        cx, cy = rng.uniform(x0 + 0.5, x0 + w - 0.5), rng.uniform(y0 + 0.5, y0 + h - 0.5)
        if math.hypot(cx, cy) < 1.2:
            continue
        a, b = rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)
        ang = rng.uniform(0, math.pi)
        c, s = math.cos(ang), math.sin(ang)
        corners = [(cx + c * dx - s * dy, cy + s * dx + c * dy)
                   for dx, dy in [(-a, -b), (a, -b), (a, b), (-a, b)]]
        segs += [(corners[k], corners[(k + 1) % 4]) for k in range(4)]
    return World.from_segments(segs, (x0 - 1, y0 - 1, x0 + w + 1, y0 + h + 1))
