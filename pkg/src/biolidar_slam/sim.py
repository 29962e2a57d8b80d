"""Deterministic 2D wall-segment world with a raycasting LiDAR.

Worlds are lists of wall segments.  Robots follow scripted waypoints with
linear interpolation in position and shortest-arc interpolation in heading;
every frame carries the ground-truth pose it was generated at.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .geometry import Pose, Scan, normalize_angle


class SimError(ValueError):
    pass


Segment = tuple[tuple[float, float], tuple[float, float]]


@dataclass(frozen=True, eq=False)
class World:
    segments: np.ndarray  # (S, 4): x1 y1 x2 y2
    bounds: tuple[float, float, float, float]  # xmin ymin xmax ymax

    def __post_init__(self) -> None:
        seg = np.array(self.segments, dtype=np.float64).reshape(-1, 4)
        if seg.shape[0] == 0:
            raise SimError("a world needs at least one segment")
        if not np.all(np.isfinite(seg)):
            raise SimError("segment coordinates must be finite")
        xmin, ymin, xmax, ymax = (float(b) for b in self.bounds)
        if not (xmin < xmax and ymin < ymax):
            raise SimError(f"empty bounds {self.bounds}")
        xs, ys = seg[:, [0, 2]], seg[:, [1, 3]]
        tol = 1e-9
        if (xs.min() < xmin - tol or xs.max() > xmax + tol
                or ys.min() < ymin - tol or ys.max() > ymax + tol):
            raise SimError("bounds do not contain every segment")
        seg = np.ascontiguousarray(seg)
        seg.flags.writeable = False
        object.__setattr__(self, "segments", seg)
        object.__setattr__(self, "bounds", (xmin, ymin, xmax, ymax))

    @classmethod
    def from_segments(cls, segments: Sequence[Segment],
                      bounds: tuple[float, float, float, float] | None = None) -> "World":
        seg = np.array([[a[0], a[1], b[0], b[1]] for a, b in segments], dtype=float)
        if seg.size == 0:
            raise SimError("a world needs at least one segment")
        if bounds is None:
            bounds = (float(seg[:, [0, 2]].min()), float(seg[:, [1, 3]].min()),
                      float(seg[:, [0, 2]].max()), float(seg[:, [1, 3]].max()))
        return cls(seg, bounds)

    def contains(self, x: float, y: float) -> bool:
        xmin, ymin, xmax, ymax = self.bounds
        return xmin <= x <= xmax and ymin <= y <= ymax


@dataclass(frozen=True)
class LidarModel:
    beam_count: int = 360
    fov: float = 2.0 * math.pi
    range_max: float = 8.0
    range_noise_sigma: float = 0.01
    angle_min: float = -math.pi

    def __post_init__(self) -> None:
        if self.beam_count < 2:
            raise SimError("beam_count must be >= 2")
        if not 0.0 < self.fov <= 2.0 * math.pi + 1e-12:
            raise SimError("fov must lie in (0, 2*pi]")
        if not self.range_max > 0:
            raise SimError("range_max must be positive")
        if not self.range_noise_sigma >= 0:
            raise SimError("range_noise_sigma must be non-negative")

    @property
    def angle_increment(self) -> float:
        # [angle_min, angle_min + fov): no duplicate beam at a 2*pi seam
        return self.fov / self.beam_count

    @property
    def angles(self) -> np.ndarray:
        return self.angle_min + self.angle_increment * np.arange(self.beam_count)


@dataclass(frozen=True)
class TrajectoryScript:
    waypoints: tuple[tuple[Pose, float], ...]
    scan_rate: float = 5.0

    def __post_init__(self) -> None:
        wps = tuple((Pose.of(*p), float(t)) for p, t in self.waypoints)
        if not wps:
            raise SimError("a trajectory needs at least one waypoint")
        times = [t for _, t in wps]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise SimError("waypoint times must be strictly increasing")
        if not self.scan_rate > 0:
            raise SimError("scan_rate must be positive")
        object.__setattr__(self, "waypoints", wps)

    @property
    def start(self) -> float:
        return self.waypoints[0][1]

    @property
    def end(self) -> float:
        return self.waypoints[-1][1]

    def frame_times(self) -> np.ndarray:
        """Frame timestamps, both interval endpoints included."""
        n = int(math.floor((self.end - self.start) * self.scan_rate + 1e-9))
        return self.start + np.arange(n + 1) / self.scan_rate

    def pose_at(self, t: float) -> Pose:
        wps = self.waypoints
        if t <= wps[0][1]:
            return wps[0][0]
        if t >= wps[-1][1]:
            return wps[-1][0]
        times = [w[1] for w in wps]
        k = int(np.searchsorted(times, t, side="right")) - 1
        (p0, t0), (p1, t1) = wps[k], wps[k + 1]
        f = (t - t0) / (t1 - t0)
        dth = normalize_angle(p1.theta - p0.theta)
        return Pose.of(p0.x + f * (p1.x - p0.x), p0.y + f * (p1.y - p0.y),
                       p0.theta + f * dth)


@dataclass(frozen=True)
class SimFrame:
    scan: Scan
    truth_pose: Pose
    t: float


def raycast(world: World, pose: Pose, model: LidarModel,
            rng_seed: int | Sequence[int] = 0, t: float = 0.0) -> Scan:
    """Simulate one scan taken at ``pose``.

    Noise-free ranges are exact distances to the nearest wall; Gaussian
    range noise is drawn from a generator seeded with ``rng_seed``.
    """
    if not world.contains(pose.x, pose.y):
        raise SimError(f"pose ({pose.x:.3f}, {pose.y:.3f}) lies outside the world bounds")
    angles = np.ascontiguousarray(model.angles + pose.theta, dtype=np.float64)
    r = np.asarray(kernels.raycast(world.segments, pose.x, pose.y, angles, model.range_max))
    if model.range_noise_sigma > 0:
        noise = np.random.default_rng(rng_seed).normal(0.0, model.range_noise_sigma, r.size)
        hit = np.isfinite(r)
        r = r.copy()
        r[hit] = np.clip(r[hit] + noise[hit], 1e-6, model.range_max)
    return Scan(r, model.angle_min, model.angle_increment, model.range_max, t)


def iter_trajectory(world: World, model: LidarModel, script: TrajectoryScript,
                    rng_seed: int = 0) -> Iterator[SimFrame]:
    """Lazily yield the frames of :func:`run_trajectory`."""
    for k, t in enumerate(script.frame_times()):
        pose = script.pose_at(float(t))
        if not world.contains(pose.x, pose.y):
            raise SimError(f"trajectory leaves the world bounds at t={t:.3f} s")
        yield SimFrame(raycast(world, pose, model, (rng_seed, k), float(t)), pose, float(t))


def run_trajectory(world: World, model: LidarModel, script: TrajectoryScript,
                   rng_seed: int = 0) -> list[SimFrame]:
    # validate the whole path before spending time on raycasts
    for t in script.frame_times():
        p = script.pose_at(float(t))
        if not world.contains(p.x, p.y):
            raise SimError(f"trajectory leaves the world bounds at t={t:.3f} s")
    return list(iter_trajectory(world, model, script, rng_seed))


@dataclass(frozen=True)
class MazeLayout:
    """Rectangular arena ``[0, width] x [0, height]`` plus interior walls."""

    width: float
    height: float
    walls: tuple[Segment, ...] = field(default_factory=tuple)


def build_maze_world(layout: MazeLayout) -> World:
    w, h = float(layout.width), float(layout.height)
    if not (w > 0 and h > 0):
        raise SimError("maze layout needs positive width and height")
    segs: list[Segment] = [((0.0, 0.0), (w, 0.0)), ((w, 0.0), (w, h)),
                           ((w, h), (0.0, h)), ((0.0, h), (0.0, 0.0))]
    for a, b in layout.walls:
        if math.hypot(b[0] - a[0], b[1] - a[1]) == 0.0:
            raise SimError(f"zero-length wall at {a}")
        segs.append(((float(a[0]), float(a[1])), (float(b[0]), float(b[1]))))
    return World.from_segments(segs, (0.0, 0.0, w, h))
