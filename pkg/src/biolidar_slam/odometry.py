"""Scan-to-map LiDAR odometry on a log-odds occupancy grid.

The local map is kept at several resolutions (each level doubles the cell
size).  Matching runs Gauss-Newton on the coarsest level first and refines
down to the finest, maximising the summed interpolated occupancy of the
projected scan endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .geometry import Pose, PoseDelta, Scan, between, normalize_angle, scan_to_points


class OdometryError(RuntimeError):
    pass


@dataclass(frozen=True)
class OdometryConfig:
    resolution: float = 0.05
    map_size: float = 40.0
    max_iterations: int = 20
    epsilon: float = 1e-5
    hit: float = 0.9
    miss: float = -0.4
    l_min: float = -4.0
    l_max: float = 4.0
    levels: int = 3
    # smallest/largest Hessian eigenvalue ratio below which a match is
    # reported as low confidence
    degeneracy_ratio: float = 1e-4
    # smallest/largest eigenvalue ratio of the scatter of scan surface
    # normals; walls all facing one way leave translation along them
    # unobservable even when the rasterised map has texture
    geometry_ratio: float = 0.02
    max_halvings: int = 8

    def __post_init__(self) -> None:
        if not (self.resolution > 0 and self.map_size > 0):
            raise ValueError("resolution and map_size must be positive")
        if self.max_iterations < 1 or self.levels < 1:
            raise ValueError("max_iterations and levels must be >= 1")
        if not (self.epsilon > 0 and self.hit > 0 and self.miss < 0):
            raise ValueError("epsilon and hit must be positive, miss negative")
        if not (self.degeneracy_ratio >= 0 and self.geometry_ratio >= 0):
            raise ValueError("degeneracy thresholds must be non-negative")
        if not self.l_min < 0 < self.l_max:
            raise ValueError("need l_min < 0 < l_max")


class LocalMap:
    """Square log-odds grid; ``origin`` is the world position of the outer
    corner of cell ``(0, 0)`` and cell ``(i, j)`` is centred at
    ``origin + (i + 0.5, j + 0.5) * resolution``."""

    def __init__(self, resolution: float, size: int, origin: tuple[float, float],
                 l_min: float = -4.0, l_max: float = 4.0):
        self.resolution = float(resolution)
        self.size = int(size)
        self.origin = (float(origin[0]), float(origin[1]))
        self.l_min = l_min
        self.l_max = l_max
        self.log_odds = np.zeros((self.size, self.size), dtype=np.float64)

    @classmethod
    def centered(cls, center: tuple[float, float], resolution: float, extent: float,
                 l_min: float = -4.0, l_max: float = 4.0) -> "LocalMap":
        size = int(math.ceil(extent / resolution))
        half = 0.5 * size * resolution
        return cls(resolution, size, (center[0] - half, center[1] - half), l_min, l_max)

    def cell_of(self, x, y):
        """Integer cell indices containing world points."""
        i = np.floor((np.asarray(x) - self.origin[0]) / self.resolution).astype(np.int64)
        j = np.floor((np.asarray(y) - self.origin[1]) / self.resolution).astype(np.int64)
        return i, j

    def contains(self, x: float, y: float) -> bool:
        i, j = self.cell_of(x, y)
        return bool(0 <= i < self.size and 0 <= j < self.size)

    def probability(self) -> np.ndarray:
        return 1.0 / (1.0 + np.exp(-self.log_odds))


class ContinuousMapView:
    """Bilinear occupancy-probability field over a :class:`LocalMap`."""

    def __init__(self, backing: LocalMap):
        self.backing = backing

    def sample(self, xy: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Values and world-frame gradients at ``(n, 2)`` points."""
        m = self.backing
        xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
        u = np.ascontiguousarray((xy[:, 0] - m.origin[0]) / m.resolution - 0.5)
        v = np.ascontiguousarray((xy[:, 1] - m.origin[1]) / m.resolution - 0.5)
        val, du, dv = kernels.sample_bilinear(m.log_odds, u, v)
        return (np.asarray(val), np.asarray(du) / m.resolution,
                np.asarray(dv) / m.resolution)


def interpolate(view: ContinuousMapView, xy: tuple[float, float]) -> tuple[float, tuple[float, float]]:
    """Occupancy probability and its gradient at a single world point.

    Queries whose interpolation stencil leaves the map read as 0 with zero
    gradient.
    """
    val, gx, gy = view.sample(np.array([xy], dtype=float))
    return float(val[0]), (float(gx[0]), float(gy[0]))


class MatchResult(NamedTuple):
    delta: PoseDelta  # map frame: translation of the robot position, heading change
    low_confidence: bool
    iterations: int
    scores: tuple[float, ...]  # finest-level objective after each accepted iterate


@dataclass
class OdometryState:
    config: OdometryConfig = field(default_factory=OdometryConfig)
    pose: Pose = Pose(0.0, 0.0, 0.0)
    levels: list[LocalMap] = field(default_factory=list)
    integrated: int = 0
    low_confidence: bool = False

    def __post_init__(self) -> None:
        if not self.levels:
            c = self.config
            self.levels = [
                LocalMap.centered((self.pose.x, self.pose.y), c.resolution * 2 ** k,
                                  c.map_size, c.l_min, c.l_max)
                for k in range(c.levels)
            ]

    @property
    def map(self) -> LocalMap:
        return self.levels[0]


def integrate_scan(state: OdometryState, scan: Scan, pose: Pose) -> LocalMap:
    """Ray-trace ``scan`` taken at ``pose`` into every map level."""
    cfg = state.config
    if not state.map.contains(pose.x, pose.y):
        raise OdometryError(
            f"pose ({pose.x:.2f}, {pose.y:.2f}) left the local map extent; "
            "increase odometry.map_size")
    ok = scan.valid
    if ok.any():
        d = scan.ranges[ok]
        a = scan.angles[ok] + pose.theta
        ex = pose.x + d * np.cos(a)
        ey = pose.y + d * np.sin(a)
        for m in state.levels:
            i0, j0 = m.cell_of(pose.x, pose.y)
            i1, j1 = m.cell_of(ex, ey)
            kernels.bresenham_update(m.log_odds, int(i0), int(j0),
                                     np.ascontiguousarray(i1), np.ascontiguousarray(j1),
                                     cfg.hit, cfg.miss, cfg.l_min, cfg.l_max)
    state.integrated += 1
    return state.map


def _score(view: ContinuousMapView, pts: np.ndarray, xi: np.ndarray) -> float:
    c, s = math.cos(xi[2]), math.sin(xi[2])
    w = np.column_stack((c * pts[:, 0] - s * pts[:, 1] + xi[0],
                         s * pts[:, 0] + c * pts[:, 1] + xi[1]))
    return float(view.sample(w)[0].sum())


def _gauss_newton(view: ContinuousMapView, pts: np.ndarray, xi: np.ndarray,
                  cfg: OdometryConfig, trace: list[float] | None):
    """Refine absolute pose ``xi`` against one map level.

    Returns the refined pose, the last Hessian and the iteration count.
    """
    score = _score(view, pts, xi)
    H = np.zeros((3, 3))
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        c, s = math.cos(xi[2]), math.sin(xi[2])
        rx = c * pts[:, 0] - s * pts[:, 1]
        ry = s * pts[:, 0] + c * pts[:, 1]
        val, gx, gy = view.sample(np.column_stack((rx + xi[0], ry + xi[1])))
        # d(point)/d(theta) = (-ry, rx)
        J = np.column_stack((gx, gy, -gx * ry + gy * rx))
        H = J.T @ J
        g = J.T @ (1.0 - val)
        try:
            step = np.linalg.solve(H + 1e-9 * np.eye(3), g)
        except np.linalg.LinAlgError:
            break
        alpha, accepted = 1.0, False
        for _ in range(cfg.max_halvings + 1):
            cand = xi + alpha * step
            cs = _score(view, pts, cand)
            if cs >= score:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
        moved = alpha * float(np.linalg.norm(step))
        xi, score = cand, cs
        if trace is not None:
            trace.append(score)
        if moved < cfg.epsilon:
            break
    return xi, H, it


def normal_spread(pts: np.ndarray, half: int = 3, gap: float = 0.3) -> float:
    """Smallest/largest eigenvalue ratio of ``sum n n^T`` over the surface
    normals of locally straight runs of consecutive scan points."""
    n = len(pts)
    if n < 2 * half + 1:
        return 0.0
    idx = np.arange(half, n - half)
    win = np.stack([pts[idx + k] for k in range(-half, half + 1)], axis=1)
    span = np.linalg.norm(np.diff(win, axis=1), axis=2).max(axis=1)
    win = win[span < gap]
    if not len(win):
        return 0.0
    c = win - win.mean(axis=1, keepdims=True)
    ev, evec = np.linalg.eigh(np.einsum("mwi,mwj->mij", c, c))
    normals = evec[ev[:, 0] < 0.1 * ev[:, 1], :, 0]
    e = np.linalg.eigvalsh(normals.T @ normals)
    return float(e[0] / e[-1]) if e[-1] > 0 else 0.0


def match_scan(state: OdometryState, scan: Scan) -> MatchResult:
    """Pose change maximising the summed occupancy of the projected scan.

    The returned delta is in the map frame: the robot moves from
    ``state.pose`` to ``(x + dx, y + dy, theta + dtheta)``.  Degenerate
    geometry (e.g. a featureless corridor) yields a zero delta flagged as
    low confidence.
    """
    if state.integrated == 0:
        raise OdometryError("match_scan needs a map; integrate the first scan instead")
    cfg = state.config
    pts = scan_to_points(scan)
    start = np.array(state.pose, dtype=float)
    xi = start.copy()
    total = 0
    trace: list[float] = []
    H = np.zeros((3, 3))
    for k in reversed(range(len(state.levels))):
        view = ContinuousMapView(state.levels[k])
        xi, H, it = _gauss_newton(view, pts, xi, cfg, trace if k == 0 else None)
        total += it
    eig = np.linalg.eigvalsh(H)
    if (not np.all(np.isfinite(xi)) or eig[-1] <= 0 or eig[0] / eig[-1] < cfg.degeneracy_ratio
            or normal_spread(pts) < cfg.geometry_ratio):
        return MatchResult(PoseDelta(0.0, 0.0, 0.0), True, total, tuple(trace))
    d = PoseDelta(float(xi[0] - start[0]), float(xi[1] - start[1]),
                  normalize_angle(float(xi[2] - start[2])))
    return MatchResult(d, False, total, tuple(trace))


def step(state: OdometryState, scan: Scan) -> PoseDelta:
    """Advance the odometry by one scan; returns the robot-frame increment
    (forward, lateral, rotation).  The first scan only seeds the map."""
    if state.integrated == 0:
        integrate_scan(state, scan, state.pose)
        state.low_confidence = False
        return PoseDelta(0.0, 0.0, 0.0)
    res = match_scan(state, scan)
    old = state.pose
    new = Pose.of(old.x + res.delta.dx, old.y + res.delta.dy, old.theta + res.delta.dtheta)
    state.pose = new
    state.low_confidence = res.low_confidence
    integrate_scan(state, scan, new)
    return between(old, new)
