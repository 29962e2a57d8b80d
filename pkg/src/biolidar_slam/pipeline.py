"""Per-scan update loop joining odometry, local view cells, pose cells and
the experience map."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import experience_map as em
from . import local_view as lv
from . import odometry as od
from . import pose_cells as pc
from .geometry import Pose, PoseDelta, Scan, compose, normalize_angle
from .sim import LidarModel, SimFrame


class PipelineError(RuntimeError):
    pass


@dataclass(frozen=True)
class SlamConfig:
    odometry: od.OdometryConfig = field(default_factory=od.OdometryConfig)
    local_view: lv.LocalViewConfig = field(default_factory=lv.LocalViewConfig)
    pose_cells: pc.PoseCellConfig = field(default_factory=pc.PoseCellConfig)
    relax: em.RelaxConfig = field(default_factory=em.RelaxConfig)
    lidar: LidarModel = field(default_factory=LidarModel)
    # an experience is re-entered when its pose-cell snapshot lies within
    # this many cells of the decoded packet
    pc_match_radius: float = 3.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.pc_match_radius > 0:
            raise ValueError("pc_match_radius must be positive")
        full = self.lidar.fov >= 2.0 * math.pi - 0.5 * self.lidar.angle_increment
        if self.local_view.wrap is True and not full:
            raise ValueError("local_view.wrap needs a full-circle lidar field of view")


class StepReport(NamedTuple):
    t: float
    odom_delta: PoseDelta
    active_view: int
    is_new_view: bool
    decoded_pose: Pose
    map_pose_estimate: Pose
    node_count: int
    edge_count: int
    loop_closed: bool
    low_confidence: bool
    view_count: int
    s_best: float
    truth: Pose | None = None
    err_x: float = math.nan
    err_y: float = math.nan

    @property
    def err(self) -> float:
        return math.hypot(self.err_x, self.err_y)


class Summary(NamedTuple):
    mean_err: float
    min_err: float
    max_err: float
    rmse: float
    n_steps: int
    n_nodes: int
    n_edges: int
    n_views: int


class Slam:
    """Mutable SLAM state advanced one scan at a time."""

    def __init__(self, cfg: SlamConfig | None = None):
        self.cfg = cfg or SlamConfig()
        self.odom = od.OdometryState(self.cfg.odometry)
        self.views = lv.LocalViewCells()
        self.net = pc.PoseCellNetwork.initial(self.cfg.pose_cells)
        self.links = pc.ViewToPoseLinks()
        self.map = em.ExperienceMap()
        self.steps = 0
        self.closures = 0
        self._origin: Pose | None = None  # first truth pose, anchors the map frame

    def step(self, scan: Scan, t: float | None = None, truth: Pose | None = None) -> StepReport:
        t = scan.timestamp if t is None else float(t)
        try:
            rep = self._step(scan, t, truth)
        except (ValueError, RuntimeError) as e:
            raise PipelineError(f"step {self.steps} (t={t:.3f} s): {e}") from e
        self.steps += 1
        return rep

    def _step(self, scan: Scan, t: float, truth: Pose | None) -> StepReport:
        cfg = self.cfg
        before = self.odom.pose
        d_robot = od.step(self.odom, scan)
        after = self.odom.pose
        # path integration runs along the odometry's map axes, which the
        # network axes coincide with at start-up
        d_net = PoseDelta(after.x - before.x, after.y - before.y,
                          normalize_angle(after.theta - before.theta))

        _, active, is_new = lv.process(scan, self.views, cfg.local_view)
        pc.path_integrate(self.net, d_net, cfg.pose_cells)
        # a freshly learned view is not linked yet, so this also resets the
        # consecutive-match counter on new views
        pc.inject_view(self.net, self.views.activity, self.links, cfg.pose_cells)
        if is_new:
            pc.learn_link(self.net, active, self.links)
        pc.attractor_step(self.net, cfg.pose_cells)
        decoded = pc.decode(self.net, cfg.pose_cells)

        loop_closed = self._update_map(d_robot, active, is_new, decoded, t)

        est = em.current_pose_estimate(self.map)
        err_x = err_y = math.nan
        if truth is not None:
            if self._origin is None:
                self._origin = truth
            w = compose(self._origin, PoseDelta(*est))
            err_x, err_y = w.x - truth.x, w.y - truth.y
        return StepReport(t, d_robot, active, is_new, decoded.pose, est, len(self.map),
                          len(self.map.edges), loop_closed, self.odom.low_confidence,
                          len(self.views), self.views.s_best, truth, err_x, err_y)

    def _update_map(self, d_robot: PoseDelta, active: int, is_new: bool,
                    decoded: pc.DecodedPose, t: float) -> bool:
        cfg = self.cfg
        emap = self.map
        if len(emap) == 0:
            em.create_experience(emap, decoded.cell, active, t=t)
            return False
        emap.integrate_odometry(d_robot)
        target = None
        # re-entering an experience needs a recognised view and a packet that
        # has been calibrated by it (the injection gate)
        if not is_new and self.net.consecutive >= cfg.pose_cells.consec_threshold:
            target = self._match_experience(decoded)
        dist, ang = emap.travel()
        moved = dist > cfg.relax.create_distance or ang > cfg.relax.create_angle
        closed = False
        if target is not None and target != emap.current_id:
            closed = em.close_loop(emap, target, t=t)
        elif is_new or (moved and target is None) or (moved and target == emap.current_id):
            em.create_experience(emap, decoded.cell, active, t=t)
        if closed:
            self.closures += 1
            em.relax(emap, cfg.relax, cfg.relax.iterations_after_closure)
        else:
            em.relax(emap, cfg.relax)
        return closed

    def _match_experience(self, decoded: pc.DecodedPose) -> int | None:
        V = self.views.activity
        best, best_d = None, math.inf
        for v in np.flatnonzero(V > 0):
            for i in self.map.experiences_with_view(int(v)):
                d = pc.cell_distance(self.map.pc_coord(i), decoded.cell, self.cfg.pose_cells)
                if d < best_d:
                    best, best_d = i, d
        return best if best_d <= self.cfg.pc_match_radius else None


def summarize(reports: Sequence[StepReport], slam: Slam) -> Summary:
    errs = np.array([r.err for r in reports if r.truth is not None])
    if errs.size:
        stats = (float(errs.mean()), float(errs.min()), float(errs.max()),
                 float(np.sqrt(np.mean(errs ** 2))))
    else:
        stats = (math.nan,) * 4
    return Summary(*stats, len(reports), len(slam.map), len(slam.map.edges), len(slam.views))


def run(frames: Iterable[Scan | SimFrame], cfg: SlamConfig | None = None):
    """Process every frame; returns ``(reports, summary, slam)``.

    Frames carrying ground truth (:class:`SimFrame`) also produce per-step
    translational errors.
    """
    slam = Slam(cfg)
    reports = []
    for f in frames:
        if isinstance(f, SimFrame):
            reports.append(slam.step(f.scan, f.t, f.truth_pose))
        elif isinstance(f, Scan):
            reports.append(slam.step(f))
        else:
            raise PipelineError(f"frame {len(reports)}: expected Scan or SimFrame, got {type(f).__name__}")
    if not reports:
        raise PipelineError("no frames to process")
    return reports, summarize(reports, slam), slam
