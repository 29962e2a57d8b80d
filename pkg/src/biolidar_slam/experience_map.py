"""Experience map: a directed graph of experiences joined by odometric
transitions, relaxed to spread loop-closure error along the trails.

Node poses live in the map frame.  Transition deltas are stored additively
in the map frame (``p_j = p_i + delta`` when the edge is created).  Motion
since the last node event is accumulated as a robot-frame pose increment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import Pose, PoseDelta, compose, normalize_angle, normalize_angles


class ExperienceMapError(ValueError):
    pass


@dataclass(frozen=True)
class Experience:
    id: int
    pc_coord: tuple[float, float, float]
    view_index: int
    pose: Pose


@dataclass(frozen=True)
class Transition:
    from_id: int
    to_id: int
    delta: PoseDelta
    dt: float


@dataclass(frozen=True)
class RelaxConfig:
    a: float = 0.5
    iterations_per_step: int = 1
    iterations_after_closure: int = 20
    # "corrected": incoming edges contribute p_k - p_i + delta_ki, the usual
    # graph-relaxation term; "printed": p_k - p_i - delta_ki
    incoming_sign: str = "corrected"
    # "gauss_seidel": nodes updated in id order, each seeing its neighbours'
    # latest poses; "jacobi": all corrections computed, then applied at once
    update: str = "gauss_seidel"
    # divide each node's correction by max(1, a * degree) so no node
    # overshoots its local optimum
    normalize: bool = True
    # node creation on travel since the last node event
    create_distance: float = 0.5
    create_angle: float = math.radians(20.0)

    def __post_init__(self) -> None:
        if not 0 < self.a <= 0.5:
            raise ValueError("correction factor a must lie in (0, 0.5]")
        if self.iterations_per_step < 1 or self.iterations_after_closure < 1:
            raise ValueError("relaxation iterations must be >= 1")
        if self.incoming_sign not in ("corrected", "printed"):
            raise ValueError("incoming_sign must be 'corrected' or 'printed'")
        if self.update not in ("gauss_seidel", "jacobi"):
            raise ValueError("update must be 'gauss_seidel' or 'jacobi'")
        if not (self.create_distance > 0 and self.create_angle > 0):
            raise ValueError("node creation thresholds must be positive")


class ExperienceMap:
    """Graph state.  Poses are kept in an ``(N, 3)`` array; :attr:`nodes`
    materialises immutable :class:`Experience` records on demand."""

    def __init__(self) -> None:
        self._pc: list[tuple[float, float, float]] = []
        self._view: list[int] = []
        self._poses = np.zeros((0, 3))
        self._by_view: dict[int, list[int]] = {}
        self.edges: list[Transition] = []
        self._pairs: set[tuple[int, int]] = set()
        self.current_id: int | None = None
        self.accum = PoseDelta(0.0, 0.0, 0.0)  # robot frame, since the last node event
        self.last_event_t = 0.0
        self._arrays = None  # cached edge arrays, invalidated when an edge is added

    def __len__(self) -> int:
        return len(self._view)

    def node(self, i: int) -> Experience:
        return Experience(i, self._pc[i], self._view[i], Pose(*map(float, self._poses[i])))

    @property
    def nodes(self) -> list[Experience]:
        return [self.node(i) for i in range(len(self))]

    @property
    def poses(self) -> np.ndarray:
        """Read-only view of the node poses."""
        v = self._poses.view()
        v.flags.writeable = False
        return v

    @property
    def current(self) -> Experience:
        if self.current_id is None:
            raise ExperienceMapError("experience map is empty")
        return self.node(self.current_id)

    def set_pose(self, i: int, p: Pose) -> None:
        self._poses[i] = (p.x, p.y, normalize_angle(p.theta))

    def pc_coord(self, i: int) -> tuple[float, float, float]:
        return self._pc[i]

    def experiences_with_view(self, view_index: int) -> list[int]:
        return list(self._by_view.get(view_index, ()))

    def integrate_odometry(self, d: PoseDelta) -> None:
        """Accumulate a robot-frame increment since the last node event."""
        acc = compose(Pose(*self.accum), d)
        self.accum = PoseDelta(acc.x, acc.y, acc.theta)

    def travel(self) -> tuple[float, float]:
        """Distance and absolute heading change since the last node event."""
        return math.hypot(self.accum.dx, self.accum.dy), abs(self.accum.dtheta)

    def accumulated_delta(self) -> PoseDelta:
        """Map-frame additive delta from the current node to the present estimate."""
        cur = self.current.pose
        est = compose(cur, self.accum)
        return PoseDelta(est.x - cur.x, est.y - cur.y, normalize_angle(est.theta - cur.theta))

    def linked(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self._pairs

    def snapshot(self) -> tuple[list[Experience], list[Transition]]:
        return self.nodes, list(self.edges)

    def _add_edge(self, e: Transition) -> None:
        self.edges.append(e)
        self._pairs.add((min(e.from_id, e.to_id), max(e.from_id, e.to_id)))
        self._arrays = None

    def _add_node(self, pc_coord, view_index: int, pose: Pose) -> int:
        self._pc.append(tuple(float(c) for c in pc_coord))
        self._view.append(int(view_index))
        self._poses = np.vstack((self._poses, [[pose.x, pose.y, pose.theta]]))
        self._arrays = None
        i = len(self._view) - 1
        self._by_view.setdefault(int(view_index), []).append(i)
        return i

    def edge_arrays(self):
        """``(from, to, delta, inc_ptr, inc_edge)``: edge endpoints and
        deltas plus a CSR list of the edges incident to each node."""
        if self._arrays is None:
            n = len(self)
            frm = np.array([e.from_id for e in self.edges], dtype=np.int64)
            to = np.array([e.to_id for e in self.edges], dtype=np.int64)
            delta = np.array([tuple(e.delta) for e in self.edges], dtype=np.float64).reshape(-1, 3)
            ends = np.concatenate((frm, to))
            eidx = np.concatenate((np.arange(frm.size), np.arange(to.size)))
            order = np.argsort(ends, kind="stable")
            inc_edge = np.ascontiguousarray(eidx[order], dtype=np.int64)
            inc_ptr = np.zeros(n + 1, dtype=np.int64)
            np.cumsum(np.bincount(ends, minlength=n), out=inc_ptr[1:])
            self._arrays = (frm, to, np.ascontiguousarray(delta), inc_ptr, inc_edge)
        return self._arrays


def _check_delta(d: PoseDelta) -> None:
    if not all(math.isfinite(v) for v in d):
        raise ExperienceMapError(f"non-finite transition delta {tuple(d)}")


def create_experience(emap: ExperienceMap, pc_coord, view_index: int,
                      delta: PoseDelta | None = None, t: float = 0.0) -> Experience:
    """Append a node at ``current.pose + delta`` and link it from the current
    node.  ``delta`` defaults to the accumulated odometry.  The first node
    sits at the origin and has no edge."""
    if emap.current_id is None:
        emap.current_id = emap._add_node(pc_coord, view_index, Pose(0.0, 0.0, 0.0))
    else:
        if delta is None:
            delta = emap.accumulated_delta()
        _check_delta(delta)
        delta = PoseDelta.of(*delta)
        cur = emap.current
        new = emap._add_node(pc_coord, view_index,
                             Pose.of(cur.pose.x + delta.dx, cur.pose.y + delta.dy,
                                     cur.pose.theta + delta.dtheta))
        emap._add_edge(Transition(cur.id, new, delta, max(0.0, t - emap.last_event_t)))
        emap.current_id = new
    emap.accum = PoseDelta(0.0, 0.0, 0.0)
    emap.last_event_t = t
    return emap.current


def close_loop(emap: ExperienceMap, matched_id: int, delta: PoseDelta | None = None,
               t: float = 0.0) -> bool:
    """Join the current node to an existing one and make it current.

    An edge is only added when the two nodes are not already linked.
    Returns whether a new (cycle-forming) edge was added.
    """
    if not 0 <= matched_id < len(emap):
        raise ExperienceMapError(f"unknown experience id {matched_id}")
    cur = emap.current
    if matched_id == cur.id:
        raise ExperienceMapError("cannot close a loop onto the current experience")
    if delta is None:
        delta = emap.accumulated_delta()
    _check_delta(delta)
    added = False
    if not emap.linked(cur.id, matched_id):
        emap._add_edge(Transition(cur.id, matched_id, PoseDelta.of(*delta),
                                  max(0.0, t - emap.last_event_t)))
        added = True
    emap.current_id = matched_id
    emap.accum = PoseDelta(0.0, 0.0, 0.0)
    emap.last_event_t = t
    return added


def edge_residuals(emap: ExperienceMap) -> np.ndarray:
    """``p_to - p_from - delta`` per edge, heading wrapped; shape ``(E, 3)``."""
    if not emap.edges:
        return np.zeros((0, 3))
    frm, to, delta, _, _ = emap.edge_arrays()
    r = emap._poses[to] - emap._poses[frm] - delta
    r[:, 2] = normalize_angles(r[:, 2])
    return r


def _jacobi_sweep(P, frm, to, delta, a, corrected, normalize) -> None:
    r = P[to] - P[frm] - delta
    r[:, 2] = normalize_angles(r[:, 2])
    # incoming term seen from the head node: p_k - p_i +/- delta_ki
    r_in = -r if corrected else -r - 2.0 * delta
    r_in[:, 2] = normalize_angles(r_in[:, 2])
    c = np.zeros_like(P)
    np.add.at(c, frm, r)
    np.add.at(c, to, r_in)
    deg = np.bincount(np.concatenate((frm, to)), minlength=P.shape[0]).astype(float)
    scale = a / np.maximum(1.0, a * deg) if normalize else np.full(P.shape[0], a)
    P += scale[:, None] * c
    P[:, 2] = normalize_angles(P[:, 2])


def relax(emap: ExperienceMap, cfg: RelaxConfig, iterations: int | None = None) -> ExperienceMap:
    """Distribute edge residuals over the node poses.

    Node ``i`` moves by ``a`` times the sum of its edge residuals (outgoing
    ``p_j - p_i - d_ij``, incoming ``p_k - p_i + d_ki`` in the corrected
    form), scaled down for high-degree nodes when ``cfg.normalize`` is set.
    One iteration visits every node once.
    """
    if not emap.edges:
        return emap
    iterations = cfg.iterations_per_step if iterations is None else iterations
    frm, to, delta, inc_ptr, inc_edge = emap.edge_arrays()
    corrected = cfg.incoming_sign == "corrected"
    P = emap._poses
    for _ in range(iterations):
        if cfg.update == "jacobi":
            _jacobi_sweep(P, frm, to, delta, float(cfg.a), corrected, cfg.normalize)
        else:
            kernels.relax_sweep(P, frm, to, delta, inc_ptr, inc_edge, float(cfg.a),
                                corrected, bool(cfg.normalize))
    return emap


def current_pose_estimate(emap: ExperienceMap) -> Pose:
    """Current node pose composed with the odometry accumulated since."""
    return compose(emap.current.pose, emap.accum)
