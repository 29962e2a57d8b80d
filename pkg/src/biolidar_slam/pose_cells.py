"""Three-dimensional continuous attractor network over (x', y', theta').

All three axes wrap.  Activity is shifted by odometry (path integration),
receives calibration input from matched local views, and settles through
local Gaussian excitation and broader inhibition.  Cell ``(i, j, k)``
decodes to ``((i - n_x//2) * cell_size_xy, (j - n_y//2) * cell_size_xy,
(k - n_theta//2) * cell_size_theta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.ndimage import convolve1d

from .geometry import Pose, PoseDelta, normalize_angle


@dataclass(frozen=True)
class PoseCellConfig:
    n_x: int = 40
    n_y: int = 40
    n_theta: int = 36
    cell_size_xy: float = 0.25
    cell_size_theta: float = math.radians(10.0)
    excite_sigma: float = 1.0
    excite_radius: int = 3  # 7 cells per axis
    inhibit_sigma: float = 2.0
    inhibit_radius: int = 6
    global_inhibition: float = 0.00002
    k_v: float = 0.02
    consec_threshold: int = 3
    decode_radius: int = 2  # 5-cell window

    def __post_init__(self) -> None:
        if min(self.n_x, self.n_y, self.n_theta) < 5:
            raise ValueError("pose cell grid needs at least 5 cells per axis")
        if not (self.cell_size_xy > 0 and self.cell_size_theta > 0):
            raise ValueError("cell sizes must be positive")
        if not (self.excite_sigma > 0 and self.inhibit_sigma > 0):
            raise ValueError("kernel widths must be positive")
        if self.k_v < 0 or self.global_inhibition < 0:
            raise ValueError("k_v and global_inhibition must be non-negative")
        if self.consec_threshold < 1:
            raise ValueError("consec_threshold must be >= 1")

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n_x, self.n_y, self.n_theta)

    # path-integration gains, cells per metre / per radian
    @property
    def k_x(self) -> float:
        return 1.0 / self.cell_size_xy

    @property
    def k_y(self) -> float:
        return 1.0 / self.cell_size_xy

    @property
    def k_theta(self) -> float:
        return 1.0 / self.cell_size_theta

    @property
    def center(self) -> tuple[int, int, int]:
        return (self.n_x // 2, self.n_y // 2, self.n_theta // 2)


@dataclass
class PoseCellNetwork:
    activity: np.ndarray
    consecutive: int = 0  # consecutive steps with a matched view

    @classmethod
    def initial(cls, cfg: PoseCellConfig) -> "PoseCellNetwork":
        """Unit impulse at the grid centre, settled by one attractor step."""
        net = cls(np.zeros(cfg.shape))
        net.activity[cfg.center] = 1.0
        return attractor_step(net, cfg)


class DecodedPose(NamedTuple):
    pose: Pose
    packet_mass: float
    cell: tuple[float, float, float]  # fractional cell coordinates of the centroid


@dataclass
class ViewToPoseLinks:
    links: dict[int, tuple[int, int, int]] = field(default_factory=dict)


def gaussian_kernel(sigma: float, radius: int) -> np.ndarray:
    x = np.arange(-radius, radius + 1, dtype=float)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def _circular(kernel: np.ndarray, n: int) -> np.ndarray:
    """Fold a centred kernel onto an axis of ``n`` cells; returns a centred
    kernel of odd length at most ``n`` (or ``n + 1`` for even ``n``)."""
    r = kernel.size // 2
    if kernel.size <= n:
        return kernel
    folded = np.zeros(n)
    for off, w in zip(range(-r, r + 1), kernel):
        folded[off % n] += w
    half = n // 2
    # re-centre: offsets -half..n-1-half
    out = np.zeros(2 * half + 1)
    for off in range(-half, n - half):
        out[off + half] = folded[off % n]
    return out


def _convolve_wrap(a: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    out = a
    for axis in range(3):
        k = _circular(kernel, a.shape[axis])
        out = convolve1d(out, k, axis=axis, mode="wrap")
    return out


def attractor_step(net: PoseCellNetwork, cfg: PoseCellConfig) -> PoseCellNetwork:
    """Local excitation, broader inhibition, clamp, normalise to unit mass."""
    a = net.activity
    excite = _convolve_wrap(a, gaussian_kernel(cfg.excite_sigma, cfg.excite_radius))
    inhibit = _convolve_wrap(a, gaussian_kernel(cfg.inhibit_sigma, cfg.inhibit_radius))
    new = a + excite - inhibit - cfg.global_inhibition
    np.maximum(new, 0.0, out=new)
    total = new.sum()
    if not total > 0:
        new = np.zeros_like(a)
        new[np.unravel_index(np.argmax(a), a.shape)] = 1.0
        total = 1.0
    net.activity = new / total
    return net


def _shift_axis(a: np.ndarray, s: float, axis: int) -> np.ndarray:
    whole = math.floor(s)
    frac = s - whole
    out = np.roll(a, whole, axis=axis)
    if frac == 0.0:
        return out
    return (1.0 - frac) * out + frac * np.roll(out, 1, axis=axis)


def path_integrate(net: PoseCellNetwork, delta: PoseDelta, cfg: PoseCellConfig) -> PoseCellNetwork:
    """Shift activity by ``(k_x dx, k_y dy, k_theta dtheta)`` cells.

    ``delta`` is expressed along the network axes.  The integer part of
    each shift is an index roll and the fractional remainder splits mass
    between neighbouring cells, so the eight weights over the 2x2x2 cube
    are products of per-axis ``(1 - f, f)``.  Total activity is preserved.
    """
    if not delta.is_finite():
        raise ValueError("path_integrate needs a finite delta")
    a = net.activity
    a = _shift_axis(a, cfg.k_x * delta.dx, 0)
    a = _shift_axis(a, cfg.k_y * delta.dy, 1)
    a = _shift_axis(a, cfg.k_theta * delta.dtheta, 2)
    net.activity = a
    return net


def egocentric_to_network(delta: PoseDelta, heading: float) -> PoseDelta:
    """Rotate a robot-frame increment into network axes using the heading
    currently represented by the packet."""
    c, s = math.cos(heading), math.sin(heading)
    return PoseDelta(c * delta.dx - s * delta.dy, s * delta.dx + c * delta.dy, delta.dtheta)


def inject_view(net: PoseCellNetwork, activity: np.ndarray, links: ViewToPoseLinks,
                cfg: PoseCellConfig) -> PoseCellNetwork:
    """Add ``k_v * V_i`` at the pose cell linked to each active view.

    Injection is gated: a call with any positive activity counts as a
    matched step, and energy is only added once ``consec_threshold``
    consecutive matched steps have been seen.  A call with no active view
    resets the counter.
    """
    V = np.asarray(activity, dtype=float)
    active = [i for i in np.flatnonzero(V > 0) if int(i) in links.links]
    if not active:
        net.consecutive = 0
        return net
    net.consecutive += 1
    if net.consecutive < cfg.consec_threshold:
        return net
    for i in active:
        net.activity[links.links[int(i)]] += cfg.k_v * V[i]
    return net


def learn_link(net: PoseCellNetwork, view_index: int, links: ViewToPoseLinks) -> ViewToPoseLinks:
    """Link a newly learned view to the most active pose cell."""
    if view_index in links.links:
        raise ValueError(f"view {view_index} is already linked")
    idx = np.unravel_index(int(np.argmax(net.activity)), net.activity.shape)
    links.links[view_index] = tuple(int(c) for c in idx)
    return links


def _circular_mean(weights: np.ndarray, idx: np.ndarray, n: int) -> float:
    ang = 2.0 * math.pi * idx / n
    m = math.atan2(float(np.dot(weights, np.sin(ang))), float(np.dot(weights, np.cos(ang))))
    return (m * n / (2.0 * math.pi)) % n


def decode(net: PoseCellNetwork, cfg: PoseCellConfig) -> DecodedPose:
    """Centroid of the packet around the most active cell.

    Each axis uses the activity-weighted circular mean over a window of
    ``2 * decode_radius + 1`` cells centred on the maximum.
    """
    a = net.activity
    total = float(a.sum())
    if not total > 0:
        raise ValueError("cannot decode an empty network")
    peak = np.unravel_index(int(np.argmax(a)), a.shape)
    r = cfg.decode_radius
    idx = [np.arange(p - r, p + r + 1) % n for p, n in zip(peak, a.shape)]
    win = a[np.ix_(*idx)]
    centre = []
    for axis, n in enumerate(a.shape):
        other = tuple(ax for ax in range(3) if ax != axis)
        centre.append(_circular_mean(win.sum(axis=other), idx[axis], n))
    mass = float(win.sum()) / total
    cx, cy, ct = cfg.center
    # positions relative to the grid centre, wrapped into the represented extent
    def rel(c: float, o: int, n: int) -> float:
        d = (c - o) % n
        return d - n if d >= n / 2 else d
    pose = Pose.of(rel(centre[0], cx, cfg.n_x) * cfg.cell_size_xy,
                   rel(centre[1], cy, cfg.n_y) * cfg.cell_size_xy,
                   normalize_angle((centre[2] - ct) * cfg.cell_size_theta))
    return DecodedPose(pose, mass, (centre[0], centre[1], centre[2]))


def cell_distance(a: tuple[float, float, float], b: tuple[float, float, float],
                  cfg: PoseCellConfig) -> float:
    """Euclidean distance between fractional cell coordinates on the torus."""
    acc = 0.0
    for u, v, n in zip(a, b, cfg.shape):
        d = abs(u - v) % n
        d = min(d, n - d)
        acc += d * d
    return math.sqrt(acc)
