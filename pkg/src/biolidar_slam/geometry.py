"""Planar pose algebra, scan containers and polar/Cartesian conversion.

Angles are radians everywhere and are wrapped to the half-open interval
[-pi, pi).  Poses and deltas are immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    """Invalid geometric input (non-finite angle, malformed scan, ...)."""


def normalize_angle(a: float) -> float:
    """Wrap ``a`` into [-pi, pi)."""
    if not math.isfinite(a):
        raise GeometryError(f"cannot normalize non-finite angle {a!r}")
    r = a - TWO_PI * math.floor((a + math.pi) / TWO_PI)
    # floor() can land one period off when a + pi is within an ulp of k*2pi
    if r >= math.pi:
        r -= TWO_PI
    elif r < -math.pi:
        r += TWO_PI
    return r


def normalize_angles(a: np.ndarray) -> np.ndarray:
    """Vectorized :func:`normalize_angle`."""
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise GeometryError("cannot normalize non-finite angles")
    r = a - TWO_PI * np.floor((a + math.pi) / TWO_PI)
    r = np.where(r >= math.pi, r - TWO_PI, r)
    return np.where(r < -math.pi, r + TWO_PI, r)


class Pose(NamedTuple):
    """Planar pose; construct through :meth:`of` to get a wrapped heading."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    @classmethod
    def of(cls, x: float, y: float, theta: float) -> "Pose":
        if not (math.isfinite(x) and math.isfinite(y)):
            raise GeometryError(f"non-finite pose position ({x}, {y})")
        return cls(float(x), float(y), normalize_angle(float(theta)))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])


class PoseDelta(NamedTuple):
    """Pose increment (dx, dy, dtheta)."""

    dx: float = 0.0
    dy: float = 0.0
    dtheta: float = 0.0

    @classmethod
    def of(cls, dx: float, dy: float, dtheta: float) -> "PoseDelta":
        if not (math.isfinite(dx) and math.isfinite(dy)):
            raise GeometryError(f"non-finite pose delta ({dx}, {dy})")
        return cls(float(dx), float(dy), normalize_angle(float(dtheta)))

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self)


def transform_point(p: Pose, e: tuple[float, float]) -> tuple[float, float]:
    """Rotate ``e`` by ``p.theta`` and translate by ``(p.x, p.y)``."""
    c, s = math.cos(p.theta), math.sin(p.theta)
    ex, ey = e
    return (c * ex - s * ey + p.x, s * ex + c * ey + p.y)


def transform_points(p: Pose, pts: np.ndarray) -> np.ndarray:
    """Apply :func:`transform_point` to an ``(n, 2)`` array."""
    c, s = math.cos(p.theta), math.sin(p.theta)
    pts = np.asarray(pts, dtype=float)
    out = np.empty_like(pts)
    out[:, 0] = c * pts[:, 0] - s * pts[:, 1] + p.x
    out[:, 1] = s * pts[:, 0] + c * pts[:, 1] + p.y
    return out


def compose(p: Pose, d: PoseDelta) -> Pose:
    """Apply a robot-frame increment ``d`` to ``p``.

    The translation of ``d`` is expressed in the frame of ``p`` (forward,
    lateral), which is the convention the odometry uses for the deltas it
    emits.
    """
    c, s = math.cos(p.theta), math.sin(p.theta)
    return Pose.of(p.x + c * d.dx - s * d.dy,
                   p.y + s * d.dx + c * d.dy,
                   p.theta + d.dtheta)


def between(a: Pose, b: Pose) -> PoseDelta:
    """Robot-frame increment taking ``a`` to ``b``; inverse of :func:`compose`."""
    c, s = math.cos(a.theta), math.sin(a.theta)
    dx, dy = b.x - a.x, b.y - a.y
    return PoseDelta.of(c * dx + s * dy, -s * dx + c * dy, b.theta - a.theta)


@dataclass(frozen=True, eq=False)
class Scan:
    """One LiDAR revolution.

    ``ranges`` holds ``np.inf`` for beams without a return; every finite
    entry lies in ``(0, range_max]``.  Beam ``i`` points along
    ``angle_min + i * angle_increment``.
    """

    ranges: np.ndarray
    angle_min: float
    angle_increment: float
    range_max: float
    timestamp: float = 0.0

    def __post_init__(self) -> None:
        r = np.array(self.ranges, dtype=float)
        if r.ndim != 1 or r.size < 2:
            raise GeometryError("a scan needs at least two beams")
        if not self.angle_increment > 0:
            raise GeometryError("angle_increment must be positive")
        if not self.range_max > 0:
            raise GeometryError("range_max must be positive")
        if np.any(np.isnan(r)) or np.any(r == -np.inf):
            raise GeometryError("ranges may only contain finite values or +inf")
        fin = r[np.isfinite(r)]
        if np.any(fin <= 0) or np.any(fin > self.range_max):
            raise GeometryError("finite ranges must lie in (0, range_max]")
        r.flags.writeable = False
        object.__setattr__(self, "ranges", r)

    @property
    def n(self) -> int:
        return self.ranges.size

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.ranges)

    @property
    def angles(self) -> np.ndarray:
        return self.angle_min + self.angle_increment * np.arange(self.n)

    @property
    def fov(self) -> float:
        return self.angle_increment * self.n

    def filled(self, fill: float | None = None) -> np.ndarray:
        """Ranges with no-return beams replaced by ``fill`` (default range_max)."""
        fill = self.range_max if fill is None else fill
        return np.where(self.valid, self.ranges, fill)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Scan):
            return NotImplemented
        return (self.angle_min == other.angle_min
                and self.angle_increment == other.angle_increment
                and self.range_max == other.range_max
                and self.timestamp == other.timestamp
                and np.array_equal(self.ranges, other.ranges))


def scan_to_points(scan: Scan) -> np.ndarray:
    """Cartesian endpoints ``(n_valid, 2)`` of the valid beams, sensor frame."""
    ok = scan.valid
    if not ok.any():
        raise GeometryError("scan has no valid beams")
    d = scan.ranges[ok]
    a = scan.angles[ok]
    return np.column_stack((d * np.cos(a), d * np.sin(a)))
