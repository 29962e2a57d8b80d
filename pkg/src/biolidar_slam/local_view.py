"""Two-stage LiDAR place recognition and local-view-cell activity.

Stage one buckets scans by an integer hash of their summed ranges; stage two
compares downsampled range templates under a small circular shift.  A scan
that matches no learned view is learned as a new one.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .geometry import Scan


@dataclass(frozen=True)
class LocalViewConfig:
    d_s: float = 1.0
    M: int = 72
    beta: int = 4
    s_t: float | None = None  # None: 0.1 * (range_max / 10)**2 of the first scan
    invalid_fill: float | None = None  # None: the scan's range_max
    wrap: bool | None = None  # circular template shifts; None: only for full-circle scans
    probe_neighbors: bool = False  # also look in buckets h-1 and h+1

    def __post_init__(self) -> None:
        if self.M < 8:
            raise ValueError("template size M must be >= 8")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.s_t is not None and not self.s_t > 0:
            raise ValueError("s_t must be positive")

    def threshold(self, range_max: float) -> float:
        if self.s_t is not None:
            return self.s_t
        return 0.1 * (range_max / 10.0) ** 2

    def wrap_for(self, scan: Scan) -> bool:
        if self.wrap is not None:
            return self.wrap
        return scan.fov >= 2.0 * math.pi - 0.5 * scan.angle_increment


@dataclass(frozen=True, eq=False)
class ViewTemplate:
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("template values must be finite and non-negative")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class LocalView:
    coarse: int
    template: ViewTemplate


def coarse_feature(scan: Scan | np.ndarray, d_s: float, invalid_fill: float | None = None) -> int:
    """Integer hash ``floor(10**-d_s * sum(ranges))``."""
    d = scan.filled(invalid_fill) if isinstance(scan, Scan) else np.asarray(scan, dtype=float)
    return int(math.floor(10.0 ** (-d_s) * float(np.sum(d))))


def build_template(scan: Scan | np.ndarray, M: int, invalid_fill: float | None = None) -> ViewTemplate:
    """Downsample ``N`` ranges to ``M`` values by linear interpolation at the
    1-based positions ``N/M * i``, ``i = 1..M``."""
    d = scan.filled(invalid_fill) if isinstance(scan, Scan) else np.asarray(scan, dtype=float)
    n = d.size
    pos = np.clip(n / M * np.arange(1, M + 1), 1.0, float(n))
    lo = np.floor(pos)
    hi = np.ceil(pos)
    dlo = d[lo.astype(int) - 1]
    dhi = d[hi.astype(int) - 1]
    return ViewTemplate(dlo + (pos - lo) * (dhi - dlo))


def similarity(t1: ViewTemplate, t2: ViewTemplate, beta: int, wrap: bool = True) -> float:
    """Smallest mean squared difference between ``t1`` shifted by
    ``j in [-beta, beta]`` and ``t2``.

    Without ``wrap`` only overlapping entries are compared and the mean is
    taken over the overlap.  Squared differences are summed in sorted order,
    which makes the result exactly symmetric in its arguments.
    """
    a, b = t1.values, t2.values
    if a.size != b.size:
        raise ValueError("templates differ in length")
    m = a.size
    if wrap:
        # row k holds a shifted by j = k - beta: element i is a[(i + j) mod m]
        idx = (np.arange(m)[None, :] + np.arange(-beta, beta + 1)[:, None]) % m
        diff = a[idx] - b
        return float(np.min(np.sort(diff * diff, axis=1).sum(axis=1))) / m
    best = math.inf
    for j in range(-beta, beta + 1):
        if abs(j) >= m:
            continue
        diff = a[max(j, 0):m + min(j, 0)] - b[max(-j, 0):m - max(j, 0)]
        best = min(best, float(np.sort(diff * diff).sum()) / diff.size)
    return best


@dataclass
class LocalViewCells:
    views: list[LocalView] = field(default_factory=list)
    activity: np.ndarray = field(default_factory=lambda: np.zeros(0))
    active_index: int | None = None
    buckets: dict[int, list[int]] = field(default_factory=lambda: defaultdict(list))
    s_best: float = math.inf

    def __len__(self) -> int:
        return len(self.views)


def make_view(scan: Scan, cfg: LocalViewConfig) -> LocalView:
    return LocalView(coarse_feature(scan, cfg.d_s, cfg.invalid_fill),
                     build_template(scan, cfg.M, cfg.invalid_fill))


def process(scan: Scan, cells: LocalViewCells, cfg: LocalViewConfig):
    """Match ``scan`` against the learned views, updating activities.

    Returns ``(cells, active_index, is_new)``; ``cells`` is updated in place.
    """
    s_t = cfg.threshold(scan.range_max)
    wrap = cfg.wrap_for(scan)
    v_in = make_view(scan, cfg)
    V = np.zeros(len(cells.views) + 1)
    keys = [v_in.coarse]
    if cfg.probe_neighbors:
        keys += [v_in.coarse - 1, v_in.coarse + 1]
    found = False
    best = math.inf
    for key in keys:
        for i in cells.buckets.get(key, ()):
            s = similarity(cells.views[i].template, v_in.template, cfg.beta, wrap)
            best = min(best, s)
            if s < s_t:
                found = True
                V[i] = 1.0 - min(s_t, s) / s_t
    if found:
        cells.activity = V[:-1]
        # argmax returns the lowest index among ties
        cells.active_index = int(np.argmax(cells.activity))
        is_new = False
    else:
        idx = len(cells.views)
        cells.views.append(v_in)
        cells.buckets[v_in.coarse].append(idx)
        V[idx] = 1.0
        cells.activity = V
        cells.active_index = idx
        is_new = True
    cells.s_best = best
    return cells, cells.active_index, is_new


def brute_force_matches(views: list[LocalView], scan: Scan, cfg: LocalViewConfig) -> set[int]:
    """Views whose template matches ``scan`` among all views with an equal
    coarse feature, found by exhaustive scan of the list (no buckets)."""
    s_t = cfg.threshold(scan.range_max)
    v_in = make_view(scan, cfg)
    return {i for i, v in enumerate(views)
            if v.coarse == v_in.coarse
            and similarity(v.template, v_in.template, cfg.beta, cfg.wrap_for(scan)) < s_t}
