"""Static SVG figures: cognitive map, active view over time, error over time."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed metadata keeps the SVG bytes reproducible
_SVG_META = {"Date": None, "Creator": None}
matplotlib.rcParams["svg.hashsalt"] = "biolidar-slam"


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def plot_map(nodes, edges, path: str | Path) -> None:
    """Nodes as markers, transitions as line segments."""
    fig, ax = plt.subplots(figsize=(6, 5))
    pos = {n[0]: (n[1], n[2]) for n in nodes}
    for e in edges:
        (x0, y0), (x1, y1) = pos[e[0]], pos[e[1]]
        ax.plot([x0, x1], [y0, y1], color="0.6", linewidth=0.6, zorder=1)
    ax.scatter([p[0] for p in pos.values()], [p[1] for p in pos.values()],
               s=6, color="tab:blue", zorder=2, label="experiences", gid="experience-nodes")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title(f"experience map: {len(nodes)} nodes, {len(edges)} edges")
    _save(fig, Path(path))


def plot_views(rows, path: str | Path) -> None:
    """Active local view index per step; learned views in a second colour."""
    fig, ax = plt.subplots(figsize=(7, 4))
    old = [(t, i) for t, i, new, _ in rows if not new]
    new = [(t, i) for t, i, new, _ in rows if new]
    if old:
        ax.scatter(*zip(*old), s=2, color="tab:orange", label="matched")
    if new:
        ax.scatter(*zip(*new), s=2, color="tab:blue", label="learned")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("active view index")
    ax.legend(loc="upper left", markerscale=4)
    _save(fig, Path(path))


def plot_errors(rows, path: str | Path) -> None:
    """Translational error against time; loop closures marked."""
    fig, ax = plt.subplots(figsize=(7, 4))
    t = [r["t"] for r in rows]
    e = [r["err"] for r in rows]
    ax.plot(t, e, linewidth=0.8, color="tab:red")
    closures = [r["t"] for r in rows if r["loop_closed"]]
    if closures:
        ax.vlines(closures, 0, 1, transform=ax.get_xaxis_transform(), colors="0.8",
                  linewidth=0.4, zorder=0)
    if all(math.isnan(v) for v in e):
        ax.text(0.5, 0.5, "no ground truth", transform=ax.transAxes, ha="center")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("translational error (m)")
    _save(fig, Path(path))
