"""Line-oriented text formats for worlds, trajectories, logs and map exports.

All formats are whitespace-separated, one record per line; ``#`` starts a
comment.  Floats in scan and truth logs are written with ``repr`` so a log
read back reproduces the exact values that were written.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .experience_map import Experience, Transition
from .geometry import Pose, Scan
from .pipeline import StepReport, Summary
from .sim import TrajectoryScript, World


class FormatError(ValueError):
    pass


def _records(path: Path) -> Iterator[tuple[int, list[str]]]:
    try:
        text = path.read_text()
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _floats(path: Path, lineno: int, fields: Sequence[str], n: int | None = None) -> list[float]:
    if n is not None and len(fields) != n:
        raise FormatError(f"{path}:{lineno}: expected {n} fields, got {len(fields)}")
    try:
        vals = [float(f) for f in fields]
    except ValueError:
        raise FormatError(f"{path}:{lineno}: non-numeric field") from None
    if any(math.isnan(v) for v in vals):
        raise FormatError(f"{path}:{lineno}: NaN field")
    return vals


# world: "x0 y0 x1 y1" per wall, optional "bounds xmin ymin xmax ymax"

def read_world(path: str | Path) -> World:
    path = Path(path)
    segs, bounds = [], None
    for lineno, f in _records(path):
        if f[0] == "bounds":
            bounds = tuple(_floats(path, lineno, f[1:], 4))
            continue
        x0, y0, x1, y1 = _floats(path, lineno, f, 4)
        if not all(math.isfinite(v) for v in (x0, y0, x1, y1)):
            raise FormatError(f"{path}:{lineno}: wall coordinates must be finite")
        segs.append(((x0, y0), (x1, y1)))
    if not segs:
        raise FormatError(f"{path}: no walls")
    try:
        return World.from_segments(segs, bounds)
    except ValueError as e:
        raise FormatError(f"{path}: {e}") from None


def write_world(path: str | Path, world: World) -> None:
    lines = ["bounds " + " ".join(repr(float(b)) for b in world.bounds)]
    lines += [" ".join(repr(float(v)) for v in s) for s in world.segments]
    Path(path).write_text("\n".join(lines) + "\n")


# trajectory: "scan_rate R" then "t x y theta" waypoints

def read_trajectory(path: str | Path) -> TrajectoryScript:
    path = Path(path)
    rate, wps = 5.0, []
    for lineno, f in _records(path):
        if f[0] == "scan_rate":
            (rate,) = _floats(path, lineno, f[1:], 1)
            continue
        t, x, y, th = _floats(path, lineno, f, 4)
        wps.append((Pose(x, y, th), t))
    if not wps:
        raise FormatError(f"{path}: no waypoints")
    try:
        return TrajectoryScript(tuple(wps), rate)
    except ValueError as e:
        raise FormatError(f"{path}: {e}") from None


def write_trajectory(path: str | Path, script: TrajectoryScript) -> None:
    lines = [f"scan_rate {script.scan_rate!r}"]
    lines += [f"{t!r} {p.x!r} {p.y!r} {p.theta!r}" for p, t in script.waypoints]
    Path(path).write_text("\n".join(lines) + "\n")


# scan log: "t angle_min angle_increment range_max r_1 ... r_N", inf = no return

def format_scan(scan: Scan) -> str:
    head = f"{scan.timestamp!r} {scan.angle_min!r} {scan.angle_increment!r} {scan.range_max!r}"
    return head + " " + " ".join(repr(float(r)) for r in scan.ranges)


def read_scan_log(path: str | Path) -> list[Scan]:
    path = Path(path)
    scans = []
    for lineno, f in _records(path):
        if len(f) < 6:
            raise FormatError(f"{path}:{lineno}: a scan record needs at least 6 fields")
        vals = _floats(path, lineno, f)
        try:
            scans.append(Scan(vals[4:], vals[1], vals[2], vals[3], vals[0]))
        except ValueError as e:
            raise FormatError(f"{path}:{lineno}: {e}") from None
    if not scans:
        raise FormatError(f"{path}: no scans")
    return scans


def write_scan_log(path: str | Path, scans: Iterable[Scan]) -> None:
    Path(path).write_text("".join(format_scan(s) + "\n" for s in scans))


# truth log: "t x y theta"

def read_truth_log(path: str | Path) -> list[tuple[float, Pose]]:
    path = Path(path)
    out = []
    for lineno, f in _records(path):
        t, x, y, th = _floats(path, lineno, f, 4)
        if not all(math.isfinite(v) for v in (t, x, y, th)):
            raise FormatError(f"{path}:{lineno}: non-finite field")
        out.append((t, Pose.of(x, y, th)))
    return out


def write_truth_log(path: str | Path, rows: Iterable[tuple[float, Pose]]) -> None:
    Path(path).write_text("".join(f"{t!r} {p.x!r} {p.y!r} {p.theta!r}\n" for t, p in rows))


# report log: "t err_x err_y err node_count edge_count loop_closed active_view"

def _g(v: float) -> str:
    return "nan" if math.isnan(v) else f"{v:.6f}"


def write_report_log(path: str | Path, reports: Iterable[StepReport]) -> None:
    lines = [f"{r.t:.6f} {_g(r.err_x)} {_g(r.err_y)} {_g(r.err)} {r.node_count} "
             f"{r.edge_count} {int(r.loop_closed)} {r.active_view}\n" for r in reports]
    Path(path).write_text("".join(lines))


def read_report_log(path: str | Path) -> list[dict]:
    path = Path(path)
    rows = []
    for lineno, f in _records(path):
        if len(f) != 8:
            raise FormatError(f"{path}:{lineno}: expected 8 fields, got {len(f)}")
        try:
            rows.append(dict(t=float(f[0]), err_x=float(f[1]), err_y=float(f[2]),
                             err=float(f[3]), node_count=int(f[4]), edge_count=int(f[5]),
                             loop_closed=bool(int(f[6])), active_view=int(f[7])))
        except ValueError:
            raise FormatError(f"{path}:{lineno}: malformed report record") from None
    return rows


# views log: "t active_index is_new s_best"

def write_views_log(path: str | Path, rows: Iterable[tuple[float, int, bool, float]]) -> None:
    Path(path).write_text("".join(
        f"{t:.6f} {i} {int(new)} {'inf' if math.isinf(s) else f'{s:.6g}'}\n"
        for t, i, new, s in rows))


def read_views_log(path: str | Path) -> list[tuple[float, int, bool, float]]:
    path = Path(path)
    out = []
    for lineno, f in _records(path):
        if len(f) != 4:
            raise FormatError(f"{path}:{lineno}: expected 4 fields, got {len(f)}")
        try:
            out.append((float(f[0]), int(f[1]), bool(int(f[2])), float(f[3])))
        except ValueError:
            raise FormatError(f"{path}:{lineno}: malformed views record") from None
    return out


# map export

def write_nodes(path: str | Path, nodes: Iterable[Experience]) -> None:
    Path(path).write_text("".join(
        f"{n.id} {n.pose.x:.9f} {n.pose.y:.9f} {n.pose.theta:.9f} {n.view_index}\n" for n in nodes))


def write_edges(path: str | Path, edges: Iterable[Transition]) -> None:
    Path(path).write_text("".join(
        f"{e.from_id} {e.to_id} {e.delta.dx:.9f} {e.delta.dy:.9f} {e.delta.dtheta:.9f} {e.dt:.6f}\n"
        for e in edges))


def read_nodes(path: str | Path) -> list[tuple[int, float, float, float, int]]:
    path = Path(path)
    out = []
    for lineno, f in _records(path):
        if len(f) != 5:
            raise FormatError(f"{path}:{lineno}: expected 5 fields, got {len(f)}")
        try:
            out.append((int(f[0]), float(f[1]), float(f[2]), float(f[3]), int(f[4])))
        except ValueError:
            raise FormatError(f"{path}:{lineno}: malformed node record") from None
    return out


def read_edges(path: str | Path) -> list[tuple[int, int, float, float, float, float]]:
    path = Path(path)
    out = []
    for lineno, f in _records(path):
        if len(f) != 6:
            raise FormatError(f"{path}:{lineno}: expected 6 fields, got {len(f)}")
        try:
            out.append((int(f[0]), int(f[1]), *(float(v) for v in f[2:])))
        except ValueError:
            raise FormatError(f"{path}:{lineno}: malformed edge record") from None
    return out


# summary: "mean_err min_err max_err rmse n_steps n_nodes n_edges n_views"

def write_summary(path: str | Path, s: Summary) -> None:
    Path(path).write_text(f"{_g(s.mean_err)} {_g(s.min_err)} {_g(s.max_err)} {_g(s.rmse)} "
                          f"{s.n_steps} {s.n_nodes} {s.n_edges} {s.n_views}\n")


def read_summary(path: str | Path) -> Summary:
    path = Path(path)
    recs = list(_records(path))
    if len(recs) != 1 or len(recs[0][1]) != 8:
        raise FormatError(f"{path}: expected one line of 8 fields")
    f = recs[0][1]
    return Summary(*(float(v) for v in f[:4]), *(int(v) for v in f[4:]))
