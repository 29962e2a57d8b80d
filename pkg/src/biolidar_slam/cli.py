"""Command-line front end.

    biolidar-slam simulate --world W --trajectory T [--config C] --out DIR [--seed N]
    biolidar-slam replay --scanlog S [--truth G] [--config C] --out DIR
    biolidar-slam plot --out DIR
    biolidar-slam scenario {maze,square} --out DIR

Failures exit with status 1 and a single ``biolidar-slam: error: ...`` line
on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import Sequence

from . import formats, scenarios
from .config import ConfigError, dump_config, load_config
from .pipeline import PipelineError, SlamConfig, run
from .sim import SimError, run_trajectory

PROG = "biolidar-slam"

SCANS = "scans.log"
TRUTH = "truth.log"
REPORT = "report.log"
VIEWS = "views.log"
NODES = "nodes.txt"
EDGES = "edges.txt"
SUMMARY = "summary.txt"
PLOTS = ("map.svg", "views.svg", "errors.svg")


class CliError(Exception):
    pass


def _config(path: str | None, seed: int | None = None) -> SlamConfig:
    cfg = load_config(path) if path else SlamConfig()
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    return cfg


def _require(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise CliError(f"{what} not found: {p}")
    return p


def _outdir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise CliError(f"cannot create output directory {out}: {e.strerror}") from None
    return out


def _write_results(out: Path, reports, summary, slam) -> None:
    formats.write_report_log(out / REPORT, reports)
    formats.write_views_log(out / VIEWS, [(r.t, r.active_view, r.is_new_view, r.s_best)
                                          for r in reports])
    nodes, edges = slam.map.snapshot()
    formats.write_nodes(out / NODES, nodes)
    formats.write_edges(out / EDGES, edges)
    formats.write_summary(out / SUMMARY, summary)


def cmd_simulate(args) -> int:
    world = formats.read_world(_require(args.world, "world file"))
    script = formats.read_trajectory(_require(args.trajectory, "trajectory file"))
    cfg = _config(args.config and str(_require(args.config, "config file")), args.seed)
    out = _outdir(args.out)
    frames = run_trajectory(world, cfg.lidar, script, cfg.seed)
    formats.write_scan_log(out / SCANS, (f.scan for f in frames))
    formats.write_truth_log(out / TRUTH, ((f.t, f.truth_pose) for f in frames))
    reports, summary, slam = run(frames, cfg)
    _write_results(out, reports, summary, slam)
    return 0


def cmd_replay(args) -> int:
    scans = formats.read_scan_log(_require(args.scanlog, "scan log"))
    cfg = _config(args.config and str(_require(args.config, "config file")))
    frames = scans
    if args.truth:
        from .sim import SimFrame

        truth = formats.read_truth_log(_require(args.truth, "truth log"))
        if len(truth) != len(scans):
            raise CliError(f"truth log has {len(truth)} records for {len(scans)} scans")
        for k, (s, (t, _)) in enumerate(zip(scans, truth)):
            if abs(s.timestamp - t) > 1e-6:
                raise CliError(f"truth record {k + 1} has t={t} but scan {k + 1} has t={s.timestamp}")
        frames = [SimFrame(s, p, s.timestamp) for s, (_, p) in zip(scans, truth)]
    out = _outdir(args.out)
    reports, summary, slam = run(frames, cfg)
    _write_results(out, reports, summary, slam)
    return 0


def cmd_plot(args) -> int:
    from . import plots

    out = Path(args.out)
    rows = formats.read_report_log(_require(str(out / REPORT), "report log"))
    if not rows:
        raise CliError(f"report log is empty: {out / REPORT}")
    views = formats.read_views_log(_require(str(out / VIEWS), "views log"))
    nodes = formats.read_nodes(_require(str(out / NODES), "node export"))
    edges = formats.read_edges(_require(str(out / EDGES), "edge export"))
    plots.plot_map(nodes, edges, out / PLOTS[0])
    plots.plot_views(views, out / PLOTS[1])
    plots.plot_errors(rows, out / PLOTS[2])
    return 0


def cmd_scenario(args) -> int:
    out = _outdir(args.out)
    if args.name == "maze":
        world, script = scenarios.maze_world(), scenarios.maze_trajectory(args.duration)
    else:
        world, script = scenarios.square_world(), scenarios.square_trajectory()
    formats.write_world(out / f"{args.name}.world", world)
    formats.write_trajectory(out / f"{args.name}.traj", script)
    (out / "reference.cfg").write_text(dump_config(SlamConfig()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=PROG, description="LiDAR SLAM with pose cells and an experience map")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate a trajectory and run SLAM on it")
    s.add_argument("--world", required=True)
    s.add_argument("--trajectory", required=True)
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, help="overrides pipeline.seed")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("replay", help="run SLAM on a recorded scan log")
    r.add_argument("--scanlog", required=True)
    r.add_argument("--truth")
    r.add_argument("--config")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_replay)

    pl = sub.add_parser("plot", help="draw SVG figures from a run's outputs")
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=cmd_plot)

    sc = sub.add_parser("scenario", help="write a built-in world, trajectory and reference config")
    sc.add_argument("name", choices=("maze", "square"))
    sc.add_argument("--out", required=True)
    sc.add_argument("--duration", type=float, default=1200.0, help="maze trajectory length in seconds")
    sc.set_defaults(func=cmd_scenario)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ConfigError, formats.FormatError, PipelineError, SimError) as e:
        print(f"{PROG}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
