"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N] [--pipeline STEPS]

Kernel timings call both modules directly.  ``--pipeline`` also times a maze
run of STEPS scans in two subprocesses, one of them forced onto the fallback
with ``BIOLIDAR_SLAM_PURE_PYTHON=1``.
"""

from __future__ import annotations

import argparse
import math
import os
import subprocess
import sys
import timeit

import numpy as np

from biolidar_slam import _pykernels, experience_map as em, scenarios
from biolidar_slam.geometry import PoseDelta

try:
    from biolidar_slam import _ckernels
except ImportError:
    _ckernels = None


def cases():
    rng = np.random.default_rng(0)
    world = scenarios.maze_world()
    segs = np.ascontiguousarray(world.segments, dtype=np.float64)
    angles = np.linspace(-math.pi, math.pi, 360, endpoint=False)

    grid = np.zeros((800, 800))
    ends = rng.uniform(200, 600, (2, 360)).astype(np.int64)

    occ = rng.uniform(-4, 4, (800, 800))
    u, v = rng.uniform(1, 798, (2, 360))

    m = em.ExperienceMap()
    em.create_experience(m, (0, 0, 0), 0)
    for k in range(1000):
        em.create_experience(m, (0, 0, 0), k + 1, PoseDelta(*rng.normal(0, 0.3, 3)))
        if k % 10 == 9:
            em.close_loop(m, int(rng.integers(0, k - 5)), PoseDelta(*rng.normal(0, 0.3, 3)))
    frm, to, delta, inc_ptr, inc_edge = m.edge_arrays()
    poses = m.poses.copy()

    return {
        "raycast (maze, 360 beams)":
            lambda k: k.raycast(segs, 1.0, 1.0, angles, 8.0),
        "bresenham_update (360 rays)":
            lambda k: k.bresenham_update(grid, 400, 400, ends[0], ends[1], 0.9, -0.4, -4.0, 4.0),
        "sample_bilinear (360 points)":
            lambda k: k.sample_bilinear(occ, u, v),
        f"relax_sweep ({len(m)} nodes, {len(m.edges)} edges)":
            lambda k: k.relax_sweep(poses, frm, to, delta, inc_ptr, inc_edge, 0.5, True, True),
    }


def bench_kernels(repeat: int) -> None:
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    print(f"{'kernel':40s}" + "".join(f"{name:>14s}" for name, _ in backends) + "   speed-up")
    for label, fn in cases().items():
        row = []
        for _, mod in backends:
            n, _ = timeit.Timer(lambda: fn(mod)).autorange()
            best = min(timeit.repeat(lambda: fn(mod), number=n, repeat=repeat)) / n
            row.append(best)
        cells = "".join(f"{t * 1e6:11.1f} us" for t in row)
        ratio = f"{row[0] / row[1]:9.1f}x" if len(row) == 2 else ""
        print(f"{label:40s}{cells}{ratio}")
    if _ckernels is None:
        print("compiled extension not built; only the fallback was timed")


_PIPELINE = """
import time
from biolidar_slam import BACKEND, pipeline, scenarios
from biolidar_slam.sim import LidarModel, run_trajectory
frames = run_trajectory(scenarios.maze_world(), LidarModel(), scenarios.maze_trajectory(), 0)[:{steps}]
t = time.perf_counter()
pipeline.run(frames)
print(BACKEND, (time.perf_counter() - t) / len(frames))
"""


def bench_pipeline(steps: int) -> None:
    for pure in (False, True):
        env = dict(os.environ)
        env.pop("BIOLIDAR_SLAM_PURE_PYTHON", None)
        if pure:
            env["BIOLIDAR_SLAM_PURE_PYTHON"] = "1"
        out = subprocess.run([sys.executable, "-c", _PIPELINE.format(steps=steps)], env=env,
                             check=True, capture_output=True, text=True).stdout.split()
        print(f"pipeline, {steps} maze scans, backend {out[0]:7s}: {float(out[1]) * 1e3:6.1f} ms/scan")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--pipeline", type=int, default=0, metavar="STEPS")
    args = p.parse_args()
    bench_kernels(args.repeat)
    if args.pipeline:
        bench_pipeline(args.pipeline)


if __name__ == "__main__":
    main()
