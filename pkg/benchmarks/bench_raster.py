#!/usr/bin/env python3
"""Benchmark the raster kernels: compiled extension vs numpy fallback.

Rasterization dominates the platform's CPU profile (every IoU rasterizes
two regions), so the hot loop ships as a Cython extension with the numpy
implementation as an import-time fallback. This script measures both on the
same workload and verifies they produce identical masks while at it.

Usage: python benchmarks/bench_raster.py [--pairs 50] [--grid 256] [--ss 3]
"""

from __future__ import annotations

import argparse
import math
import random
import time

import numpy as np

from annoforge.geometry import GridSpec, Polygon, iou
from annoforge.geometry import _kernels_py

try:
    from annoforge.geometry import _kernels as _compiled
except ImportError:
    _compiled = None


def random_polygon(rng: random.Random, extent: float) -> Polygon:
    cx, cy = rng.uniform(0.3, 0.7) * extent, rng.uniform(0.3, 0.7) * extent
    radius = rng.uniform(0.15, 0.45) * extent
    k = rng.randint(3, 12)
    angles = sorted(rng.uniform(0, 2 * math.pi) for _ in range(k))
    return Polygon.from_points(
        [(cx + radius * math.cos(a), cy + radius * math.sin(a)) for a in angles])


def bench(kernel, polygons, grid: GridSpec) -> float:
    started = time.perf_counter()
    for poly in polygons:
        xs, ys = poly.coords()
        kernel.pixel_counts(xs, ys, grid.width, grid.height, grid.supersample)
    return time.perf_counter() - started


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pairs", type=int, default=50)
    parser.add_argument("--grid", type=int, default=256)
    parser.add_argument("--ss", type=int, default=3)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    grid = GridSpec(args.grid, args.grid, args.ss)
    polygons = [random_polygon(rng, args.grid) for _ in range(args.pairs * 2)]

    print(f"workload: {len(polygons)} rasterizations on "
          f"{args.grid}x{args.grid} grid, supersample {args.ss}")

    py_time = bench(_kernels_py, polygons, grid)
    print(f"numpy fallback : {py_time:8.3f}s  "
          f"({py_time / len(polygons) * 1000:6.2f} ms/polygon)")

    if _compiled is None:
        print("compiled kernel: not built (pip install -e . with a C compiler)")
        return 0

    c_time = bench(_compiled, polygons, grid)
    print(f"compiled kernel: {c_time:8.3f}s  "
          f"({c_time / len(polygons) * 1000:6.2f} ms/polygon)")
    print(f"speedup        : {py_time / c_time:8.1f}x")

    mismatches = 0
    for poly in polygons[:20]:
        xs, ys = poly.coords()
        a = _compiled.pixel_counts(xs, ys, grid.width, grid.height, grid.supersample)
        b = _kernels_py.pixel_counts(xs, ys, grid.width, grid.height, grid.supersample)
        if not np.array_equal(a, b):
            mismatches += 1
    print(f"parity check   : {'OK' if mismatches == 0 else f'{mismatches} MISMATCHES'}"
          f" (20 polygons, exact array equality)")

    # end-to-end flavor: a full IoU through the public API
    a, b = polygons[0], polygons[1]
    started = time.perf_counter()
    value = iou(a, b, grid)
    print(f"one iou() call : {(time.perf_counter() - started) * 1000:.2f} ms "
          f"(value {value:.4f})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
