#!/usr/bin/env python3
"""Time subdivision-tree construction across depths and input sizes.

Builds a synthetic indoor scene cloud, then times tree construction at a
range of depths plus a doubled-size cloud at a reference depth. Rounds are
interleaved (each round times every configuration once) so slow drift in
machine load spreads evenly across configurations, and medians are
reported. A warm-up build runs first so allocator and cache effects do not
land on whichever configuration happens to run first.
"""
import argparse
import statistics
import sys
from time import perf_counter

from octoplan.geometry import aabb_of
from octoplan.mapgen import scene_cloud
from octoplan.tree import build


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=110_000,
                        help="base cloud size (default 110000)")
    parser.add_argument("--depths", default="4,5,6,7,8",
                        help="comma-separated depths to time")
    parser.add_argument("--rounds", type=int, default=5,
                        help="interleaved timing rounds (default 5)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    depths = [int(v) for v in args.depths.split(",")]
    cloud = scene_cloud(args.points, seed=args.seed)
    dom = aabb_of(cloud)
    build(cloud, dom, depths[len(depths) // 2])  # warm-up

    samples = {d: [] for d in depths}
    for round_no in range(args.rounds):
        for d in depths:
            t0 = perf_counter()
            build(cloud, dom, d)
            samples[d].append(perf_counter() - t0)
        print(f"\rround {round_no + 1}/{args.rounds}", end="",
              file=sys.stderr, flush=True)
    print(file=sys.stderr)

    print(f"{len(cloud)} points, median of {args.rounds} rounds:")
    for d in depths:
        print(f"  depth {d}: {statistics.median(samples[d]) * 1e3:8.2f} ms")

    double = scene_cloud(2 * args.points, seed=args.seed)
    dom2 = aabb_of(double)
    ref = depths[len(depths) // 2]
    ones, twos = [], []
    for _ in range(args.rounds):
        t0 = perf_counter()
        build(cloud, dom, ref)
        ones.append(perf_counter() - t0)
        t0 = perf_counter()
        build(double, dom2, ref)
        twos.append(perf_counter() - t0)
    ratio = statistics.median(twos) / statistics.median(ones)
    print(f"doubling points at depth {ref}: {statistics.median(ones) * 1e3:.2f} ms "
          f"-> {statistics.median(twos) * 1e3:.2f} ms (ratio {ratio:.2f})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
