#!/usr/bin/env python3
"""Measure hull-downsampling retention as point density rises.

Samples jittered solids at increasing target counts, builds a fixed-depth
tree over the same domain each time, runs the per-leaf hull reduction, and
prints the retention rate ladder. Denser sampling of the same solids packs
more interior points into each leaf, so retention should fall as the
target count grows.
"""
import argparse
import sys
from time import perf_counter

from octoplan.downsample import downsample_tree
from octoplan.mapgen import solid_cloud_near, solid_domain
from octoplan.tree import build


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--targets", default="100000,300000,500000,900000",
                        help="comma-separated point-count targets")
    parser.add_argument("--depth", type=int, default=7,
                        help="tree depth (default 7)")
    parser.add_argument("--workers", type=int, default=1,
                        help="parallel leaf workers (default 1)")
    args = parser.parse_args(argv)

    print(f"{'target':>8} {'points':>8} {'kept':>8} {'retention':>9} "
          f"{'seconds':>8}")
    for target in (int(v) for v in args.targets.split(",")):
        t0 = perf_counter()
        cloud = solid_cloud_near(target)
        tree = build(cloud, solid_domain(), depth=args.depth)
        result = downsample_tree(tree, workers=args.workers)
        kept = len(result.retained)
        print(f"{target:>8d} {len(cloud):>8d} {kept:>8d} "
              f"{result.retention_rate:>9.4f} {perf_counter() - t0:>8.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
