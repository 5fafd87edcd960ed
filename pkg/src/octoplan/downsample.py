"""Hull-preserving point-cloud downsampling over a subdivision tree.

Each occupied leaf is reduced independently:

1. Collect the per-axis extreme points (2 * d of them) and build their
   convex polytope.
2. Drop every point strictly inside that polytope; boundary points stay.
3. Split the survivors into 2^d orthants around the leaf's assigned-box
   midpoint (upper side on ties, matching the tree's split rule) and hull
   each orthant.
4. Return the deduplicated union of all orthant hull vertices and the
   extreme points from step 1.

Leaves with at most 2 * d points, and any stage whose hull degenerates
(too few points, collinear or coplanar input), retain that stage's points
unchanged. The retained set therefore always contains every vertex of the
leaf's full convex hull: such a vertex is never strictly inside the seed
polytope, and a supporting hyperplane at it also supports its orthant's
hull, so it survives both cuts.

The voxel-grid filter baseline lives here too, with a calibration helper
that hunts for the voxel size hitting a requested output count.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from time import perf_counter

import numpy as np

from .errors import DegenerateInput, EmptyInput, InvalidSpec
from .geometry import (Aabb, ConvexHull, PointCloud, quickhull,
                       strictly_inside)
from .tree import OctoTree, occupied_leaf_nodes


@dataclass(frozen=True)
class DownsampleResult:
    retained: PointCloud
    retention_rate: float
    per_leaf_meshes: list
    elapsed_seconds: float
    eliminate_seconds: float
    mesh_seconds: float


def convexify_leaf(points, split_boundary: Aabb | None = None) -> np.ndarray:
    """Reduce one leaf's points to a hull-preserving subset.

    The orthant partition pivots on the split_boundary midpoint; without
    one, the tight bounds of the points stand in.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise EmptyInput("convexify_leaf needs a nonempty (n, d) array")
    d = pts.shape[1]
    if len(pts) <= 2 * d:
        return np.unique(pts, axis=0)

    seed_idx = np.unique(np.concatenate(
        [np.argmin(pts, axis=0), np.argmax(pts, axis=0)]))
    extremes = pts[seed_idx]
    try:
        seed_hull = quickhull(PointCloud(extremes))
        survivors = pts[~strictly_inside(seed_hull, pts)]
    except (EmptyInput, DegenerateInput):
        return np.unique(pts, axis=0)

    if split_boundary is not None:
        center = split_boundary.center()
    else:
        center = 0.5 * (pts.min(axis=0) + pts.max(axis=0))
    bits = survivors >= center
    codes = np.zeros(len(survivors), dtype=np.int64)
    for a in range(d):
        codes |= bits[:, a].astype(np.int64) << a

    kept = [extremes]
    for code in range(1 << d):
        sub = survivors[codes == code]
        if len(sub) == 0:
            continue
        # Hulling each orthant together with the extremal seed also sheds
        # points that sit on the seed polytope's boundary or between an
        # orthant's points and a seed vertex; any hull vertex of the full
        # set still survives, because a point inside the hull of other
        # input points was never a vertex to begin with.
        try:
            verts = quickhull(PointCloud(np.vstack([sub, extremes]))).vertices
        except (EmptyInput, DegenerateInput):
            kept.append(sub)
            continue
        kept.append(verts)
    return np.unique(np.vstack(kept), axis=0)


def _leaf_job(args):
    """Reduce and mesh one leaf; returns (retained, mesh, stage seconds)."""
    pts, boundary = args
    t0 = perf_counter()
    retained = convexify_leaf(pts, boundary)
    eliminate_seconds = perf_counter() - t0
    t1 = perf_counter()
    try:
        mesh = quickhull(PointCloud(retained))
    except (EmptyInput, DegenerateInput):
        mesh = None
    mesh_seconds = perf_counter() - t1
    return retained, mesh, eliminate_seconds, mesh_seconds


def downsample_tree(tree: OctoTree, workers: int = 1) -> DownsampleResult:
    """Run the per-leaf reduction over every occupied leaf and mesh each
    leaf's retained set where its hull is non-degenerate.

    Leaves are processed in the tree's Morton order and results assembled
    in that order, so the output does not depend on the worker count. An
    empty tree yields an empty retained cloud at retention 1.0.
    """
    t_start = perf_counter()
    leaves = occupied_leaf_nodes(tree)
    if not leaves:
        return DownsampleResult(PointCloud.empty(tree.dim), 1.0, [],
                                perf_counter() - t_start, 0.0, 0.0)
    payloads = [(tree.leaf_points(leaf), leaf.split_boundary)
                for leaf in leaves]
    total = sum(len(p) for p, _ in payloads)

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_leaf_job, payloads, chunksize=16))
    else:
        outcomes = [_leaf_job(p) for p in payloads]

    retained = np.vstack([o[0] for o in outcomes])
    meshes = [o[1] for o in outcomes if o[1] is not None]
    return DownsampleResult(
        retained=PointCloud(retained),
        retention_rate=len(retained) / total,
        per_leaf_meshes=meshes,
        elapsed_seconds=perf_counter() - t_start,
        eliminate_seconds=sum(o[2] for o in outcomes),
        mesh_seconds=sum(o[3] for o in outcomes),
    )


def voxel_filter(cloud: PointCloud, voxel_size: float,
                 domain=None) -> PointCloud:
    """Keep one representative per occupied voxel: the input point nearest
    the voxel's centroid of members, ties broken by lowest input index.
    Output is ordered by voxel grid index."""
    if len(cloud) == 0:
        raise EmptyInput("cannot voxel-filter an empty cloud")
    if not voxel_size > 0:
        raise InvalidSpec(f"voxel_size must be positive, got {voxel_size}")
    pts = cloud.points
    lo = pts.min(axis=0) if domain is None else np.asarray(domain.min, float)
    idx = np.floor((pts - lo) / voxel_size).astype(np.int64)
    idx = np.maximum(idx, 0)

    # Collapse the d-dimensional voxel index to one sortable key.
    spans = idx.max(axis=0) + 1
    key = np.zeros(len(pts), dtype=np.int64)
    for a in range(pts.shape[1]):
        key = key * spans[a] + idx[:, a]

    order = np.argsort(key, kind="stable")
    sorted_key = key[order]
    starts = np.flatnonzero(np.r_[True, sorted_key[1:] != sorted_key[:-1]])
    sums = np.add.reduceat(pts[order], starts, axis=0)
    counts = np.diff(np.r_[starts, len(pts)])
    centroids = sums / counts[:, None]

    group_of = np.cumsum(np.r_[0, sorted_key[1:] != sorted_key[:-1]])
    dist = np.linalg.norm(pts[order] - centroids[group_of], axis=1)
    # Sort each voxel group by distance then by original index; the first
    # row per group is the representative.
    pick = np.lexsort((order, dist, sorted_key))
    winners = pick[starts]
    return PointCloud(pts[order][winners])


def calibrate_voxel_size(cloud: PointCloud, target_count: int,
                         tolerance: int = 5,
                         max_iters: int = 64) -> tuple[float, int]:
    """Bisect for a voxel size whose filtered count lands within tolerance
    of target_count; returns (voxel_size, achieved_count), the closest pair
    found if the tolerance is unreachable."""
    n_unique = len(np.unique(cloud.points, axis=0))
    if not 1 <= target_count <= n_unique:
        raise InvalidSpec(
            f"target_count must be in [1, {n_unique}], got {target_count}")
    edges = cloud.points.max(axis=0) - cloud.points.min(axis=0)
    hi = float(edges.max()) * (1 + 1e-9) or 1.0
    lo = hi * 2.0 ** -40
    best = (hi, 1)
    for _ in range(max_iters):
        mid = 0.5 * (lo + hi)
        count = len(voxel_filter(cloud, mid))
        if abs(count - target_count) < abs(best[1] - target_count):
            best = (mid, count)
        if abs(count - target_count) <= tolerance:
            return mid, count
        if count > target_count:
            lo = mid
        else:
            hi = mid
    return best


def export_mesh(meshes: list, path) -> None:
    """Write hulls as one Wavefront OBJ, one group per leaf in list order.
    3-D hulls emit triangular f elements; 2-D hulls emit one closed l
    polyline around the ring."""
    with open(path, "w") as fh:
        base = 1
        for i, mesh in enumerate(meshes):
            fh.write(f"g leaf_{i}\n")
            verts = np.asarray(mesh.vertices, dtype=float)
            for row in verts.tolist():
                z = row[2] if verts.shape[1] == 3 else 0.0
                fh.write(f"v {row[0]!r} {row[1]!r} {z!r}\n")
            if verts.shape[1] == 3:
                for face in np.asarray(mesh.faces, dtype=np.int64):
                    fh.write(f"f {base + face[0]} {base + face[1]} "
                             f"{base + face[2]}\n")
            else:
                loop = " ".join(str(base + v) for v in range(len(verts)))
                fh.write(f"l {loop} {base}\n")
            base += len(verts)


def metrics_csv(result: DownsampleResult, input_size: int) -> str:
    """One-run metrics line matching the documented CSV columns."""
    header = "input_size,retained,retention_rate,elapsed_ms"
    row = (f"{input_size},{len(result.retained)},"
           f"{result.retention_rate!r},{result.elapsed_seconds * 1e3!r}")
    return header + "\n" + row + "\n"
