"""Uniform occupancy grids rasterized from clouds or subdivision trees.

Cells are half-open boxes [origin + i*cell, origin + (i+1)*cell) per axis,
with the map's far faces closed so sources that touch the domain's maximal
corner stay representable.  A cell is occupied exactly when at least one
point falls inside it; the adaptive path inherits this from the tree (a cell
is occupied iff the matching leaf holds a point) and additionally carries
each occupied cell's tight point bounds as per-cell metadata.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import PointOutOfDomain
from .geometry import Aabb, PointCloud
from .tree import OctoTree


@dataclass
class UniformGridMap:
    dims: tuple[int, ...]
    cell_size: np.ndarray
    origin: np.ndarray
    occupancy: np.ndarray
    leaf_bounds: dict[tuple[int, ...], Aabb] | None = None

    def __post_init__(self):
        self.cell_size = np.asarray(self.cell_size, dtype=float)
        self.origin = np.asarray(self.origin, dtype=float)
        self.occupancy = np.asarray(self.occupancy, dtype=bool)
        if self.occupancy.shape != tuple(self.dims):
            raise ValueError(
                f"occupancy shape {self.occupancy.shape} != dims {self.dims}")

    @property
    def dim(self) -> int:
        return len(self.dims)

    @property
    def extent_max(self) -> np.ndarray:
        return self.origin + np.asarray(self.dims) * self.cell_size

    def index_of(self, p) -> tuple[int, ...]:
        """Cell containing a metric point (far faces closed).

        A hair of slack absorbs the rounding of extent_max = dims * cell when
        the per-axis cell size is not exactly representable.
        """
        q = np.asarray(p, dtype=float)
        tol = 1e-9 * np.maximum(1.0, np.abs(self.extent_max - self.origin))
        if np.any(q < self.origin - tol) or np.any(q > self.extent_max + tol):
            raise PointOutOfDomain(q, self.origin, self.extent_max)
        idx = np.floor((q - self.origin) / self.cell_size).astype(np.int64)
        idx = np.clip(idx, 0, np.asarray(self.dims) - 1)
        return tuple(int(i) for i in idx)

    def cell_center(self, idx) -> np.ndarray:
        return self.origin + (np.asarray(idx, dtype=float) + 0.5) * self.cell_size

    def in_bounds(self, idx) -> bool:
        return all(0 <= i < n for i, n in zip(idx, self.dims))

    def is_occupied(self, idx) -> bool:
        return bool(self.occupancy[tuple(idx)])

    @property
    def occupied_count(self) -> int:
        return int(self.occupancy.sum())


def _per_axis_cells(cell_size, dim: int) -> np.ndarray:
    c = np.asarray(cell_size, dtype=float)
    if c.ndim == 0:
        c = np.full(dim, float(c))
    if c.shape != (dim,) or np.any(c <= 0) or not np.all(np.isfinite(c)):
        raise ValueError(f"cell size must be positive per axis, got {cell_size}")
    return c


def rasterize_fixed(cloud: PointCloud, domain: Aabb, cell_size) -> UniformGridMap:
    """Independent uniform rasterization of a cloud.

    cell_size may be a scalar or one value per axis; dims are the ceiling of
    domain edge / cell, so the grid covers the whole domain.
    """
    cell = _per_axis_cells(cell_size, domain.dim)
    dims = tuple(int(np.ceil(e / c)) for e, c in zip(domain.edges, cell))
    dims = tuple(max(1, n) for n in dims)
    occ = np.zeros(dims, dtype=bool)
    pts = cloud.points
    if pts.shape[0]:
        if pts.shape[1] != domain.dim:
            raise ValueError(f"cloud dim {pts.shape[1]} != domain dim {domain.dim}")
        ok = (pts >= domain.min).all(axis=1) & (pts <= domain.max).all(axis=1)
        if not ok.all():
            bad = int(np.argmin(ok))
            raise PointOutOfDomain(pts[bad], domain.min, domain.max, index=bad)
        idx = np.floor((pts - domain.min) / cell).astype(np.int64)
        np.minimum(idx, np.asarray(dims) - 1, out=idx)
        occ[tuple(idx.T)] = True
    return UniformGridMap(dims, cell, domain.min.copy(), occ)


def rasterize_adaptive(tree: OctoTree) -> UniformGridMap:
    """Depth-level occupancy of the tree: one cell per leaf slot, occupied
    iff that leaf holds at least one point.  Occupied cells carry the leaf's
    tight point box so downstream users can see sub-cell extent."""
    dims = (1 << tree.depth,) * tree.dim
    cell = tree.domain.edges / float(1 << tree.depth)
    occ = np.zeros(dims, dtype=bool)
    bounds: dict[tuple[int, ...], Aabb] = {}
    occupied = [leaf for leaf in tree.leaves if len(leaf.point_ids)]
    if occupied:
        idx = np.array([leaf.grid_index for leaf in occupied], dtype=np.int64)
        occ[tuple(idx.T)] = True
        # Bulk-copy the tight boxes so later insertions into the tree
        # cannot mutate boxes already exported with this grid.
        bmin = np.array([leaf.bound_min for leaf in occupied], dtype=float)
        bmax = np.array([leaf.bound_max for leaf in occupied], dtype=float)
        for i, leaf in enumerate(occupied):
            bounds[leaf.grid_index] = Aabb._trusted(bmin[i], bmax[i])
    return UniformGridMap(dims, cell, tree.domain.min.copy(), occ,
                          leaf_bounds=bounds)


def gap_preserved(grid: UniformGridMap, corridor: Aabb) -> bool:
    """True when a connected run of free cells crosses the corridor from its
    low end to its high end along the corridor's longest axis.

    Only cells whose interior overlaps the corridor participate, so the run
    really passes through the gap rather than around it.
    """
    lo = np.maximum(corridor.min, grid.origin)
    hi = np.minimum(corridor.max, grid.extent_max)
    if np.any(hi - lo <= 0):
        return False
    long_axis = int(np.argmax(hi - lo))

    dims = np.asarray(grid.dims)
    first = np.floor((lo - grid.origin) / grid.cell_size).astype(np.int64)
    last = np.ceil((hi - grid.origin) / grid.cell_size).astype(np.int64) - 1
    first = np.clip(first, 0, dims - 1)
    last = np.clip(last, 0, dims - 1)

    def overlaps(idx) -> bool:
        cs = grid.origin + np.asarray(idx) * grid.cell_size
        ce = cs + grid.cell_size
        return bool(np.all(np.minimum(ce, hi) - np.maximum(cs, lo) > 0))

    def axis_span(idx, axis):
        start = grid.origin[axis] + idx[axis] * grid.cell_size[axis]
        return start, start + grid.cell_size[axis]

    ranges = [range(a, b + 1) for a, b in zip(first, last)]
    seeds = []
    for idx in np.ndindex(*[len(r) for r in ranges]):
        cell = tuple(r[i] for r, i in zip(ranges, idx))
        if grid.is_occupied(cell) or not overlaps(cell):
            continue
        s, e = axis_span(cell, long_axis)
        if s <= lo[long_axis] < e:
            seeds.append(cell)

    if not seeds:
        return False

    def is_target(cell) -> bool:
        s, e = axis_span(cell, long_axis)
        return s < hi[long_axis] <= e

    seen = set(seeds)
    work = deque(seeds)
    d = grid.dim
    while work:
        cell = work.popleft()
        if is_target(cell):
            return True
        for axis in range(d):
            for step in (-1, 1):
                nxt = list(cell)
                nxt[axis] += step
                nxt = tuple(nxt)
                if nxt in seen or not grid.in_bounds(nxt):
                    continue
                if grid.is_occupied(nxt) or not overlaps(nxt):
                    continue
                seen.add(nxt)
                work.append(nxt)
    return False


# ---------------------------------------------------------------- export


def rle_encode(occupancy: np.ndarray) -> list[int]:
    """Run lengths over the axis-0-fastest flattening, free run first (a
    leading 0 is emitted when the first cell is occupied)."""
    flat = occupancy.flatten(order="F")
    if flat.size == 0:
        return []
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.r_[0, changes, flat.size]
    runs = [int(v) for v in np.diff(bounds)]
    if bool(flat[0]):
        runs.insert(0, 0)
    return runs


def rle_decode(runs: list[int], dims: tuple[int, ...]) -> np.ndarray:
    total = int(np.prod(dims))
    flat = np.zeros(total, dtype=bool)
    pos = 0
    value = False
    for run in runs:
        if value:
            flat[pos:pos + run] = True
        pos += run
        value = not value
    if pos != total:
        raise ValueError(f"run lengths sum to {pos}, expected {total}")
    return flat.reshape(dims, order="F")


def grid_to_json(grid: UniformGridMap) -> str:
    doc = {
        "dims": [int(v) for v in grid.dims],
        "cell_size_m": [float(v) for v in grid.cell_size],
        "origin_m": [float(v) for v in grid.origin],
        "order": "axis0-fastest",
        "rle_free_first": rle_encode(grid.occupancy),
    }
    return json.dumps(doc, sort_keys=True)


def grid_from_json(text: str) -> UniformGridMap:
    doc = json.loads(text)
    dims = tuple(int(v) for v in doc["dims"])
    occ = rle_decode(doc["rle_free_first"], dims)
    return UniformGridMap(dims, np.asarray(doc["cell_size_m"], dtype=float),
                          np.asarray(doc["origin_m"], dtype=float), occ)


def grid_to_pgm(grid: UniformGridMap, path_cells=None) -> str:
    """P2 raster for 2-D grids: 0 = free, 255 = occupied, 128 = path cell.
    Text row k is the j = dims[1]-1-k row of the map, so +y points up."""
    if grid.dim != 2:
        raise ValueError("PGM export is only defined for 2-D grids")
    w, h = grid.dims
    shade = np.where(grid.occupancy, 255, 0).astype(np.int64)
    if path_cells is not None:
        for idx in path_cells:
            shade[tuple(idx)] = 128
    lines = ["P2", f"{w} {h}", "255"]
    for j in range(h - 1, -1, -1):
        lines.append(" ".join(str(int(v)) for v in shade[:, j]))
    return "\n".join(lines) + "\n"


def pgm_from_text(text: str) -> np.ndarray:
    """Parse a P2 raster back into the integer shade array (w, h)."""
    tokens = []
    for line in text.splitlines():
        body = line.split("#", 1)[0].strip()
        if body:
            tokens.extend(body.split())
    if not tokens or tokens[0] != "P2":
        raise ValueError("not a P2 raster")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    vals = np.asarray([int(t) for t in tokens[4:]], dtype=np.int64)
    if vals.size != w * h or maxval != 255:
        raise ValueError("raster payload does not match its header")
    shade = np.empty((w, h), dtype=np.int64)
    for k in range(h):
        shade[:, h - 1 - k] = vals[k * w:(k + 1) * w]
    return shade
