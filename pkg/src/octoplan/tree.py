"""Adaptive 2^d-ary spatial subdivision tree over a fixed domain box.

Every node owns an assigned orthant box (its split boundary) plus a tight
bounding box of the points that actually passed through it.  Points live only
in leaf nodes.  Subdivision always bisects every axis at the box midpoint;
membership is half-open (a point exactly on a midpoint goes to the upper
child), with the domain's maximal faces closed so the far corner stays
insertable.

The same midpoint arithmetic (mid = 0.5 * (lo + hi), upper iff p >= mid) is
used by the scalar insert path, the vectorized bulk build, and the one-level
re-partition, so all three agree bit-for-bit on which leaf a point lands in.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DepthCapExceeded, InvalidSpec, PointOutOfDomain
from .geometry import Aabb, PointCloud, as_point

DEFAULT_DEPTH_CAP = 16


@dataclass(frozen=True)
class McrSpec:
    """Smallest controllable region: an infinity-norm ball of radius
    epsilon_max, giving a box of edge 2 * epsilon_max, padded by a safety
    factor k > 1 when choosing tree depth."""

    epsilon_max: float
    k: float = 2.0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon_max) and self.epsilon_max > 0):
            raise InvalidSpec(f"epsilon_max must be positive, got {self.epsilon_max}")
        if not (math.isfinite(self.k) and self.k > 1.0):
            raise InvalidSpec(f"safety factor k must exceed 1, got {self.k}")

    @property
    def edge(self) -> float:
        return 2.0 * self.epsilon_max


def compute_depth(domain_edge_length: float, mcr: McrSpec,
                  cap: int = DEFAULT_DEPTH_CAP) -> int:
    """Smallest depth whose cells are no coarser than the safety-scaled
    controllable region: minimal D with 2^D >= L / (k * edge), clamped to
    [0, cap].  Non-cubic domains should pass their longest edge."""
    if not (math.isfinite(domain_edge_length) and domain_edge_length > 0):
        raise ValueError(f"domain edge must be positive, got {domain_edge_length}")
    ratio = domain_edge_length / (mcr.k * mcr.edge)
    if ratio <= 1.0:
        return 0
    depth = max(0, math.ceil(math.log2(ratio)))
    # Guard against log2 rounding near exact powers of two.
    while 2.0 ** depth < ratio:
        depth += 1
    while depth > 0 and 2.0 ** (depth - 1) >= ratio:
        depth -= 1
    return min(cap, depth)


class TreeNode:
    __slots__ = ("parent", "children", "level", "grid_index",
                 "split_min", "split_max", "bound_min", "bound_max",
                 "point_ids")

    def __init__(self, parent, level, grid_index, split_min, split_max):
        self.parent = parent
        self.children = None          # lazily a list of 2^d slots
        self.level = level
        self.grid_index = grid_index  # per-axis cell index at this level
        self.split_min = split_min
        self.split_max = split_max
        self.bound_min = None         # tight bounds of points seen, or None
        self.bound_max = None
        self.point_ids = ()           # indices into the tree's point store

    @property
    def split_boundary(self) -> Aabb:
        return Aabb(np.array(self.split_min, dtype=float),
                    np.array(self.split_max, dtype=float))

    @property
    def node_boundary(self) -> Aabb | None:
        if self.bound_min is None:
            return None
        return Aabb(np.array(self.bound_min, dtype=float),
                    np.array(self.bound_max, dtype=float))

    @property
    def point_count(self) -> int:
        return len(self.point_ids)

    def expand_bound(self, p: np.ndarray):
        if self.bound_min is None:
            self.bound_min = p.copy()
            self.bound_max = p.copy()
        else:
            np.minimum(self.bound_min, p, out=self.bound_min)
            np.maximum(self.bound_max, p, out=self.bound_max)


@dataclass(frozen=True)
class LeafRecord:
    """Read-out of one occupied leaf."""

    index: tuple[int, ...]
    split_boundary: Aabb
    node_boundary: Aabb
    point_count: int


class OctoTree:
    """2^d-ary tree of fixed scalar depth over a domain box."""

    def __init__(self, domain: Aabb, depth: int,
                 depth_cap: int = DEFAULT_DEPTH_CAP):
        if depth < 0:
            raise ValueError(f"depth must be >= 0, got {depth}")
        if depth_cap < 0:
            raise ValueError(f"depth cap must be >= 0, got {depth_cap}")
        if depth > depth_cap:
            raise DepthCapExceeded(f"depth {depth} exceeds cap {depth_cap}")
        if np.any(domain.edges <= 0):
            raise ValueError("domain must have positive extent on every axis")
        self.domain = domain
        self.depth = depth
        self.depth_cap = depth_cap
        self.dim = domain.dim
        self.root = TreeNode(None, 0, (0,) * self.dim,
                             domain.min.copy(), domain.max.copy())
        self.leaves: list[TreeNode] = []
        self._store = np.empty((0, self.dim), dtype=float)
        self._n = 0

    # ------------------------------------------------------------ points

    @property
    def point_count(self) -> int:
        return self._n

    def points_array(self) -> np.ndarray:
        """All inserted points, insertion order, as one (n, d) view."""
        return self._store[:self._n]

    def leaf_points(self, leaf: TreeNode) -> np.ndarray:
        ids = np.asarray(leaf.point_ids, dtype=np.int64)
        return self.points_array()[ids]

    def depth_remaining(self, node: TreeNode) -> int:
        return self.depth - node.level

    def _append_point(self, q: np.ndarray) -> int:
        if self._n == self._store.shape[0]:
            cap = max(16, 2 * self._store.shape[0])
            grown = np.empty((cap, self.dim), dtype=float)
            grown[: self._n] = self._store[: self._n]
            self._store = grown
        self._store[self._n] = q
        self._n += 1
        return self._n - 1

    # ------------------------------------------------------------ descent

    def _child(self, node: TreeNode, orthant: int) -> TreeNode:
        """Fetch or create the child in the given orthant (bit a = axis a)."""
        if node.children is None:
            node.children = [None] * (1 << self.dim)
        child = node.children[orthant]
        if child is None:
            mid = 0.5 * (node.split_min + node.split_max)
            lo = np.array(node.split_min, dtype=float)
            hi = np.array(node.split_max, dtype=float)
            gi = []
            for a in range(self.dim):
                bit = (orthant >> a) & 1
                if bit:
                    lo[a] = mid[a]
                else:
                    hi[a] = mid[a]
                gi.append(node.grid_index[a] * 2 + bit)
            child = TreeNode(node, node.level + 1, tuple(gi), lo, hi)
            self._register_child(node, orthant, child)
        return child

    def _register_child(self, node: TreeNode, orthant: int, child: TreeNode):
        if node.children is None:
            node.children = [None] * (1 << self.dim)
        node.children[orthant] = child


def _descend_indices(pts: np.ndarray, domain: Aabb, depth: int) -> np.ndarray:
    """Per-axis cell index of each point at the given depth, computed by the
    same successive-midpoint comparisons the scalar insert performs."""
    n, d = pts.shape
    lo = np.broadcast_to(domain.min, (n, d)).copy()
    hi = np.broadcast_to(domain.max, (n, d)).copy()
    idx = np.zeros((n, d), dtype=np.int64)
    for _ in range(depth):
        mid = 0.5 * (lo + hi)
        upper = pts >= mid
        idx = idx * 2 + upper
        lo = np.where(upper, mid, lo)
        hi = np.where(upper, hi, mid)
    return idx


def build(cloud: PointCloud, domain: Aabb, depth: int,
          depth_cap: int = DEFAULT_DEPTH_CAP) -> OctoTree:
    """Build a tree from a whole cloud at once (vectorized descent)."""
    tree = OctoTree(domain, depth, depth_cap)
    pts = np.ascontiguousarray(cloud.points, dtype=float)
    n = pts.shape[0]
    if n == 0:
        return tree
    d = pts.shape[1]
    if d != tree.dim:
        raise ValueError(f"cloud dim {d} != domain dim {tree.dim}")
    ok = (pts >= domain.min).all(axis=1) & (pts <= domain.max).all(axis=1)
    if not ok.all():
        bad = int(np.argmin(ok))
        raise PointOutOfDomain(pts[bad], domain.min, domain.max, index=bad)

    tree._store = pts.copy()
    tree._n = n

    axis_idx = _descend_indices(pts, domain, depth)
    codes = morton_encode(axis_idx, depth)
    order = np.argsort(codes, kind="stable")
    sorted_codes = codes[order]
    starts = np.flatnonzero(np.r_[True, sorted_codes[1:] != sorted_codes[:-1]])
    sorted_pts = pts[order]

    # Tight per-leaf bounds, grouped over the morton-sorted rows.
    leaf_min = np.minimum.reduceat(sorted_pts, starts, axis=0)
    leaf_max = np.maximum.reduceat(sorted_pts, starts, axis=0)
    leaf_codes = sorted_codes[starts]
    leaf_axis = axis_idx[order[starts]]

    if depth == 0:
        root = tree.root
        root.point_ids = order
        root.bound_min = leaf_min[0].copy()
        root.bound_max = leaf_max[0].copy()
        tree.leaves.append(root)
        return tree

    # Unique node codes per level, leaves upward, plus tight bounds pulled up.
    codes_at = [None] * (depth + 1)
    axis_at = [None] * (depth + 1)
    min_at = [None] * (depth + 1)
    max_at = [None] * (depth + 1)
    codes_at[depth] = leaf_codes
    axis_at[depth] = leaf_axis
    min_at[depth] = leaf_min
    max_at[depth] = leaf_max
    for lv in range(depth, 0, -1):
        parents = codes_at[lv] >> d
        keep = np.flatnonzero(np.r_[True, parents[1:] != parents[:-1]])
        codes_at[lv - 1] = parents[keep]
        axis_at[lv - 1] = axis_at[lv][keep] >> 1
        min_at[lv - 1] = np.minimum.reduceat(min_at[lv], keep, axis=0)
        max_at[lv - 1] = np.maximum.reduceat(max_at[lv], keep, axis=0)

    root = tree.root
    root.bound_min = min_at[0][0].copy()
    root.bound_max = max_at[0][0].copy()
    nodes_prev = [root]
    mask = (1 << d) - 1
    for lv in range(1, depth + 1):
        cs = codes_at[lv]
        parent_pos = np.searchsorted(codes_at[lv - 1], cs >> d)
        orthants = cs & mask
        bits = ((orthants[:, None] >> np.arange(d)[None, :]) & 1).astype(bool)
        plo = np.array([nodes_prev[i].split_min for i in parent_pos])
        phi = np.array([nodes_prev[i].split_max for i in parent_pos])
        pmid = 0.5 * (plo + phi)
        los = np.where(bits, pmid, plo)
        his = np.where(bits, phi, pmid)
        axes = axis_at[lv]
        mins = min_at[lv]
        maxs = max_at[lv]
        nodes_here = []
        for i in range(len(cs)):
            parent = nodes_prev[parent_pos[i]]
            node = TreeNode(parent, lv, tuple(int(v) for v in axes[i]),
                            los[i], his[i])
            node.bound_min = mins[i]
            node.bound_max = maxs[i]
            tree._register_child(parent, int(orthants[i]), node)
            nodes_here.append(node)
        nodes_prev = nodes_here

    ends = np.r_[starts[1:], n]
    for i, node in enumerate(nodes_prev):
        node.point_ids = order[starts[i]:ends[i]]
        tree.leaves.append(node)
    return tree


def push_point(tree: OctoTree, p) -> TreeNode:
    """Insert one point, creating nodes lazily; returns the leaf it entered."""
    q = as_point(p)
    if q.shape[0] != tree.dim:
        raise ValueError(f"point dim {q.shape[0]} != tree dim {tree.dim}")
    if not tree.domain.contains(q):
        raise PointOutOfDomain(q, tree.domain.min, tree.domain.max)
    node = tree.root
    node.expand_bound(q)
    for _ in range(tree.depth):
        mid = 0.5 * (node.split_min + node.split_max)
        orth = 0
        for a in range(tree.dim):
            if q[a] >= mid[a]:
                orth |= 1 << a
        node = tree._child(node, orth)
        node.expand_bound(q)
    pid = tree._append_point(q)
    if len(node.point_ids) == 0:
        tree.leaves.append(node)
        node.point_ids = [pid]
    else:
        if not isinstance(node.point_ids, list):
            node.point_ids = [int(i) for i in node.point_ids]
        node.point_ids.append(pid)
    return node


def dynamic_partition(tree: OctoTree) -> OctoTree:
    """Deepen the tree by one level, re-splitting every occupied leaf.

    Equivalent to rebuilding the same points at depth + 1: occupied-leaf set
    and per-leaf point multisets match a fresh build exactly.
    """
    new_depth = tree.depth + 1
    if new_depth > tree.depth_cap:
        raise DepthCapExceeded(
            f"partition to depth {new_depth} exceeds cap {tree.depth_cap}")
    old_leaves = [leaf for leaf in tree.leaves if len(leaf.point_ids)]
    tree.leaves = []
    tree.depth = new_depth
    if not old_leaves:
        return tree
    d = tree.dim

    counts = np.fromiter((len(leaf.point_ids) for leaf in old_leaves),
                         dtype=np.int64, count=len(old_leaves))
    ids = np.concatenate(
        [np.asarray(leaf.point_ids, dtype=np.int64) for leaf in old_leaves])
    owner = np.repeat(np.arange(len(old_leaves)), counts)
    pts = tree.points_array()[ids]

    plo = np.array([leaf.split_min for leaf in old_leaves], dtype=float)
    phi = np.array([leaf.split_max for leaf in old_leaves], dtype=float)
    pgi = np.array([leaf.grid_index for leaf in old_leaves], dtype=np.int64)
    pmid = 0.5 * (plo + phi)

    upper = pts >= pmid[owner]
    orth = np.zeros(len(ids), dtype=np.int64)
    for a in range(d):
        orth |= upper[:, a].astype(np.int64) << a

    key = (owner << d) | orth
    order = np.argsort(key, kind="stable")
    skey = key[order]
    sids = ids[order]
    spts = pts[order]
    starts = np.flatnonzero(np.r_[True, skey[1:] != skey[:-1]])
    ends = np.r_[starts[1:], len(skey)]
    gkey = skey[starts]
    gowner = (gkey >> d).tolist()
    gorth = (gkey & ((1 << d) - 1))
    gmin = np.minimum.reduceat(spts, starts, axis=0)
    gmax = np.maximum.reduceat(spts, starts, axis=0)

    bits = ((gorth[:, None] >> np.arange(d)[None, :]) & 1).astype(bool)
    parent_rows = np.asarray(gowner, dtype=np.int64)
    clo = np.where(bits, pmid[parent_rows], plo[parent_rows])
    chi = np.where(bits, phi[parent_rows], pmid[parent_rows])
    cgi = (pgi[parent_rows] * 2 + bits).tolist()
    gorth = gorth.tolist()
    starts = starts.tolist()
    ends = ends.tolist()

    for i in range(len(gkey)):
        parent = old_leaves[gowner[i]]
        node = TreeNode(parent, new_depth, tuple(cgi[i]), clo[i], chi[i])
        node.bound_min = gmin[i]
        node.bound_max = gmax[i]
        node.point_ids = sids[starts[i]:ends[i]]
        tree._register_child(parent, gorth[i], node)
        tree.leaves.append(node)
    for leaf in old_leaves:
        leaf.point_ids = ()
    return tree


def occupied_leaves(tree: OctoTree) -> list[LeafRecord]:
    """Records for every occupied leaf, ordered by Morton code of the leaf's
    grid index (axis 0 in the least significant interleave slot)."""
    keyed = []
    for leaf in tree.leaves:
        if not len(leaf.point_ids):
            continue
        keyed.append((morton_key(leaf.grid_index, tree.depth), leaf))
    keyed.sort(key=lambda t: t[0])
    return [
        LeafRecord(
            index=leaf.grid_index,
            split_boundary=leaf.split_boundary,
            node_boundary=leaf.node_boundary,
            point_count=leaf.point_count,
        )
        for _, leaf in keyed
    ]


def occupied_leaf_nodes(tree: OctoTree) -> list[TreeNode]:
    """Occupied leaves themselves, in the same Morton order as the records."""
    keyed = [(morton_key(leaf.grid_index, tree.depth), leaf)
             for leaf in tree.leaves if len(leaf.point_ids)]
    keyed.sort(key=lambda t: t[0])
    return [leaf for _, leaf in keyed]


def morton_key(index: tuple[int, ...], depth: int) -> int:
    """Interleave per-axis index bits: bit b of axis a lands at b*d + a."""
    d = len(index)
    code = 0
    for b in range(depth):
        for a in range(d):
            code |= ((index[a] >> b) & 1) << (b * d + a)
    return code


def morton_encode(idx: np.ndarray, depth: int) -> np.ndarray:
    """Vectorized morton_key over an (n, d) index array."""
    n, d = idx.shape
    code = np.zeros(n, dtype=np.int64)
    for b in range(depth):
        for a in range(d):
            code |= ((idx[:, a] >> b) & 1) << (b * d + a)
    return code
