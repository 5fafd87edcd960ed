"""Geometric primitives: points, boxes, convex hulls.

Hulls are built with a quickhull that works in 2-D (divide and conquer on
edges) and 3-D (conflict lists over triangular faces).  All tolerance checks
use a single absolute epsilon in coordinate units, so callers at metric scale
get nanometre-level slack.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, EmptyInput

# Absolute tolerance (coordinate units) for every hull-side predicate.
HULL_EPS = 1e-9


def as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float)
    if a.ndim != 1 or a.shape[0] not in (2, 3):
        raise ValueError(f"point must be a flat 2-D or 3-D coordinate, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"point has non-finite coordinates: {a}")
    return a


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned box with inclusive corners min <= max."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        lo = as_point(self.min)
        hi = as_point(self.max)
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)
        if lo.shape != hi.shape:
            raise ValueError("Aabb corners disagree on dimension")
        if np.any(lo > hi):
            raise ValueError(f"Aabb has min > max: {lo} vs {hi}")

    @classmethod
    def _trusted(cls, lo: np.ndarray, hi: np.ndarray) -> "Aabb":
        """Skip validation for hot paths holding rows of an already
        bulk-checked float matrix."""
        box = object.__new__(cls)
        object.__setattr__(box, "min", lo)
        object.__setattr__(box, "max", hi)
        return box

    @property
    def dim(self) -> int:
        return self.min.shape[0]

    @property
    def edges(self) -> np.ndarray:
        return self.max - self.min

    def center(self) -> np.ndarray:
        return 0.5 * (self.min + self.max)

    def contains(self, p) -> bool:
        """Closed-box membership on every axis."""
        q = np.asarray(p, dtype=float)
        return bool(np.all(q >= self.min) and np.all(q <= self.max))

    def expanded_to(self, p) -> "Aabb":
        q = np.asarray(p, dtype=float)
        return Aabb(np.minimum(self.min, q), np.maximum(self.max, q))

    def overlaps_open(self, other: "Aabb") -> bool:
        """True when the open interiors intersect with positive measure."""
        lo = np.maximum(self.min, other.min)
        hi = np.minimum(self.max, other.max)
        return bool(np.all(hi - lo > 0.0))


@dataclass(frozen=True)
class PointCloud:
    """An ordered set of points stored as an (n, d) float64 array."""

    points: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.points, dtype=float)
        if a.ndim != 2 or a.shape[1] not in (2, 3):
            raise ValueError(f"cloud must have shape (n, 2) or (n, 3), got {a.shape}")
        if a.size and not np.all(np.isfinite(a)):
            bad = int(np.argwhere(~np.isfinite(a).all(axis=1))[0][0])
            raise ValueError(f"cloud row {bad} has non-finite coordinates")
        object.__setattr__(self, "points", a)

    @classmethod
    def empty(cls, dim: int) -> "PointCloud":
        return cls(np.empty((0, dim), dtype=float))

    @classmethod
    def from_list(cls, rows) -> "PointCloud":
        return cls(np.asarray(rows, dtype=float).reshape(len(rows), -1))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def __iter__(self):
        return iter(self.points)


def aabb_of(cloud: PointCloud) -> Aabb:
    """Tight bounding box of a cloud; EmptyInput on an empty cloud."""
    if len(cloud) == 0:
        raise EmptyInput("cannot bound an empty cloud")
    return Aabb(cloud.points.min(axis=0), cloud.points.max(axis=0))


@dataclass(frozen=True)
class ConvexHull:
    """Hull output.

    vertices: (m, d) array; in 2-D the rows are already in counter-clockwise
    ring order.  faces: in 2-D the ring as an index array [0..m); in 3-D an
    (k, 3) int array of outward-oriented triangles indexing `vertices`.
    """

    vertices: np.ndarray
    faces: np.ndarray

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]


def _dedupe_rows(pts: np.ndarray) -> np.ndarray:
    """Unique rows in lexicographic order (exact coordinate equality)."""
    return np.unique(pts, axis=0)


def quickhull(cloud: PointCloud) -> ConvexHull:
    """Convex hull of a 2-D or 3-D cloud.

    Raises EmptyInput when the cloud has fewer than d+1 points and
    DegenerateInput when the deduplicated points are affinely dependent
    (within HULL_EPS).  Output vertices are a subset of the input points.
    """
    d = cloud.dim
    if len(cloud) < d + 1:
        raise EmptyInput(f"need at least {d + 1} points for a {d}-D hull, got {len(cloud)}")
    pts = _dedupe_rows(cloud.points)
    if pts.shape[0] < d + 1:
        raise DegenerateInput(
            f"only {pts.shape[0]} distinct points after deduplication; need {d + 1}"
        )
    if d == 2:
        ring = _hull_2d(pts)
        verts = pts[ring]
        return ConvexHull(verts, np.arange(len(ring), dtype=np.int64))
    return _hull_3d(pts)


# ---------------------------------------------------------------- 2-D hull


def _side(a, b, pts):
    """Perpendicular signed distance of pts from line a->b (positive = left)."""
    ab = b - a
    norm = float(np.hypot(ab[0], ab[1]))
    return ((pts[:, 0] - a[0]) * ab[1] - (pts[:, 1] - a[1]) * ab[0]) / -norm


def _hull_2d(pts: np.ndarray) -> list[int]:
    """Indices of hull vertices in counter-clockwise ring order.

    pts must be deduplicated; raises DegenerateInput when collinear.
    """
    n = pts.shape[0]
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    lo, hi = order[0], order[-1]
    a, b = pts[lo], pts[hi]
    if float(np.hypot(*(b - a))) <= HULL_EPS:
        raise DegenerateInput("all points coincide within tolerance")

    side = _side(a, b, pts)
    below = np.nonzero(side < -HULL_EPS)[0]
    above = np.nonzero(side > HULL_EPS)[0]
    if below.size == 0 and above.size == 0:
        raise DegenerateInput("points are collinear within tolerance")

    ring: list[int] = [int(lo)]
    _expand_2d(pts, lo, hi, below, ring)
    ring.append(int(hi))
    _expand_2d(pts, hi, lo, above, ring)
    return ring


def _expand_2d(pts, iu, iv, cand, ring):
    """Append hull vertices strictly between iu and iv (CCW walk).

    cand holds indices of points strictly on the outer side of edge iu->iv.
    Iterative in-order expansion so pathological inputs cannot blow the
    recursion limit.
    """
    work: list[tuple] = [("seg", iu, iv, cand)]
    while work:
        item = work.pop()
        if item[0] == "emit":
            ring.append(item[1])
            continue
        _, u, v, idxs = item
        if idxs.size == 0:
            continue
        dist = -_side(pts[u], pts[v], pts[idxs])
        far = int(idxs[int(np.argmax(dist))])
        outer_uf = idxs[_side(pts[u], pts[far], pts[idxs]) < -HULL_EPS]
        outer_fv = idxs[_side(pts[far], pts[v], pts[idxs]) < -HULL_EPS]
        work.append(("seg", far, v, outer_fv))
        work.append(("emit", far))
        work.append(("seg", u, far, outer_uf))


# ---------------------------------------------------------------- 3-D hull


class _Face:
    __slots__ = ("verts", "normal", "offset", "conflicts", "alive")

    def __init__(self, verts, normal, offset):
        self.verts = verts          # (i, j, k) indices, outward orientation
        self.normal = normal        # unit normal as a float triple
        self.offset = offset        # plane offset: normal . x = offset
        self.conflicts = None       # indices of points strictly outside
        self.alive = True


def _plane_rows(pa, pb, pc):
    """Unit normal and offset of the plane through three point rows.

    Scalar arithmetic on purpose: hulls over many small leaves would spend
    most of their time in numpy call overhead otherwise.
    """
    ux, uy, uz = pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]
    vx, vy, vz = pc[0] - pa[0], pc[1] - pa[1], pc[2] - pa[2]
    nx = uy * vz - uz * vy
    ny = uz * vx - ux * vz
    nz = ux * vy - uy * vx
    norm = math.sqrt(nx * nx + ny * ny + nz * nz)
    if norm == 0.0:
        return None, 0.0
    nx, ny, nz = nx / norm, ny / norm, nz / norm
    return (nx, ny, nz), nx * pa[0] + ny * pa[1] + nz * pa[2]


_SMALL_N = 48


def _initial_simplex_small(rows) -> tuple[int, int, int, int]:
    """Loop-based twin of _initial_simplex for few points."""
    n = len(rows)
    i0 = min(range(n), key=lambda i: rows[i])
    x0, y0, z0 = rows[i0]
    best = -1.0
    i1 = i0
    for i in range(n):
        dx, dy, dz = rows[i][0] - x0, rows[i][1] - y0, rows[i][2] - z0
        d = dx * dx + dy * dy + dz * dz
        if d > best:
            best, i1 = d, i
    if math.sqrt(best) <= HULL_EPS:
        raise DegenerateInput("all points coincide within tolerance")
    sx, sy, sz = rows[i1][0] - x0, rows[i1][1] - y0, rows[i1][2] - z0
    seg = math.sqrt(sx * sx + sy * sy + sz * sz)
    sx, sy, sz = sx / seg, sy / seg, sz / seg
    best = -1.0
    i2 = i0
    for i in range(n):
        dx, dy, dz = rows[i][0] - x0, rows[i][1] - y0, rows[i][2] - z0
        proj = dx * sx + dy * sy + dz * sz
        perp = dx * dx + dy * dy + dz * dz - proj * proj
        if perp > best:
            best, i2 = perp, i
    if math.sqrt(max(best, 0.0)) <= HULL_EPS:
        raise DegenerateInput("points are collinear within tolerance")
    normal, offset = _plane_rows(rows[i0], rows[i1], rows[i2])
    nx, ny, nz = normal
    best = -1.0
    i3 = i0
    for i in range(n):
        h = abs(nx * rows[i][0] + ny * rows[i][1] + nz * rows[i][2] - offset)
        if h > best:
            best, i3 = h, i
    if best <= HULL_EPS:
        raise DegenerateInput("points are coplanar within tolerance")
    return i0, i1, i2, i3


def _initial_simplex(pts: np.ndarray) -> tuple[int, int, int, int]:
    order = np.lexsort((pts[:, 2], pts[:, 1], pts[:, 0]))
    i0 = int(order[0])
    d = np.linalg.norm(pts - pts[i0], axis=1)
    i1 = int(np.argmax(d))
    if d[i1] <= HULL_EPS:
        raise DegenerateInput("all points coincide within tolerance")
    seg = pts[i1] - pts[i0]
    seg /= np.linalg.norm(seg)
    off = pts - pts[i0]
    perp = off - np.outer(off @ seg, seg)
    pd = np.linalg.norm(perp, axis=1)
    i2 = int(np.argmax(pd))
    if pd[i2] <= HULL_EPS:
        raise DegenerateInput("points are collinear within tolerance")
    n, c = _plane_rows(pts[i0], pts[i1], pts[i2])
    h = np.abs(pts @ np.asarray(n) - c)
    i3 = int(np.argmax(h))
    if h[i3] <= HULL_EPS:
        raise DegenerateInput("points are coplanar within tolerance")
    return i0, i1, i2, i3


def _hull_3d(pts: np.ndarray) -> ConvexHull:
    n_pts = pts.shape[0]
    rows = pts.tolist()
    if n_pts <= _SMALL_N:
        i0, i1, i2, i3 = _initial_simplex_small(rows)
    else:
        i0, i1, i2, i3 = _initial_simplex(pts)
    interior = (
        (rows[i0][0] + rows[i1][0] + rows[i2][0] + rows[i3][0]) / 4.0,
        (rows[i0][1] + rows[i1][1] + rows[i2][1] + rows[i3][1]) / 4.0,
        (rows[i0][2] + rows[i1][2] + rows[i2][2] + rows[i3][2]) / 4.0,
    )

    faces: list[_Face] = []
    edge_owner: dict[tuple[int, int], _Face] = {}

    def add_face(a, b, c):
        normal, offset = _plane_rows(rows[a], rows[b], rows[c])
        if normal is None:
            # Sliver triangle; keep it with a null plane.
            normal = (0.0, 0.0, 0.0)
            offset = 0.0
        elif (normal[0] * interior[0] + normal[1] * interior[1]
              + normal[2] * interior[2]) > offset:
            # Same plane, opposite winding: negation is exact.
            b, c = c, b
            normal = (-normal[0], -normal[1], -normal[2])
            offset = -offset
        f = _Face((a, b, c), normal, offset)
        faces.append(f)
        for u, v in ((a, b), (b, c), (c, a)):
            edge_owner[(u, v)] = f
        return f

    def drop_face(f):
        f.alive = False
        a, b, c = f.verts
        for u, v in ((a, b), (b, c), (c, a)):
            if edge_owner.get((u, v)) is f:
                del edge_owner[(u, v)]

    first = [add_face(i0, i1, i2), add_face(i0, i1, i3),
             add_face(i0, i2, i3), add_face(i1, i2, i3)]

    seed = {i0, i1, i2, i3}
    cand = [i for i in range(n_pts) if i not in seed]
    _assign_conflicts(pts, rows, first, cand)

    queue = [f for f in first if f.conflicts]
    while queue:
        face = queue.pop()
        if not face.alive or not face.conflicts:
            continue
        nx, ny, nz = face.normal
        best = -math.inf
        p = -1
        for i in face.conflicts:
            r = rows[i]
            rel = nx * r[0] + ny * r[1] + nz * r[2]
            if rel > best:
                best, p = rel, i
        px, py, pz = rows[p]

        # Flood out from `face` to every face visible from p.
        visible = [face]
        seen = {id(face)}
        stack = [face]
        while stack:
            f = stack.pop()
            a, b, c = f.verts
            for u, v in ((a, b), (b, c), (c, a)):
                g = edge_owner.get((v, u))
                if g is None or id(g) in seen or not g.alive:
                    continue
                gn = g.normal
                if (gn[0] * px + gn[1] * py + gn[2] * pz
                        - g.offset > HULL_EPS):
                    seen.add(id(g))
                    visible.append(g)
                    stack.append(g)

        horizon: list[tuple[int, int]] = []
        for f in visible:
            a, b, c = f.verts
            for u, v in ((a, b), (b, c), (c, a)):
                g = edge_owner.get((v, u))
                if g is None or not g.alive or id(g) not in seen:
                    horizon.append((u, v))

        orphan = set()
        for f in visible:
            if f.conflicts:
                orphan.update(f.conflicts)
        orphan.discard(p)
        for f in visible:
            drop_face(f)

        fresh = [add_face(u, v, p) for u, v in horizon]
        _assign_conflicts(pts, rows, fresh, sorted(orphan))
        queue.extend(f for f in fresh if f.conflicts)

    live = [f for f in faces if f.alive]
    used = sorted({i for f in live for i in f.verts})
    remap = {old: new for new, old in enumerate(used)}
    verts = pts[used]
    tri = np.array([[remap[i] for i in f.verts] for f in live], dtype=np.int64)
    tri = np.array(sorted(_canon_tri(t) for t in tri), dtype=np.int64)
    return ConvexHull(verts, tri)


def _canon_tri(t):
    """Rotate a triangle so its smallest index comes first (orientation kept)."""
    i = int(np.argmin(t))
    return (int(t[i]), int(t[(i + 1) % 3]), int(t[(i + 2) % 3]))


def _assign_conflicts(pts, rows, faces, cand):
    """Attach each candidate point to the face it lies furthest outside of
    (ties to the earliest face)."""
    if not len(cand) or not faces:
        for f in faces:
            f.conflicts = None
        return
    if len(cand) * len(faces) >= 4096:
        normals = np.array([f.normal for f in faces])
        offsets = np.array([f.offset for f in faces])
        cand_arr = np.asarray(cand, dtype=np.int64)
        rel = pts[cand_arr] @ normals.T - offsets
        best = np.argmax(rel, axis=1)
        outside = rel[np.arange(len(cand_arr)), best] > HULL_EPS
        for fi, f in enumerate(faces):
            mine = cand_arr[(best == fi) & outside]
            f.conflicts = mine.tolist() if mine.size else None
        return
    buckets = [None] * len(faces)
    for i in cand:
        x, y, z = rows[i]
        best = HULL_EPS
        at = -1
        for fi, f in enumerate(faces):
            n = f.normal
            rel = n[0] * x + n[1] * y + n[2] * z - f.offset
            if rel > best:
                best, at = rel, fi
        if at >= 0:
            if buckets[at] is None:
                buckets[at] = [i]
            else:
                buckets[at].append(i)
    for fi, f in enumerate(faces):
        f.conflicts = buckets[fi]


# ---------------------------------------------------------------- queries


def contains(hull: ConvexHull, p) -> bool:
    """Inside-or-on test with absolute tolerance HULL_EPS."""
    q = as_point(p)
    if hull.dim == 2:
        v = hull.vertices
        nxt = np.roll(v, -1, axis=0)
        edge = nxt - v
        norm = np.hypot(edge[:, 0], edge[:, 1])
        cross = (q[0] - v[:, 0]) * edge[:, 1] - (q[1] - v[:, 1]) * edge[:, 0]
        return bool(np.all(cross / -norm >= -HULL_EPS))
    v = hull.vertices
    tri = hull.faces
    n = np.cross(v[tri[:, 1]] - v[tri[:, 0]], v[tri[:, 2]] - v[tri[:, 0]])
    norm = np.linalg.norm(n, axis=1)
    keep = norm > 0
    n = n[keep] / norm[keep, None]
    c = np.einsum("ij,ij->i", n, v[tri[keep, 0]])
    return bool(np.all(n @ q - c <= HULL_EPS))


def strictly_inside(hull: ConvexHull, pts: np.ndarray) -> np.ndarray:
    """Vectorized strict-interior test: True where a point clears every
    face by more than HULL_EPS."""
    if pts.size == 0:
        return np.zeros(0, dtype=bool)
    if hull.dim == 2:
        v = hull.vertices
        nxt = np.roll(v, -1, axis=0)
        edge = nxt - v
        norm = np.hypot(edge[:, 0], edge[:, 1])
        dx = pts[:, 0][:, None] - v[:, 0][None, :]
        dy = pts[:, 1][:, None] - v[:, 1][None, :]
        cross = (dx * edge[:, 1][None, :] - dy * edge[:, 0][None, :]) / -norm[None, :]
        return np.all(cross > HULL_EPS, axis=1)
    v = hull.vertices
    tri = hull.faces
    n = np.cross(v[tri[:, 1]] - v[tri[:, 0]], v[tri[:, 2]] - v[tri[:, 0]])
    norm = np.linalg.norm(n, axis=1)
    keep = norm > 0
    n = n[keep] / norm[keep, None]
    c = np.einsum("ij,ij->i", n, v[tri[keep, 0]])
    return np.all(pts @ n.T - c[None, :] < -HULL_EPS, axis=1)


def hull_volume(hull: ConvexHull) -> float:
    """Signed volume (3-D) or signed area (2-D); positive for valid output."""
    if hull.dim == 2:
        v = hull.vertices
        nxt = np.roll(v, -1, axis=0)
        return float(0.5 * np.sum(v[:, 0] * nxt[:, 1] - nxt[:, 0] * v[:, 1]))
    v = hull.vertices
    tri = hull.faces
    a, b, c = v[tri[:, 0]], v[tri[:, 1]], v[tri[:, 2]]
    return float(np.sum(np.einsum("ij,ij->i", a, np.cross(b, c))) / 6.0)
