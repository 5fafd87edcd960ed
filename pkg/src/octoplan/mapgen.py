"""Synthetic cloud generators: gradient-noise fields and shape surfaces.

The noise path evaluates classic multi-octave gradient noise on a regular
sample lattice and emits a point wherever the value clears a threshold.
Gradients are unit vectors and the blend of corner contributions is bounded
by sqrt(d)/2 (Jensen over the fade weights), so after scaling by 2/sqrt(d)
single-octave values provably stay inside [-1, 1]; octave sums are divided
by their amplitude total, which keeps the bound.

Shape clouds sample points exactly on analytic surfaces (cuboid, cylinder,
arch, helix tube) on a parameter lattice with a deterministic in-surface
jitter, so surface residuals stay at floating-point scale while avoiding
degenerate collinear runs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpec
from .geometry import Aabb, PointCloud

_MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """One step of the splitmix64 generator: (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, (z ^ (z >> 31)) & _MASK64


def derive_seed(base: int, *indices: int) -> int:
    """Stable sub-seed from a base seed and a tuple of stream indices."""
    state = base & _MASK64
    for ix in indices:
        state, _ = splitmix64(state ^ ((ix * 0xD1342543DE82EF95) & _MASK64))
    state, out = splitmix64(state)
    return out


def _permutation(seed: int) -> np.ndarray:
    """256-entry permutation, Fisher-Yates driven by splitmix64, doubled."""
    table = list(range(256))
    state = seed & _MASK64
    for i in range(255, 0, -1):
        state, out = splitmix64(state)
        j = out % (i + 1)
        table[i], table[j] = table[j], table[i]
    doubled = np.asarray(table + table, dtype=np.int64)
    return doubled


def _fade(t):
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


_GRAD2 = np.asarray(
    [[1, 0], [-1, 0], [0, 1], [0, -1],
     [1, 1], [-1, 1], [1, -1], [-1, -1]], dtype=float)
_GRAD2[4:] /= math.sqrt(2.0)

_GRAD3 = np.asarray(
    [[1, 1, 0], [-1, 1, 0], [1, -1, 0], [-1, -1, 0],
     [1, 0, 1], [-1, 0, 1], [1, 0, -1], [-1, 0, -1],
     [0, 1, 1], [0, -1, 1], [0, 1, -1], [0, -1, -1]], dtype=float)
_GRAD3 /= math.sqrt(2.0)

_SCALE2 = 2.0 / math.sqrt(2.0)
_SCALE3 = 2.0 / math.sqrt(3.0)


def _noise2(perm: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    xi = np.floor(x).astype(np.int64)
    yi = np.floor(y).astype(np.int64)
    xf = x - xi
    yf = y - yi
    xi &= 255
    yi &= 255
    u = _fade(xf)
    v = _fade(yf)

    def corner(ox, oy):
        h = perm[perm[xi + ox] + yi + oy] & 7
        g = _GRAD2[h]
        return g[:, 0] * (xf - ox) + g[:, 1] * (yf - oy)

    n00 = corner(0, 0)
    n10 = corner(1, 0)
    n01 = corner(0, 1)
    n11 = corner(1, 1)
    nx0 = n00 + u * (n10 - n00)
    nx1 = n01 + u * (n11 - n01)
    return _SCALE2 * (nx0 + v * (nx1 - nx0))


def _noise3(perm: np.ndarray, x: np.ndarray, y: np.ndarray,
            z: np.ndarray) -> np.ndarray:
    xi = np.floor(x).astype(np.int64)
    yi = np.floor(y).astype(np.int64)
    zi = np.floor(z).astype(np.int64)
    xf = x - xi
    yf = y - yi
    zf = z - zi
    xi &= 255
    yi &= 255
    zi &= 255
    u = _fade(xf)
    v = _fade(yf)
    w = _fade(zf)

    def corner(ox, oy, oz):
        h = perm[perm[perm[xi + ox] + yi + oy] + zi + oz] % 12
        g = _GRAD3[h]
        return (g[:, 0] * (xf - ox) + g[:, 1] * (yf - oy)
                + g[:, 2] * (zf - oz))

    n000 = corner(0, 0, 0)
    n100 = corner(1, 0, 0)
    n010 = corner(0, 1, 0)
    n110 = corner(1, 1, 0)
    n001 = corner(0, 0, 1)
    n101 = corner(1, 0, 1)
    n011 = corner(0, 1, 1)
    n111 = corner(1, 1, 1)
    nx00 = n000 + u * (n100 - n000)
    nx10 = n010 + u * (n110 - n010)
    nx01 = n001 + u * (n101 - n001)
    nx11 = n011 + u * (n111 - n011)
    nxy0 = nx00 + v * (nx10 - nx00)
    nxy1 = nx01 + v * (nx11 - nx01)
    return _SCALE3 * (nxy0 + w * (nxy1 - nxy0))


@dataclass(frozen=True)
class PerlinParams:
    """Noise-field generator settings.

    frequency is in lattice cycles per metre; samples_per_meter sets the
    emission lattice pitch; threshold in [-1, 1] picks the occupied fraction
    (-1 emits every sample).
    """

    seed: int
    domain: Aabb
    frequency: float = 0.03
    octaves: int = 4
    persistence: float = 0.5
    threshold: float = 0.1
    samples_per_meter: float = 4.0

    def __post_init__(self):
        if self.octaves < 1:
            raise InvalidSpec(f"octaves must be >= 1, got {self.octaves}")
        if not 0.0 < self.persistence <= 1.0:
            raise InvalidSpec(f"persistence must be in (0, 1], got {self.persistence}")
        if not (math.isfinite(self.frequency) and self.frequency > 0):
            raise InvalidSpec(f"frequency must be positive, got {self.frequency}")
        if not (math.isfinite(self.samples_per_meter) and self.samples_per_meter > 0):
            raise InvalidSpec(
                f"samples_per_meter must be positive, got {self.samples_per_meter}")
        if np.any(self.domain.edges <= 0):
            raise InvalidSpec("noise domain must have positive extent")


def multi_octave_noise(params: PerlinParams, coords: np.ndarray) -> np.ndarray:
    """Noise values at metric coordinates, one row per sample."""
    perm = _permutation(params.seed)
    d = coords.shape[1]
    total = np.zeros(coords.shape[0], dtype=float)
    amp = 1.0
    amp_sum = 0.0
    freq = params.frequency
    for _ in range(params.octaves):
        scaled = coords * freq
        if d == 2:
            total += amp * _noise2(perm, scaled[:, 0], scaled[:, 1])
        else:
            total += amp * _noise3(perm, scaled[:, 0], scaled[:, 1], scaled[:, 2])
        amp_sum += amp
        amp *= params.persistence
        freq *= 2.0
    return total / amp_sum


def _lattice_axes(domain: Aabb, spm: float) -> list[np.ndarray]:
    axes = []
    for a in range(domain.dim):
        n = int(math.floor(domain.edges[a] * spm))
        n = max(1, n)
        axes.append(domain.min[a] + (np.arange(n) + 0.5) / spm)
    return axes


def gen_perlin_cloud(params: PerlinParams) -> PointCloud:
    """Sample the noise field on its lattice and keep cells >= threshold."""
    axes = _lattice_axes(params.domain, params.samples_per_meter)
    grids = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([g.ravel() for g in grids], axis=1)
    values = multi_octave_noise(params, coords)
    return PointCloud(coords[values >= params.threshold])


# ------------------------------------------------------------------ shapes


@dataclass(frozen=True)
class ShapeSpec:
    """One analytic surface: kind in {cuboid, cylinder, arch, helix},
    per-kind size parameters, a translation, a principal axis, and a surface
    density in points per square metre."""

    kind: str
    params: dict = field(default_factory=dict)
    translation: tuple = (0.0, 0.0, 0.0)
    axis: int = 2
    density: float = 100.0


_REQUIRED = {
    "cuboid": ("sx", "sy", "sz"),
    "cylinder": ("radius", "height"),
    "arch": ("outer_radius", "inner_radius", "width"),
    "helix": ("radius", "pitch", "turns", "tube_radius"),
}


def _validate_spec(spec: ShapeSpec, index: int) -> None:
    where = f"shape {index} ({spec.kind})"
    if spec.kind not in _REQUIRED:
        raise InvalidSpec(f"{where}: unknown kind")
    missing = [k for k in _REQUIRED[spec.kind] if k not in spec.params]
    if missing:
        raise InvalidSpec(f"{where}: missing parameters {missing}")
    if any(not math.isfinite(float(v)) or float(v) <= 0
           for v in (spec.params[k] for k in _REQUIRED[spec.kind])):
        raise InvalidSpec(f"{where}: size parameters must be positive")
    if not (math.isfinite(spec.density) and spec.density > 0):
        raise InvalidSpec(f"{where}: density must be positive")
    if spec.axis not in (0, 1, 2):
        raise InvalidSpec(f"{where}: axis must be 0, 1, or 2")
    if spec.kind == "arch":
        if spec.params["inner_radius"] >= spec.params["outer_radius"]:
            raise InvalidSpec(f"{where}: inner radius must be below outer radius")
    if spec.kind == "helix":
        pitch = float(spec.params["pitch"])
        rho = float(spec.params["tube_radius"])
        if rho >= spec.params["radius"] or rho > 0.45 * pitch:
            raise InvalidSpec(
                f"{where}: tube radius must stay below the coil radius and "
                f"0.45 * pitch so the tube cannot self-intersect")


def _jitter(rng_seed: int, shape) -> np.ndarray:
    """Deterministic uniforms in [-0.35, 0.35) for in-lattice jitter.

    Vectorized splitmix64: state after i steps is seed + (i + 1) * gamma,
    so the whole stream comes from one finalizer pass over an index array.
    """
    count = int(np.prod(shape))
    idx = np.arange(1, count + 1, dtype=np.uint64)
    z = np.uint64(rng_seed & _MASK64) + idx * np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    out = (z / 2.0 ** 64 - 0.5) * 0.7
    return out.reshape(shape)


def _grid_params(n_u, n_v, seed):
    iu, iv = np.meshgrid(np.arange(n_u), np.arange(n_v), indexing="ij")
    ju = _jitter(derive_seed(seed, 0), iu.shape)
    jv = _jitter(derive_seed(seed, 1), iv.shape)
    u = (iu + 0.5 + ju).ravel() / n_u
    v = (iv + 0.5 + jv).ravel() / n_v
    return u, v


def _counts(length_u: float, length_v: float, density: float) -> tuple[int, int]:
    root = math.sqrt(density)
    return (max(1, round(length_u * root)), max(1, round(length_v * root)))


def _cuboid_points(p, density, seed):
    sx, sy, sz = (float(p[k]) for k in ("sx", "sy", "sz"))
    pieces = []
    spans = [(sy, sz, 0, sx), (sx, sz, 1, sy), (sx, sy, 2, sz)]
    piece = 0
    for lu, lv, fixed_axis, extent in spans:
        for offset in (0.0, extent):
            n_u, n_v = _counts(lu, lv, density)
            u, v = _grid_params(n_u, n_v, derive_seed(seed, piece))
            pts = np.empty((u.size, 3), dtype=float)
            other = [a for a in range(3) if a != fixed_axis]
            pts[:, other[0]] = u * lu
            pts[:, other[1]] = v * lv
            pts[:, fixed_axis] = offset
            pieces.append(pts)
            piece += 1
    return np.vstack(pieces)


def _cylinder_points(p, density, seed):
    r, h = float(p["radius"]), float(p["height"])
    pieces = []
    n_t, n_z = _counts(2 * math.pi * r, h, density)
    u, v = _grid_params(n_t, n_z, derive_seed(seed, 0))
    theta = u * 2 * math.pi
    pts = np.stack([r * np.cos(theta), r * np.sin(theta), v * h], axis=1)
    pieces.append(pts)
    n_rings = max(1, round(r * math.sqrt(density)))
    for cap_i, z in enumerate((0.0, h)):
        ring_pts = []
        for k in range(n_rings):
            rk = (k + 0.5) * r / n_rings
            m = max(1, round(2 * math.pi * rk * math.sqrt(density)))
            jit = _jitter(derive_seed(seed, 1 + cap_i, k), (m,))
            ang = (np.arange(m) + 0.5 + jit) / m * 2 * math.pi
            ring_pts.append(np.stack(
                [rk * np.cos(ang), rk * np.sin(ang), np.full(m, z)], axis=1))
        pieces.append(np.vstack(ring_pts))
    return np.vstack(pieces)


def _arch_points(p, density, seed):
    outer = float(p["outer_radius"])
    inner = float(p["inner_radius"])
    width = float(p["width"])
    pieces = []
    # Two flat half-annulus faces at y = 0 and y = width (local frame:
    # the arch curves in the x-z plane, z up, extruded along y).
    n_t, n_r = _counts(math.pi * 0.5 * (outer + inner), outer - inner, density)
    for face_i, y in enumerate((0.0, width)):
        u, v = _grid_params(n_t, n_r, derive_seed(seed, face_i))
        theta = u * math.pi
        rho = inner + v * (outer - inner)
        pieces.append(np.stack(
            [rho * np.cos(theta), np.full(u.size, y), rho * np.sin(theta)],
            axis=1))
    # Inner and outer half-cylindrical bands.
    for band_i, rho in enumerate((inner, outer)):
        n_t, n_y = _counts(math.pi * rho, width, density)
        u, v = _grid_params(n_t, n_y, derive_seed(seed, 2 + band_i))
        theta = u * math.pi
        pieces.append(np.stack(
            [rho * np.cos(theta), v * width, rho * np.sin(theta)], axis=1))
    # Two flat feet where the arch meets z = 0.
    for foot_i, sign in enumerate((1.0, -1.0)):
        n_x, n_y = _counts(outer - inner, width, density)
        u, v = _grid_params(n_x, n_y, derive_seed(seed, 4 + foot_i))
        x = sign * (inner + u * (outer - inner))
        pieces.append(np.stack(
            [x, v * width, np.zeros(u.size)], axis=1))
    return np.vstack(pieces)


def _helix_points(p, density, seed):
    big_r = float(p["radius"])
    pitch = float(p["pitch"])
    turns = float(p["turns"])
    rho = float(p["tube_radius"])
    c = pitch / (2 * math.pi)
    t_max = 2 * math.pi * turns
    speed = math.sqrt(big_r * big_r + c * c)
    n_t, n_phi = _counts(speed * t_max, 2 * math.pi * rho, density)
    u, v = _grid_params(n_t, n_phi, derive_seed(seed, 0))
    t = u * t_max
    phi = v * 2 * math.pi
    cos_t, sin_t = np.cos(t), np.sin(t)
    center = np.stack([big_r * cos_t, big_r * sin_t, c * t], axis=1)
    normal = np.stack([-cos_t, -sin_t, np.zeros_like(t)], axis=1)
    binorm = np.stack([c * sin_t, -c * cos_t, np.full_like(t, big_r)], axis=1)
    binorm /= speed
    offs = (np.cos(phi)[:, None] * normal + np.sin(phi)[:, None] * binorm) * rho
    return center + offs


_BUILDERS = {
    "cuboid": _cuboid_points,
    "cylinder": _cylinder_points,
    "arch": _arch_points,
    "helix": _helix_points,
}


def _orient(pts: np.ndarray, axis: int) -> np.ndarray:
    """Cyclic permutation taking the local z axis onto the given world axis."""
    if axis == 2:
        return pts
    if axis == 0:
        return pts[:, [2, 0, 1]]
    return pts[:, [1, 2, 0]]


def gen_shape_cloud(specs: list[ShapeSpec], seed: int = 0) -> PointCloud:
    """Concatenated surface samples of every spec; an empty spec list gives
    an empty 3-D cloud."""
    if not specs:
        return PointCloud.empty(3)
    pieces = []
    for i, spec in enumerate(specs):
        _validate_spec(spec, i)
        local = _BUILDERS[spec.kind](spec.params, spec.density,
                                     derive_seed(seed, i))
        world = _orient(local, spec.axis) + np.asarray(spec.translation, dtype=float)
        pieces.append(world)
    return PointCloud(np.vstack(pieces))


def shape_surface_area(spec: ShapeSpec) -> float:
    """Analytic surface area, used to pick densities for point budgets."""
    p = spec.params
    if spec.kind == "cuboid":
        sx, sy, sz = float(p["sx"]), float(p["sy"]), float(p["sz"])
        return 2.0 * (sx * sy + sx * sz + sy * sz)
    if spec.kind == "cylinder":
        r, h = float(p["radius"]), float(p["height"])
        return 2 * math.pi * r * h + 2 * math.pi * r * r
    if spec.kind == "arch":
        outer, inner = float(p["outer_radius"]), float(p["inner_radius"])
        w = float(p["width"])
        flats = math.pi * (outer ** 2 - inner ** 2)
        bands = math.pi * (outer + inner) * w
        feet = 2 * (outer - inner) * w
        return flats + bands + feet
    if spec.kind == "helix":
        big_r = float(p["radius"])
        c = float(p["pitch"]) / (2 * math.pi)
        length = math.sqrt(big_r ** 2 + c ** 2) * 2 * math.pi * float(p["turns"])
        return 2 * math.pi * float(p["tube_radius"]) * length
    raise InvalidSpec(f"unknown kind {spec.kind}")


def demo_scene_specs(density: float = 400.0) -> list[ShapeSpec]:
    """A four-shape indoor-scale scene used by the timing and retention
    experiments."""
    return [
        ShapeSpec("cuboid", {"sx": 4.0, "sy": 3.0, "sz": 2.5},
                  translation=(1.0, 1.0, 0.0), density=density),
        ShapeSpec("cylinder", {"radius": 1.2, "height": 3.0},
                  translation=(10.0, 3.0, 0.0), density=density),
        ShapeSpec("arch", {"outer_radius": 2.5, "inner_radius": 1.5,
                           "width": 1.0},
                  translation=(7.0, 9.0, 0.0), density=density),
        ShapeSpec("helix", {"radius": 2.0, "pitch": 1.2, "turns": 3.0,
                            "tube_radius": 0.3},
                  translation=(3.0, 10.0, 0.2), density=density),
    ]


def scene_cloud(target_points: int, seed: int = 0) -> PointCloud:
    """Demo scene sampled at a density chosen to land near target_points."""
    base = demo_scene_specs(density=1.0)
    area = sum(shape_surface_area(s) for s in base)
    density = target_points / area
    specs = demo_scene_specs(density=density)
    return gen_shape_cloud(specs, seed)


# A ball and a box, interiors lattice-filled: the geometry never changes,
# only the sample density, which density-trend experiments rely on.
_SOLID_BALL = (np.array([6.0, 6.0, 6.0]), 0.75)
_SOLID_BOX = (np.array([11.0, 5.0, 4.0]), np.array([11.9, 5.8, 4.7]))
_SOLID_EDGE = 20.0
_SOLID_SEED = 0x50F1D

_SOLID_VOLUME = (4.0 / 3.0 * math.pi * _SOLID_BALL[1] ** 3
                 + float(np.prod(_SOLID_BOX[1] - _SOLID_BOX[0])))


def solid_domain() -> Aabb:
    """The cube the fixed solids sit in."""
    return Aabb(np.zeros(3), np.full(3, _SOLID_EDGE))


def _solid_lattice(box: Aabb, samples_per_meter: float, shape_index: int):
    axes = _lattice_axes(box, samples_per_meter)
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    for a in range(3):
        jit = _jitter(derive_seed(_SOLID_SEED, shape_index, a), (len(pts),))
        pts[:, a] += jit / samples_per_meter
    return pts


def gen_solid_cloud(samples_per_meter: float) -> PointCloud:
    """Jittered volume fill of a fixed ball-and-box pair inside solid_domain.

    Lattice points are cell-centered at spacing 1/samples_per_meter over
    each solid's bounding box, displaced by a deterministic sub-cell jitter;
    points outside the solid are dropped. The solids themselves never move,
    so only the sampling density varies with the argument.
    """
    if not (math.isfinite(samples_per_meter) and samples_per_meter > 0):
        raise InvalidSpec(
            f"samples_per_meter must be positive, got {samples_per_meter}")
    center, radius = _SOLID_BALL
    ball_box = Aabb(center - radius, center + radius)
    pts = _solid_lattice(ball_box, samples_per_meter, 0)
    inside = np.linalg.norm(pts - center, axis=1) <= radius
    clouds = [pts[inside], _solid_lattice(Aabb(*_SOLID_BOX),
                                          samples_per_meter, 1)]
    return PointCloud(np.vstack(clouds))


def solid_cloud_near(target_points: int) -> PointCloud:
    """Solid-pair cloud at the density that lands near target_points."""
    spm = (target_points / _SOLID_VOLUME) ** (1.0 / 3.0)
    return gen_solid_cloud(spm)
