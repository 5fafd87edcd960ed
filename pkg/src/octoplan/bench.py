"""Fixed-versus-adaptive planning campaigns over generated noise worlds.

A campaign runs `trials` independent worlds. Each world is one noise cloud;
for every requested nominal cell size the world is mapped two ways at
matched dimensions and planned over:

* the subdivision depth is the smallest D with 2^D cells of at most the
  nominal size along the longest domain edge;
* the fixed baseline grid uses per-axis cells of edge_i / 2^D, so both
  maps share dims, origin, and cell geometry;
* the fixed grid gets a single jump-point search; the adaptive tree gets
  the search plus occupied-leaf refinement retries.

Start and goal are drawn uniformly from free cells until they are at least
`min_separation_fraction` of the domain diagonal apart; if no draw within
`max_endpoint_attempts` satisfies that, the farthest pair seen is used.

CSV rows keep wall-clock columns last so byte-level determinism checks can
strip them by position; the aggregate JSON contains no timing at all.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, fields
from time import perf_counter

import numpy as np

from .errors import InvalidSpec, PlanningError
from .geometry import Aabb
from .gridmap import rasterize_fixed
from .mapgen import PerlinParams, derive_seed, gen_perlin_cloud
from .planner import PlanRequest, jps_plan, plan_with_refinement
from .tree import McrSpec
from .tree import build as build_tree


@dataclass(frozen=True)
class BenchConfig:
    domain_x_m: float = 200.0
    domain_y_m: float = 150.0
    cell_sizes_m: tuple = (2.6, 3.0, 3.4)
    trials: int = 200
    campaign_seed: int = 20260815
    noise_frequency_per_m: float = 0.03
    noise_octaves: int = 4
    noise_persistence: float = 0.5
    noise_threshold: float = 0.1
    samples_per_meter: float = 4.0
    epsilon_max_m: float = 1.3
    range_multiplier_k: float = 2.0
    min_separation_fraction: float = 0.8
    max_endpoint_attempts: int = 1000
    refinement_rounds: int = 2

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidSpec(f"trials must be >= 1, got {self.trials}")
        if not self.cell_sizes_m:
            raise InvalidSpec("cell_sizes_m must list at least one size")
        if any(c <= 0 for c in self.cell_sizes_m):
            raise InvalidSpec("cell sizes must be positive")
        if self.domain_x_m <= 0 or self.domain_y_m <= 0:
            raise InvalidSpec("domain edges must be positive")
        if not 0 < self.min_separation_fraction < 1:
            raise InvalidSpec("min_separation_fraction must be in (0, 1)")
        if self.refinement_rounds < 0:
            raise InvalidSpec("refinement_rounds must be >= 0")
        # Validates the sensing-range pair even though the nominal cell
        # sizes drive the benchmark depths directly.
        McrSpec(self.epsilon_max_m, self.range_multiplier_k)

    @property
    def domain(self) -> Aabb:
        return Aabb(np.zeros(2), np.asarray([self.domain_x_m, self.domain_y_m]))

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(repr(v) for v in value)
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BenchConfig":
        known = {f.name: f for f in fields(cls)}
        values = {}
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidSpec(f"config line {line_no}: expected key = value")
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if key not in known:
                raise InvalidSpec(f"config line {line_no}: unknown key {key!r}")
            try:
                if key == "cell_sizes_m":
                    values[key] = tuple(float(v) for v in val.split(","))
                elif known[key].type in ("int", int):
                    values[key] = int(val)
                else:
                    values[key] = float(val)
            except ValueError:
                raise InvalidSpec(
                    f"config line {line_no}: bad value {val!r} for {key}") from None
        return cls(**values)

    @classmethod
    def from_file(cls, path) -> "BenchConfig":
        with open(path) as fh:
            return cls.from_text(fh.read())


CSV_COLUMNS = [
    "trial_index", "cell_size_m", "effective_cell_m", "trial_seed", "depth",
    "n_points", "start_x_m", "start_y_m", "goal_x_m", "goal_y_m",
    "endpoint_fallback", "fixed_success", "adaptive_success",
    "fixed_length_m", "adaptive_length_m", "adaptive_rounds",
    "build_seconds", "fixed_plan_seconds", "adaptive_plan_seconds",
]

TIMING_COLUMNS = 3


@dataclass
class TrialRecord:
    trial_index: int
    cell_size_m: float
    effective_cell_m: float
    trial_seed: int
    depth: int
    n_points: int
    start_x_m: float
    start_y_m: float
    goal_x_m: float
    goal_y_m: float
    endpoint_fallback: bool
    fixed_success: bool
    adaptive_success: bool
    fixed_length_m: float
    adaptive_length_m: float
    adaptive_rounds: int
    build_seconds: float
    fixed_plan_seconds: float
    adaptive_plan_seconds: float

    def to_row(self) -> list:
        out = []
        for name in CSV_COLUMNS:
            value = getattr(self, name)
            if isinstance(value, (bool, np.bool_)):
                value = int(value)
            elif isinstance(value, (float, np.floating)):
                value = "" if math.isnan(value) else repr(float(value))
            out.append(value)
        return out


def depth_for_cell(longest_edge: float, cell: float, cap: int = 16) -> int:
    """Smallest depth whose cells along the longest edge are <= cell."""
    ratio = longest_edge / cell
    depth = max(0, math.ceil(math.log2(ratio)) if ratio > 1 else 0)
    while 2.0 ** depth < ratio and depth < cap:
        depth += 1
    while depth > 0 and 2.0 ** (depth - 1) >= ratio:
        depth -= 1
    return min(depth, cap)


def _draw_endpoints(grid, rng, min_dist, attempts):
    free = np.argwhere(~grid.occupancy)
    if len(free) < 2:
        return None
    best = None
    best_dist = -1.0
    for _ in range(attempts):
        a, b = rng.integers(0, len(free), size=2)
        if a == b:
            continue
        pa = grid.cell_center(tuple(free[a]))
        pb = grid.cell_center(tuple(free[b]))
        dist = float(np.linalg.norm(pa - pb))
        if dist >= min_dist:
            return tuple(free[a]), tuple(free[b]), False
        if dist > best_dist:
            best_dist = dist
            best = (tuple(free[a]), tuple(free[b]))
    if best is None:
        return None
    return best[0], best[1], True


def run_trial_cell(cloud, domain, cell, trial_index, trial_seed, cell_index,
                   config) -> TrialRecord:
    """Bench one (world, nominal cell size) pair."""
    longest = float(domain.edges.max())
    depth = depth_for_cell(longest, cell)
    eff_cells = domain.edges / 2.0 ** depth

    t0 = perf_counter()
    tree = build_tree(cloud, domain, depth)
    build_seconds = perf_counter() - t0
    fixed_grid = rasterize_fixed(cloud, domain, eff_cells)

    record = TrialRecord(
        trial_index=trial_index, cell_size_m=cell,
        effective_cell_m=longest / 2.0 ** depth, trial_seed=trial_seed,
        depth=depth, n_points=len(cloud),
        start_x_m=math.nan, start_y_m=math.nan,
        goal_x_m=math.nan, goal_y_m=math.nan,
        endpoint_fallback=False, fixed_success=False, adaptive_success=False,
        fixed_length_m=math.nan, adaptive_length_m=math.nan,
        adaptive_rounds=0, build_seconds=build_seconds,
        fixed_plan_seconds=0.0, adaptive_plan_seconds=0.0)

    rng = np.random.default_rng(derive_seed(trial_seed, cell_index))
    min_dist = config.min_separation_fraction * float(
        np.linalg.norm(domain.edges))
    drawn = _draw_endpoints(fixed_grid, rng, min_dist,
                            config.max_endpoint_attempts)
    if drawn is None:
        return record
    start_cell, goal_cell, record.endpoint_fallback = drawn
    start_pt = fixed_grid.cell_center(start_cell)
    goal_pt = fixed_grid.cell_center(goal_cell)
    record.start_x_m, record.start_y_m = float(start_pt[0]), float(start_pt[1])
    record.goal_x_m, record.goal_y_m = float(goal_pt[0]), float(goal_pt[1])

    t0 = perf_counter()
    fixed_path = jps_plan(fixed_grid, PlanRequest(start_cell, goal_cell))
    record.fixed_plan_seconds = perf_counter() - t0
    if fixed_path is not None:
        record.fixed_success = True
        record.fixed_length_m = fixed_path.metric_length(fixed_grid)

    t0 = perf_counter()
    try:
        outcome = plan_with_refinement(
            tree, start_pt, goal_pt, max_rounds=config.refinement_rounds)
        record.adaptive_success = True
        record.adaptive_length_m = outcome.path.metric_length(outcome.grid)
        record.adaptive_rounds = outcome.rounds_used
        record.adaptive_plan_seconds = outcome.plan_seconds
    except PlanningError as exc:
        record.adaptive_rounds = getattr(exc, "rounds_attempted", 0)
        record.adaptive_plan_seconds = perf_counter() - t0
    return record


def run_campaign(config: BenchConfig, progress=None) -> tuple[list, dict]:
    """Run every (trial, cell size) pair; returns (records, aggregate)."""
    domain = config.domain
    records = []
    for trial in range(config.trials):
        trial_seed = derive_seed(config.campaign_seed, trial)
        params = PerlinParams(
            seed=trial_seed, domain=domain,
            frequency=config.noise_frequency_per_m,
            octaves=config.noise_octaves,
            persistence=config.noise_persistence,
            threshold=config.noise_threshold,
            samples_per_meter=config.samples_per_meter)
        cloud = gen_perlin_cloud(params)
        for cell_index, cell in enumerate(config.cell_sizes_m):
            records.append(run_trial_cell(
                cloud, domain, cell, trial, trial_seed, cell_index, config))
        if progress is not None:
            progress(trial + 1, config.trials)
    return records, aggregate_records(config, records)


def aggregate_records(config: BenchConfig, records: list) -> dict:
    per_cell = {}
    for cell in config.cell_sizes_m:
        rows = [r for r in records if r.cell_size_m == cell]
        joint = [r for r in rows if r.fixed_success and r.adaptive_success]
        entry = {
            "depth": rows[0].depth if rows else None,
            "effective_cell_m": rows[0].effective_cell_m if rows else None,
            "trials": len(rows),
            "fixed_successes": sum(r.fixed_success for r in rows),
            "adaptive_successes": sum(r.adaptive_success for r in rows),
            "joint_successes": len(joint),
            "fixed_only_successes": sum(
                r.fixed_success and not r.adaptive_success for r in rows),
            "adaptive_only_successes": sum(
                r.adaptive_success and not r.fixed_success for r in rows),
        }
        if joint:
            mean_fixed = sum(r.fixed_length_m for r in joint) / len(joint)
            mean_adaptive = sum(r.adaptive_length_m for r in joint) / len(joint)
            entry["mean_fixed_length_m"] = mean_fixed
            entry["mean_adaptive_length_m"] = mean_adaptive
            entry["length_improvement_pct"] = (
                (mean_fixed - mean_adaptive) / mean_fixed * 100.0)
        per_cell[repr(cell)] = entry
    return {
        "config": {f.name: (list(v) if isinstance(
            (v := getattr(config, f.name)), tuple) else v)
            for f in fields(config)},
        "per_cell": per_cell,
    }


def records_to_csv(records: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for record in records:
        writer.writerow(record.to_row())
    return buf.getvalue()


def aggregate_to_json(aggregate: dict) -> str:
    return json.dumps(aggregate, indent=2, sort_keys=True) + "\n"


def write_outputs(out_dir, records: list, aggregate: dict) -> None:
    import os
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "records.csv"), "w") as fh:
        fh.write(records_to_csv(records))
    with open(os.path.join(out_dir, "aggregate.json"), "w") as fh:
        fh.write(aggregate_to_json(aggregate))
