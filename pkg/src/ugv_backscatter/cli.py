"""Command-line entry point and experiment harness.

Subcommands: ``gen-scenario`` (draw and save an instance), ``solve`` (plan
one mission and write a result document), ``trace`` (iteration-vs-energy CSV
of the local search), ``path-dump`` (plot-ready tour geometry CSV),
``sweep`` (Monte-Carlo comparison of the search against the no-move and
visit-all policies over a grid of noise powers), and ``fit-beta`` (on-off
keying modulation-loss fit).

Sweeps are deterministic: a master seed spawns per-run and per-search seeds
through numpy ``SeedSequence`` with fixed spawn keys (see README), channels
are drawn once per run and shared across the whole noise grid, and rows are
written in a fixed order with full-precision floats, so the same spec file
and master seed always produce byte-identical CSVs.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .allocation import bits_collected, effective_gain, fit_ook_modulation_loss
from .mobility import depot_only, selection_from_mask, selection_mask
from .planner import (
    EXHAUSTIVE_MAX,
    PlanEvaluator,
    PlanOutcome,
    SearchResult,
    SolverConfig,
    exhaustive_search,
    local_search,
)
from .scenario import (
    ChannelConfig,
    PhysicalParams,
    Scenario,
    ScenarioError,
    dbm_to_watt,
    generate_scenario,
    load_scenario,
    save_scenario,
    watt_to_dbm,
)

__all__ = [
    "ExperimentSpec",
    "ResultRow",
    "AggregateRow",
    "spawn_seed",
    "run_sweep",
    "write_rows_csv",
    "write_aggregate_csv",
    "aggregate_rows",
    "main",
]

RESULT_SCHEMA_VERSION = 1
METHOD_ORDER = ("sls", "no_move", "visit_all", "exhaustive")
POWER_WARN_W = 1e3


def spawn_seed(master_seed: int, *path: int) -> np.random.SeedSequence:
    """Deterministic child seed: SeedSequence((master, *path))."""
    return np.random.SeedSequence((int(master_seed),) + tuple(int(x) for x in path))


# --- experiment specification ---------------------------------------------------

@dataclass
class ExperimentSpec:
    """Everything a sweep needs; JSON-loadable.

    One run draws a fresh map and channel realization; the same channels are
    reused for every noise level in ``noise_grid_dbm`` so per-run trends
    across noise are meaningful.  The default scale keeps desk runtime low;
    raise ``runs`` for publication-grade averages.
    """

    runs: int = 20
    noise_grid_dbm: list[float] = field(default_factory=lambda: [-120.0, -110.0, -100.0, -90.0, -80.0, -70.0, -60.0])
    num_vertices: int = 15
    num_users: int = 10
    area_side: float = 20.0
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    demand_range: tuple[float, float] = (2.0, 4.0)
    params: PhysicalParams = field(default_factory=PhysicalParams)
    flip_radius: int = 3
    iteration_cap: int = 50
    master_seed: int = 0
    include_exhaustive: bool = False

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not self.noise_grid_dbm:
            raise ValueError("noise_grid_dbm must be non-empty")
        if self.include_exhaustive and self.num_vertices > EXHAUSTIVE_MAX:
            raise ValueError(f"exhaustive method requires at most {EXHAUSTIVE_MAX} vertices")

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        kwargs = dict(doc)
        if "channel" in kwargs and kwargs["channel"] is not None:
            kwargs["channel"] = ChannelConfig(**kwargs["channel"])
        if "params" in kwargs and kwargs["params"] is not None:
            kwargs["params"] = PhysicalParams(**kwargs["params"])
        if "demand_range" in kwargs:
            kwargs["demand_range"] = tuple(kwargs["demand_range"])
        return cls(**kwargs)

    def to_json(self, path) -> None:
        doc = dataclasses.asdict(self)
        doc["demand_range"] = list(self.demand_range)
        Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


@dataclass
class ResultRow:
    """One (run, noise, method) record of a sweep."""

    run: int
    noise_dbm: float
    noise_w: float
    method: str
    total_energy: float
    energy_motion: float
    energy_comm: float
    feasible: bool
    iterations: int
    wall_time_s: float


@dataclass
class AggregateRow:
    noise_dbm: float
    noise_w: float
    method: str
    runs: int
    feasible_runs: int
    mean_total_energy: float
    mean_energy_motion: float
    mean_energy_comm: float


def _row_from_outcome(run, noise_dbm, noise_w, method, outcome: PlanOutcome, iterations, wall) -> ResultRow:
    return ResultRow(
        run=run,
        noise_dbm=noise_dbm,
        noise_w=noise_w,
        method=method,
        total_energy=outcome.total_energy,
        energy_motion=outcome.energy_motion,
        energy_comm=outcome.energy_comm,
        feasible=outcome.feasible,
        iterations=iterations,
        wall_time_s=wall,
    )


def run_sweep(spec: ExperimentSpec, collect_outcomes: bool = False):
    """Execute a sweep; returns (rows, aggregates[, outcomes]).

    Per run, noise levels are processed from the highest down and the best
    selection found so far is re-evaluated at each lower level, so the
    reported search energy is exactly non-increasing toward lower noise on
    the shared channels (any selection is cheaper at lower noise).  Rows are
    emitted in (run, ascending noise, method) order regardless.
    """
    methods = list(METHOD_ORDER[:3]) + (["exhaustive"] if spec.include_exhaustive else [])
    grid = sorted(spec.noise_grid_dbm)
    rows: dict[tuple[int, int, str], ResultRow] = {}
    outcomes: dict[tuple[int, int, str], PlanOutcome] = {}

    for run in range(spec.runs):
        base = generate_scenario(
            spawn_seed(spec.master_seed, run, 0),
            spec.num_vertices,
            spec.num_users,
            spec.area_side,
            channel=spec.channel,
            params=spec.params,
            demand_range=spec.demand_range,
        )
        tsp_cache = {}
        carry_mask: int | None = None
        for noise_index in range(len(grid) - 1, -1, -1):
            noise_dbm = grid[noise_index]
            noise_w = dbm_to_watt(noise_dbm)
            scen = base.with_noise(noise_w)
            config = SolverConfig(
                flip_radius=spec.flip_radius,
                iteration_cap=spec.iteration_cap,
                rng_seed=spawn_seed(spec.master_seed, run, 1, noise_index),
            )
            evaluator = PlanEvaluator(scen, config, tsp_cache)

            t0 = time.perf_counter()
            search = local_search(scen, config, tsp_cache)
            best = search.best
            if carry_mask is not None:
                carried = evaluator.evaluate(selection_from_mask(carry_mask, spec.num_vertices))
                if carried.total_energy < best.total_energy:
                    best = carried
            carry_mask = selection_mask(best.selection)
            wall = time.perf_counter() - t0
            key = (run, noise_index, "sls")
            rows[key] = _row_from_outcome(run, noise_dbm, noise_w, "sls", best, search.iterations_used, wall)
            outcomes[key] = best

            t0 = time.perf_counter()
            no_move = evaluator.evaluate(depot_only(spec.num_vertices))
            rows[(run, noise_index, "no_move")] = _row_from_outcome(
                run, noise_dbm, noise_w, "no_move", no_move, 0, time.perf_counter() - t0
            )
            outcomes[(run, noise_index, "no_move")] = no_move

            t0 = time.perf_counter()
            visit_all = evaluator.evaluate(np.ones(spec.num_vertices, dtype=np.int8))
            rows[(run, noise_index, "visit_all")] = _row_from_outcome(
                run, noise_dbm, noise_w, "visit_all", visit_all, 0, time.perf_counter() - t0
            )
            outcomes[(run, noise_index, "visit_all")] = visit_all

            if spec.include_exhaustive:
                t0 = time.perf_counter()
                exact = exhaustive_search(scen, config, tsp_cache)
                rows[(run, noise_index, "exhaustive")] = _row_from_outcome(
                    run,
                    noise_dbm,
                    noise_w,
                    "exhaustive",
                    exact,
                    1 << (spec.num_vertices - 1),
                    time.perf_counter() - t0,
                )
                outcomes[(run, noise_index, "exhaustive")] = exact

    ordered = [
        rows[(run, noise_index, method)]
        for run in range(spec.runs)
        for noise_index in range(len(grid))
        for method in methods
    ]
    aggregates = aggregate_rows(ordered)
    if collect_outcomes:
        return ordered, aggregates, outcomes
    return ordered, aggregates


def aggregate_rows(rows: list[ResultRow]) -> list[AggregateRow]:
    """Mean energies per (noise, method); means are plain sum/len over runs."""
    groups: dict[tuple[float, str], list[ResultRow]] = {}
    for row in rows:
        groups.setdefault((row.noise_dbm, row.method), []).append(row)
    out = []
    for noise_dbm in sorted({k[0] for k in groups}):
        for method in METHOD_ORDER:
            key = (noise_dbm, method)
            if key not in groups:
                continue
            bucket = groups[key]
            n = len(bucket)
            out.append(
                AggregateRow(
                    noise_dbm=noise_dbm,
                    noise_w=dbm_to_watt(noise_dbm),
                    method=method,
                    runs=n,
                    feasible_runs=sum(1 for r in bucket if r.feasible),
                    mean_total_energy=sum(r.total_energy for r in bucket) / n,
                    mean_energy_motion=sum(r.energy_motion for r in bucket) / n,
                    mean_energy_comm=sum(r.energy_comm for r in bucket) / n,
                )
            )
    return out


# --- file output -----------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_rows_csv(rows: list[ResultRow], path, include_timing: bool = False) -> None:
    """Per-run rows; wall times are only written on request since they vary
    between repetitions of an otherwise deterministic sweep."""
    headers = ["run", "noise_dbm", "noise_w", "method", "total_energy", "energy_motion",
               "energy_comm", "feasible", "iterations"]
    if include_timing:
        headers.append("wall_time_s")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(headers)
        for r in rows:
            record = [r.run, r.noise_dbm, r.noise_w, r.method, r.total_energy,
                      r.energy_motion, r.energy_comm, r.feasible, r.iterations]
            if include_timing:
                record.append(r.wall_time_s)
            writer.writerow([_fmt(x) for x in record])


def write_aggregate_csv(aggregates: list[AggregateRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["noise_dbm", "noise_w", "method", "runs", "feasible_runs",
                         "mean_total_energy", "mean_energy_motion", "mean_energy_comm"])
        for a in aggregates:
            writer.writerow([_fmt(x) for x in (a.noise_dbm, a.noise_w, a.method, a.runs,
                                               a.feasible_runs, a.mean_total_energy,
                                               a.mean_energy_motion, a.mean_energy_comm)])


def _jsonable(obj):
    """Recursively make values JSON-safe; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def result_document(
    scenario: Scenario,
    outcome: PlanOutcome,
    search: SearchResult | None,
    config: SolverConfig,
    scenario_path: str | None = None,
) -> dict:
    """Plan outcome as a JSON-ready document (used by ``solve``)."""
    p = scenario.params
    doc = {
        "schema_version": RESULT_SCHEMA_VERSION,
        "scenario_path": scenario_path,
        "speed_mps": p.speed_mps,
        "noise_w": p.noise_w,
        "noise_dbm": watt_to_dbm(p.noise_w),
        "config": {
            "flip_radius": config.flip_radius,
            "iteration_cap": config.iteration_cap,
            "cache_enabled": config.cache_enabled,
        },
        "outcome": {
            "feasible": outcome.feasible,
            "total_energy_j": outcome.total_energy,
            "energy_motion_j": outcome.energy_motion,
            "energy_comm_j": outcome.energy_comm,
            "selection": [int(b) for b in outcome.selection],
            "order": None if outcome.tsp.plan is None else outcome.tsp.plan.order,
            "tour_length_m": outcome.tsp.tour_length,
            "comm_time_s": outcome.tsp.comm_time,
        },
    }
    if outcome.allocation is not None:
        doc["outcome"]["stop_time_s"] = outcome.allocation.stop_time
        doc["outcome"]["energy_j"] = outcome.allocation.energy
        doc["outcome"]["power_w"] = outcome.allocation.power
        doc["outcome"]["max_power_w"] = outcome.allocation.max_power
        doc["outcome"]["kkt"] = {
            "qos_residual": outcome.kkt.qos_residual,
            "time_residual": outcome.kkt.time_residual,
            "stationarity_residual": outcome.kkt.stationarity_residual,
            "user_multipliers": outcome.kkt.user_multipliers,
            "time_multiplier": outcome.kkt.time_multiplier,
        }
    if search is not None:
        doc["search"] = {
            "initial_energy_j": search.initial_energy,
            "iterations_used": search.iterations_used,
            "exit_reason": search.exit_reason,
            "trace": search.trace,
        }
    return _jsonable(doc)


# --- subcommands -------------------------------------------------------------------

def _load_scenario_arg(args) -> Scenario:
    scen = load_scenario(args.scenario)
    if getattr(args, "speed", None) is not None:
        scen = dataclasses.replace(
            scen, params=dataclasses.replace(scen.params, speed_mps=args.speed)
        )
    return scen


def _config_from_args(args) -> SolverConfig:
    return SolverConfig(
        flip_radius=args.L,
        iteration_cap=args.iters,
        rng_seed=args.seed,
        cache_enabled=not args.no_cache,
    )


def cmd_gen_scenario(args) -> int:
    channel = ChannelConfig(
        ref_loss=args.rho0, ref_dist_m=args.d0, exponent=args.exponent, fading=args.fading
    )
    params = PhysicalParams(
        speed_mps=args.speed if args.speed is not None else 1.0,
        noise_w=dbm_to_watt(args.noise_dbm),
        time_budget_s=args.budget,
    )
    scen = generate_scenario(
        args.seed, args.M, args.K, args.area, channel=channel, params=params,
        demand_range=(args.gamma_min, args.gamma_max),
    )
    save_scenario(scen, args.out)
    print(
        f"wrote {args.out}: {args.M} stops, {args.K} users, area {args.area} m, "
        f"noise {args.noise_dbm} dBm, seed {args.seed}"
    )
    return 0


def cmd_solve(args) -> int:
    try:
        scen = _load_scenario_arg(args)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    config = _config_from_args(args)
    if args.depot_only:
        evaluator = PlanEvaluator(scen, config)
        outcome = evaluator.evaluate(depot_only(scen.num_vertices))
        search = None
    else:
        search = local_search(scen, config)
        outcome = search.best
    if args.out:
        doc = result_document(scen, outcome, search, config, scenario_path=str(args.scenario))
        Path(args.out).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    if outcome.allocation is not None and outcome.allocation.max_power > POWER_WARN_W:
        print(
            f"warning: recovered transmit power peaks at {outcome.allocation.max_power:.3g} W",
            file=sys.stderr,
        )
    stops = int(outcome.selection.sum())
    print(
        f"{'feasible' if outcome.feasible else 'INFEASIBLE'}: total {outcome.total_energy!r} J "
        f"(motion {outcome.energy_motion!r} J, comm {outcome.energy_comm!r} J), {stops} stops"
    )
    return 0 if outcome.feasible else 2


def cmd_trace(args) -> int:
    try:
        scen = _load_scenario_arg(args)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    config = _config_from_args(args)
    search = local_search(scen, config)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "total_energy"])
        for i, value in enumerate(search.trace, start=1):
            writer.writerow([i, _fmt(float(value))])
    print(
        f"wrote {args.out}: start {search.initial_energy!r} J, "
        f"final {search.best.total_energy!r} J, exit {search.exit_reason}"
    )
    return 0


def cmd_path_dump(args) -> int:
    try:
        scen = _load_scenario_arg(args)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    config = _config_from_args(args)
    search = local_search(scen, config)
    outcome = search.best
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "i", "j", "x1", "y1", "x2", "y2", "selected"])
        for m, (x, y) in enumerate(scen.vertex_xy):
            writer.writerow(["vertex", m, "", _fmt(float(x)), _fmt(float(y)), "", "",
                             int(outcome.selection[m])])
        for k, (x, y) in enumerate(scen.user_xy):
            writer.writerow(["user", k, "", _fmt(float(x)), _fmt(float(y)), "", "", ""])
        if outcome.tsp.plan is not None:
            order = outcome.tsp.plan.order
            for a, b in zip(order[:-1], order[1:]):
                xa, ya = scen.vertex_xy[a]
                xb, yb = scen.vertex_xy[b]
                writer.writerow(["edge", a, b, _fmt(float(xa)), _fmt(float(ya)),
                                 _fmt(float(xb)), _fmt(float(yb)), ""])
    print(f"wrote {args.out}")
    return 0 if outcome.feasible else 2


def cmd_sweep(args) -> int:
    if args.spec:
        spec = ExperimentSpec.from_json(args.spec)
    else:
        spec = ExperimentSpec()
    overrides = {}
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.noise_grid is not None:
        overrides["noise_grid_dbm"] = [float(x) for x in args.noise_grid.split(",")]
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.L is not None:
        overrides["flip_radius"] = args.L
    if args.iters is not None:
        overrides["iteration_cap"] = args.iters
    if args.exhaustive:
        overrides["include_exhaustive"] = True
    if args.speed is not None:
        overrides["params"] = dataclasses.replace(spec.params, speed_mps=args.speed)
    if overrides:
        spec = dataclasses.replace(spec, **overrides)

    rows, aggregates = run_sweep(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_rows_csv(rows, out / "rows.csv", include_timing=args.timing)
    write_aggregate_csv(aggregates, out / "aggregate.csv")
    for a in aggregates:
        print(
            f"N0 {a.noise_dbm:8.1f} dBm  {a.method:10s} mean total {a.mean_total_energy!r} J "
            f"({a.feasible_runs}/{a.runs} feasible)"
        )
    print(f"wrote {out / 'rows.csv'} and {out / 'aggregate.csv'}")
    return 0


def cmd_fit_beta(args) -> int:
    beta = fit_ook_modulation_loss(args.grid_max, args.grid_points)
    print(f"on-off keying modulation loss: {beta!r} (grid 0..{args.grid_max}, {args.grid_points} points)")
    return 0


def recheck_result_document(doc: dict, scenario: Scenario, qos_tol: float = 1e-6) -> bool:
    """Re-validate a stored solve result against its scenario.

    Checks total = motion + comm and, when an allocation is stored, that it
    still meets every user's demand within ``qos_tol``.
    """
    out = doc["outcome"]
    total = float(out["total_energy_j"]) if not isinstance(out["total_energy_j"], str) else math.inf
    if math.isfinite(total):
        if not math.isclose(total, float(out["energy_motion_j"]) + float(out["energy_comm_j"]),
                            rel_tol=1e-9, abs_tol=1e-12):
            return False
        if "stop_time_s" in out:
            t = np.array(out["stop_time_s"], dtype=float)
            Q = np.array(out["energy_j"], dtype=float)
            A = effective_gain(scenario, np.array(out["selection"], dtype=np.int8))
            collected = bits_collected(t, Q, A).sum(axis=1)
            if np.any(collected < scenario.demand - qos_tol):
                return False
    return True


# --- argument parsing ----------------------------------------------------------------

def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--L", type=int, default=3, help="neighborhood flip radius")
    parser.add_argument("--iters", type=int, default=50, help="search iteration cap")
    parser.add_argument("--seed", type=int, default=0, help="search RNG seed")
    parser.add_argument("--speed", type=float, default=None, help="override vehicle speed (m/s)")
    parser.add_argument("--no-cache", action="store_true", help="disable outcome memoization")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ugv-plan",
        description="Energy-minimal mission planning for a mobile backscatter data collector.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-scenario", help="draw a random instance and save it")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--M", type=int, default=15, help="number of stops")
    g.add_argument("--K", type=int, default=10, help="number of users")
    g.add_argument("--area", type=float, default=20.0, help="square side (m)")
    g.add_argument("--rho0", type=float, default=1e-3, help="reference path loss")
    g.add_argument("--d0", type=float, default=1.0, help="reference distance (m)")
    g.add_argument("--exponent", type=float, default=2.5, help="path-loss exponent")
    g.add_argument("--fading", choices=["rayleigh", "none"], default="rayleigh")
    g.add_argument("--noise-dbm", type=float, default=-70.0)
    g.add_argument("--budget", type=float, default=50.0, help="mission time budget (s)")
    g.add_argument("--speed", type=float, default=None)
    g.add_argument("--gamma-min", type=float, default=2.0)
    g.add_argument("--gamma-max", type=float, default=4.0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_scenario)

    s = sub.add_parser("solve", help="plan one mission")
    s.add_argument("--scenario", required=True)
    s.add_argument("--out", default=None, help="result document path")
    s.add_argument("--depot-only", action="store_true", help="skip the search, stay at the depot")
    _add_solver_flags(s)
    s.set_defaults(func=cmd_solve)

    t = sub.add_parser("trace", help="dump the search incumbent trace as CSV")
    t.add_argument("--scenario", required=True)
    t.add_argument("--out", required=True)
    _add_solver_flags(t)
    t.set_defaults(func=cmd_trace)

    p = sub.add_parser("path-dump", help="dump tour geometry as CSV")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_path_dump)

    w = sub.add_parser("sweep", help="Monte-Carlo noise sweep with baselines")
    w.add_argument("--spec", default=None, help="JSON experiment spec")
    w.add_argument("--out", required=True, help="output directory")
    w.add_argument("--runs", type=int, default=None)
    w.add_argument("--noise-grid", default=None, help="comma-separated dBm values")
    w.add_argument("--seed", type=int, default=None, help="master seed")
    w.add_argument("--L", type=int, default=None)
    w.add_argument("--iters", type=int, default=None)
    w.add_argument("--speed", type=float, default=None)
    w.add_argument("--exhaustive", action="store_true",
                   help=f"add the exhaustive oracle (at most {EXHAUSTIVE_MAX} stops)")
    w.add_argument("--timing", action="store_true", help="include wall times in rows.csv")
    w.set_defaults(func=cmd_sweep)

    f = sub.add_parser("fit-beta", help="fit the on-off keying modulation loss")
    f.add_argument("--grid-max", type=float, default=20.0)
    f.add_argument("--grid-points", type=int, default=200)
    f.set_defaults(func=cmd_fit_beta)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
