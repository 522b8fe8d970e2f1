#!/usr/bin/env python3
"""
Main entry point for the semantic scheduling simulator
"""
import sys
import argparse
import dataclasses
import logging
import math
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent))

import numpy as np
import pandas as pd

from src import config
from src.delta_models import ConstantDelta
from src.exceptions import ConfigError, DegenerateGeometricSum, GridTooLarge, NumericalRejection, AllInfinite
from src.experiment_loader import load_experiment, load_grid
from src.gauss_markov import (
    analyze_system, mse_lower_bound_constant, mse_lower_bound_general, mse_upper_bound,
    packet_integrated_mse,
)
from src.oracle import TrajectoryConfig, lyapunov_solve, monte_carlo_mse, quadrature_L
from src.simulators import simulate
from src.strategies import AlohaVariant, CoordinatedVariant, parse_policy, round_robin
from src.sweep import build_frontier, evaluate_grid, hull_objective, weighted_best, weighted_objective
from src.utils import format_number, relative_error, standard_error

logger = logging.getLogger("semsched")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_GRID = 4

COORDINATED_FAMILIES = tuple(v.value for v in CoordinatedVariant)
ALOHA_FAMILIES = tuple(v.value for v in AlohaVariant)

SELFCHECK_TOL = 1e-6
TRAJECTORY_PACKETS = 2000


def write_csv(rows, columns, file_path):
    """Write rows with fixed column order; numbers in full precision"""
    formatted = [
        [format_number(v) if isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) else v
         for v in row]
        for row in rows
    ]
    pd.DataFrame(formatted, columns=columns).to_csv(file_path, index=False)
    print(f"  Saved {file_path}")


def _sensor_kernels(experiment):
    analyses = []
    for g, system in enumerate(experiment.systems):
        try:
            analyses.append(analyze_system(system))
        except NumericalRejection as exc:
            raise exc.with_sensor(g)
    return analyses


def cmd_bounds(experiment, out_dir):
    """Per-sensor lower and upper MSE bounds -> bounds.csv"""
    rows = []
    delta = experiment.delta
    for g, (spec, kernels) in enumerate(_sensor_kernels(experiment)):
        try:
            if isinstance(delta, ConstantDelta):
                lower = mse_lower_bound_constant(kernels, spec, delta.value, experiment.epsilon)
            else:
                lower = mse_lower_bound_general(
                    kernels, spec, delta, experiment.epsilon, experiment.num_packets, experiment.seeds[0]
                )
        except DegenerateGeometricSum as exc:
            logger.warning("sensor %d: %s", g + 1, exc)
            lower = math.inf
        except NumericalRejection as exc:
            raise exc.with_sensor(g)
        upper = mse_upper_bound(kernels, spec)
        rows.append([g + 1, lower, upper])
        print(f"  Sensor {g + 1}: lower bound {format_number(lower)}, upper bound {format_number(upper)}")
    write_csv(rows, ["sensor", "lower_bound", "upper_bound"], out_dir / "bounds.csv")
    return rows


def cmd_simulate(experiment, policy_spec, out_dir, write_events=False):
    """Simulate one policy for every configured seed -> result.csv"""
    spec = policy_spec or experiment.policy
    if not spec:
        raise ConfigError("no policy given; pass --policy or set 'policy' in the config")
    policy = parse_policy(spec)
    results = []
    for seed in experiment.seeds:
        sim_config = experiment.to_simulation_config(seed=seed, record_events=write_events and not results)
        results.append(simulate(sim_config, policy))
        print(f"  Seed {seed}: MSE {', '.join(format_number(v) for v in results[-1].mse)}")

    mse = np.mean([r.mse for r in results], axis=0)
    aoi = np.mean([r.aoi_mean for r in results], axis=0)
    if len(results) > 1:
        stderr = [standard_error([r.mse[g] for r in results]) for g in range(experiment.num_sensors)]
    else:
        stderr = results[0].stderr
    successes = np.sum([r.successes for r in results], axis=0)
    failures = np.sum([r.failures for r in results], axis=0)

    rows = [
        [g + 1, float(mse[g]), float(aoi[g]), float(stderr[g]), int(successes[g]), int(failures[g])]
        for g in range(experiment.num_sensors)
    ]
    write_csv(rows, ["sensor", "mse", "aoi_mean", "stderr", "successes", "failures"], out_dir / "result.csv")
    if write_events:
        events = [[e.sensor + 1, e.start, e.duration, int(e.success)] for e in results[0].events]
        write_csv(events, ["sensor", "start", "duration", "success"], out_dir / "events.csv")
    return results


def _family_groups(points):
    groups = {}
    for point in points:
        groups.setdefault(point.family, []).append(point)
    merged = {}
    for name, families in (("coordinated", COORDINATED_FAMILIES), ("aloha", ALOHA_FAMILIES)):
        members = [p for family in families for p in groups.get(family, [])]
        if len(set(p.family for p in members)) > 1:
            merged[name] = members
    groups.update(merged)
    return groups


def cmd_sweep(experiment, grid_path, out_dir, workers=1, show_progress=True):
    """Evaluate every grid -> points.csv, frontier.csv, weighted.csv"""
    grids = load_grid(grid_path, default_seeds=experiment.seeds)
    for grid in grids:
        grid.check_size()
    sim_config = experiment.to_simulation_config()
    size = experiment.num_sensors

    points = []
    for grid in grids:
        print(f"\n  {grid.family}: {grid.size} parameter tuples x {len(grid.seeds)} seeds")
        points.extend(evaluate_grid(grid, sim_config, workers=workers, show_progress=show_progress))

    mse_columns = [f"mse_{g + 1}" for g in range(size)]
    stderr_columns = [f"stderr_{g + 1}" for g in range(size)]
    write_csv(
        [[p.params] + [float(v) for v in p.mse] + [float(v) for v in p.stderr] for p in points],
        ["params"] + mse_columns + stderr_columns,
        out_dir / "points.csv",
    )

    frontier_rows = []
    weighted_rows = []
    for family, members in _family_groups(points).items():
        frontier = build_frontier(members)
        hull_ids = {id(p) for p in frontier.hull}
        for p in frontier.points:
            frontier_rows.append([family, p.params] + [float(v) for v in p.mse] + [int(id(p) in hull_ids)])
        for alpha in experiment.weights:
            try:
                best = weighted_best(members, alpha)
                params, objective = best.params, weighted_objective(best, alpha)
            except AllInfinite:
                params, objective = "", math.inf
            time_shared = hull_objective(frontier.hull, alpha, members) if size == 2 else math.nan
            weighted_rows.append([family] + list(alpha) + [params, objective, time_shared])
            print(f"  {family} alpha={list(alpha)}: {params or '-'} -> {format_number(objective)}")

    write_csv(frontier_rows, ["family", "params"] + mse_columns + ["hull"], out_dir / "frontier.csv")
    write_csv(
        weighted_rows,
        ["family"] + [f"alpha_{g + 1}" for g in range(size)] + ["params", "objective", "hull_objective"],
        out_dir / "weighted.csv",
    )
    return points


def _check(rows, g, name, value, reference, tolerance):
    error = abs(value) if reference == 0 else relative_error(value, reference)
    passed = bool(error <= tolerance)
    rows.append([g + 1, name, value, reference, error, int(passed)])
    mark = "✅" if passed else "❌"
    print(f"  {mark} Sensor {g + 1} {name}: {format_number(value)} vs {format_number(reference)}")
    return passed


def cmd_selfcheck(experiment, out_dir, trajectory_trials=0):
    """
    Cross-check the closed forms against the brute-force oracles -> selfcheck.csv

    Returns:
        True if every check passed
    """
    rows = []
    passed = True
    delta = experiment.delta.mean
    intervals = [(0.0, delta), (delta, 2 * delta), (0.5 * delta, 3 * delta)]
    for g, (spec, kernels) in enumerate(_sensor_kernels(experiment)):
        system = experiment.systems[g]
        try:
            lyapunov = lyapunov_solve(system)
            residual = system.drift @ kernels.upsilon + kernels.upsilon @ system.drift.T - system.diffusion
            scale = max(1.0, float(np.linalg.norm(system.diffusion)))
            passed &= _check(rows, g, "kernel_residual", float(np.max(np.abs(residual))) / scale, 0.0, 1e-8)
            passed &= _check(rows, g, "lyapunov_trace", float(np.trace(lyapunov)), -kernels.trace_upsilon, 1e-8)
            for lo, hi in intervals:
                closed = packet_integrated_mse(kernels, spec, lo, hi)
                passed &= _check(rows, g, f"L[{format_number(lo)},{format_number(hi)}]",
                                 quadrature_L(system, lo, hi), closed, SELFCHECK_TOL)
        except NumericalRejection as exc:
            raise exc.with_sensor(g)

    if trajectory_trials > 0:
        policy = parse_policy(experiment.policy) if experiment.policy else round_robin(experiment.num_sensors)
        sim_config = dataclasses.replace(
            experiment.to_simulation_config(record_events=True),
            num_packets=min(experiment.num_packets, TRAJECTORY_PACKETS),
        )
        result = simulate(sim_config, policy)
        trajectory = TrajectoryConfig.for_delta(delta, result.total_time, trajectory_trials, seed=sim_config.seed)
        estimate = monte_carlo_mse(experiment.systems, result.deliveries(), trajectory)
        for g in range(experiment.num_sensors):
            # within 5% or within 3 standard errors of the trajectory estimate
            tolerance = max(0.05, 3 * float(estimate.stderr[g]) / max(abs(float(result.mse[g])), 1e-300))
            passed &= _check(rows, g, "trajectory_mse", float(estimate.mse[g]), float(result.mse[g]), tolerance)

    write_csv(rows, ["sensor", "check", "value", "reference", "relative_error", "passed"], out_dir / "selfcheck.csv")
    return passed


def build_parser():
    parser = argparse.ArgumentParser(description="Semantic channel-access MSE simulator")
    parser.add_argument("command", choices=["bounds", "simulate", "sweep", "selfcheck"],
                        help="What to run")
    parser.add_argument("--config", "-c", type=str, default=None,
                        help=f"Experiment config JSON (default: {config.STABLE_CONFIG})")
    parser.add_argument("--policy", "-p", type=str, default=None,
                        help="Policy spec, e.g. 'threshold-adra:[0.5,0.5]:[0,10]'")
    parser.add_argument("--grid", "-g", type=str, default=None,
                        help="Parameter grid JSON (sweep only)")
    parser.add_argument("--seed", "-s", type=int, default=None,
                        help="Run a single seed instead of the config's seed list")
    parser.add_argument("--out", "-o", type=str, default=None,
                        help="Output directory for CSV files")
    parser.add_argument("--workers", "-w", type=int, default=config.DEFAULT_WORKERS,
                        help="Worker processes for sweeps")
    parser.add_argument("--events", action="store_true",
                        help="Also write the transmission log of the first seed (simulate only)")
    parser.add_argument("--trajectory-trials", type=int, default=0,
                        help="Add the trajectory Monte Carlo cross-check with this many trials (selfcheck only)")
    parser.add_argument("--log-level", type=str, default=config.LOG_LEVEL,
                        help="Logging level (default: WARNING)")
    parser.add_argument("--no-progress", action="store_true",
                        help="Disable progress bars")
    return parser


def main(argv=None):
    """Main execution function; returns the process exit code"""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(asctime)s %(name)s %(levelname)s: %(message)s")

    print("=" * 80)
    print(f"Semantic Scheduling Simulator: {args.command}")
    print("=" * 80)

    try:
        print("\n[1/2] Loading config...")
        experiment = load_experiment(args.config)
        if args.seed is not None:
            experiment = dataclasses.replace(experiment, seeds=(args.seed,))
        out_dir = Path(args.out) if args.out else experiment.output_path
        out_dir.mkdir(parents=True, exist_ok=True)
        print(f"  {experiment.num_sensors} sensors, epsilon={experiment.epsilon}, seeds={list(experiment.seeds)}")

        print(f"\n[2/2] Running {args.command}...")
        if args.command == "bounds":
            cmd_bounds(experiment, out_dir)
        elif args.command == "simulate":
            cmd_simulate(experiment, args.policy, out_dir, write_events=args.events)
        elif args.command == "sweep":
            if not args.grid:
                raise ConfigError("sweep needs --grid path/to/grids.json")
            cmd_sweep(experiment, args.grid, out_dir, workers=args.workers, show_progress=not args.no_progress)
        elif not cmd_selfcheck(experiment, out_dir, trajectory_trials=args.trajectory_trials):
            print("\n❌ Self-check failed")
            return EXIT_NUMERICAL
    except GridTooLarge as e:
        print(f"\n❌ Error: {e}")
        return EXIT_GRID
    except ConfigError as e:
        print(f"\n❌ Error: {e}")
        return EXIT_CONFIG
    except NumericalRejection as e:
        print(f"\n❌ Numerical rejection: {e}")
        return EXIT_NUMERICAL

    print("\n" + "=" * 80)
    print("✅ Done!")
    print(f"📁 Results saved to: {out_dir}")
    print("=" * 80)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
