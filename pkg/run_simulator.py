"""
Run Simulator - command-line interface for the explore/exploit simulator

Usage:
    python run_simulator.py partition
    python run_simulator.py simulate --config scenarios/medium.yaml --out results.csv
    python run_simulator.py audit --config scenarios/high.yaml --format structured --out -
    python run_simulator.py sweep --config scenarios/high.yaml
    python run_simulator.py demo-failures
    python run_simulator.py check-bounds --config scenarios/medium.yaml --seed 7
"""

import argparse
import json
import sys
from pathlib import Path

import pandas as pd

sys.path.append(str(Path(__file__).parent))

from agents.ic_auditor import audit_agents, audit_frame
from network.generators import InfeasibleParams
from rewards.distribution import PiecewiseDistribution
from rewards.partition import (NoExplorationNeeded, PriorOrderViolation, build_partition,
                               build_replicated_partition, cell_table, halting_bound, k_bounds,
                               verify_partition)
from simulation.failure_demos import failure_demos
from simulation.performance_metrics import PerformanceCalculator
from simulation.scenario import Scenario
from simulation.simulation_engine import SimulationEngine, replication_seed, run_monte_carlo
from simulation.sweep import sweep
from utils import console
from utils.config_helper import ConfigError, load_scenario
from utils.errors import SimulatorError
from utils.storage import StorageManager

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

CELL_COLUMNS = ['cell', 'lo', 'hi', 'mass', 'cond_mean', 'residual']


def cmd_partition(config, args, storage: StorageManager) -> int:
    va = PiecewiseDistribution(config.dist_a)
    mu_b = PiecewiseDistribution(config.dist_b).mean()
    tol = config.tolerances
    try:
        if args.replicas:
            partition = build_replicated_partition(va, mu_b, args.replicas, config.replica.mode,
                                                   tol.partition, tol.bisection, config.replica.granularity)
        else:
            partition = build_partition(va, mu_b, tol.partition, tol.bisection)
    except NoExplorationNeeded as e:
        console.log('Partition', f"no exploration needed: {e}")
        storage.save(pd.DataFrame(columns=CELL_COLUMNS), 'partition', args.format,
                     {'K': 0, 'exploration_needed': False})
        return EXIT_OK

    report = verify_partition(partition, va, tol.partition, tol.comb)
    bounds = k_bounds(va, mu_b)
    bracket = f"{bounds[0]}..{bounds[1]}" if bounds else 'n/a'
    console.log('Partition', f"K={partition.K} (bounds {bracket}), verification "
                             f"{'passed' if report.passed else 'FAILED'}")
    for check in report.failures():
        console.log('Partition', f"  {check.name}: residual {check.residual:.3g} > {check.tolerance:.3g}")
    extra = {
        'K': partition.K,
        'k_bounds': list(bounds) if bounds else None,
        'halting_bound': halting_bound(va, mu_b),
        'mu_b': mu_b,
        'replicas': args.replicas or 1,
        'verification': report.to_frame().to_dict(orient='records'),
        'exploration_needed': True,
    }
    storage.save(cell_table(partition, va), 'partition', args.format, extra)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_simulate(config, args, storage: StorageManager) -> int:
    scenario = Scenario(config)
    metrics, rows, _ = run_monte_carlo(scenario)
    PerformanceCalculator.print_report(metrics, f"SIMULATION REPORT: {config.name}")
    storage.save(rows, 'replications', args.format, {'metrics': metrics.to_dict()})
    if args.summary:
        storage.save_report(metrics.to_dict(), args.summary)
    if args.trace:
        trace = SimulationEngine(scenario).run_once(replication_seed(config.simulation.seed, 0))
        storage.save_table(trace.to_frame(), 'trace', args.trace)
    return EXIT_OK if metrics.bound_failures == 0 else EXIT_FAILED


def cmd_check_bounds(config, args, storage: StorageManager) -> int:
    scenario = Scenario(config)
    metrics, _, checks = run_monte_carlo(scenario)
    for name, item in metrics.bound_summary.items():
        console.log('Bounds', f"{name}: {item['failed_runs']} failed of {item['applicable_runs']} applicable, "
                              f"bound {item['bound']:.6g}")
    storage.save(checks, 'bounds', args.format, {'summary': metrics.bound_summary})
    return EXIT_OK if metrics.bound_failures == 0 else EXIT_FAILED


def cmd_audit(config, args, storage: StorageManager) -> int:
    scenario = Scenario(config)
    results = audit_agents(scenario, config.audit.agents, config.audit_budget())
    frame = audit_frame(results)
    violations = [r for result in results for r in result.violations]
    for result in results:
        console.log('Audit', f"agent {result.agent}: max gain {result.max_gain:.4g}, "
                             f"{len(result.violations)} violations, {len(result.insufficient)} insufficient")
    extra = {'certified': not violations, 'agents': [r.agent for r in results]}
    storage.save(frame, 'audit', args.format, extra)
    if args.expect_ic and violations:
        return EXIT_FAILED
    return EXIT_OK


def cmd_sweep(config, args, storage: StorageManager) -> int:
    frame = sweep(config)
    storage.save(frame, 'sweep', args.format)
    return EXIT_OK if int(frame['bound_failures'].sum()) == 0 else EXIT_FAILED


def cmd_demo_failures(config, args, storage: StorageManager) -> int:
    results = failure_demos(config.audit_budget())
    frame = pd.DataFrame([{
        'demo': r.name, 'reproduced': r.passed, 'detail': r.detail,
        'witness': json.dumps(r.witness, sort_keys=True, default=float),
    } for r in results])
    storage.save(frame, 'demos', args.format)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


COMMANDS = {
    'partition': cmd_partition,
    'simulate': cmd_simulate,
    'audit': cmd_audit,
    'sweep': cmd_sweep,
    'demo-failures': cmd_demo_failures,
    'check-bounds': cmd_check_bounds,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, help='Scenario YAML (default: config.yaml)')
    common.add_argument('--seed', type=int, help='Override simulation.seed')
    common.add_argument('--out', type=str, default='-', help="Output file, '-' for stdout (default: -)")
    common.add_argument('--format', choices=['csv', 'structured'], default='csv', help='Output format')
    common.add_argument('-v', '--verbose', action='store_true', help='More console detail')
    common.add_argument('-q', '--quiet', action='store_true', help='No console output')

    parser = argparse.ArgumentParser(description='Explore/exploit recommendation mechanisms on visibility graphs')
    sub = parser.add_subparsers(dest='command', required=True)
    partition = sub.add_parser('partition', parents=[common], help='Build and verify the exploration partition')
    partition.add_argument('--replicas', type=int, help='Build the replicated partition with this many replicas')
    simulate = sub.add_parser('simulate', parents=[common], help='Replicate the scenario and report metrics')
    simulate.add_argument('--summary', type=str, help='Also write the aggregate metrics as JSON here')
    simulate.add_argument('--trace', type=str, help='Also write the per-arrival trace of replication 0 here')
    audit = sub.add_parser('audit', parents=[common], help='Measure deviation gains')
    audit.add_argument('--expect-ic', action='store_true', help='Exit 1 when any violation is found')
    sub.add_parser('sweep', parents=[common], help='Metrics over the N / alpha / beta grid')
    sub.add_parser('demo-failures', parents=[common], help='Reproduce the incentive failures')
    sub.add_parser('check-bounds', parents=[common], help='Check exploration-length bounds')
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    console.set_verbosity(0 if args.quiet else 2 if args.verbose else 1)

    try:
        if getattr(args, 'replicas', None) is not None and args.replicas < 1:
            raise ConfigError("must be at least 1", field='--replicas')
        config = load_scenario(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("must be non-negative", field='--seed')
            config = config.with_seed(args.seed)
        console.banner(f"{args.command.upper()}: {config.name}")
        return COMMANDS[args.command](config, args, StorageManager(args.out))
    except (ConfigError, InfeasibleParams, PriorOrderViolation) as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulatorError as e:
        print(f"Simulation error: {e}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == '__main__':
    try:
        exit_code = main()
        sys.exit(exit_code)
    except KeyboardInterrupt:
        print("\n\nSimulation cancelled by user", file=sys.stderr)
        sys.exit(1)
    except Exception as e:
        print(f"\nError running simulator: {e}", file=sys.stderr)
        import traceback
        traceback.print_exc()
        sys.exit(1)
