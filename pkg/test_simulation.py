"""
Test Simulation - engine, metrics, bound checks, sweep and failure demos
"""

import os
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

sys.path.append(str(Path(__file__).parent))

from agents.bayesian_agent import MonteCarloBudget
from rewards.distribution import PiecewiseDistribution
from simulation.bound_checks import BoundCheck, bound_checks
from simulation.failure_demos import failure_demos
from simulation.performance_metrics import PerformanceCalculator
from simulation.scenario import (ArrivalConfig, GraphConfig, RegimeConfig, Scenario, ScenarioConfig,
                                 SimulationConfig, SweepConfig, build_arrival_order)
from simulation.simulation_engine import SimulationEngine, replication_seed, run_monte_carlo
from simulation.sweep import sweep

UNIT_A = [[0.0, 1.0, 1.0]]
UNIT_B = [[0.0, 0.5, 1.0]]
EXAMPLE_A = [[-3.0, -1.0, 1.0]]
EXAMPLE_B = [[-6.0, 0.0, 1.0]]

# acceptance-scale settings; the default suite runs scaled-down versions
FULL_SCALE = os.environ.get('SIM_FULL_SCALE') == '1'
FULL_N_GRID = [100, 1000, 10_000]
FULL_MEDIUM_N = 10_000
FULL_MEDIUM_RUNS = 100
FULL_EXAMPLE_RUNS = 100_000
FULL_OUTER_RUNS = 100_000

full_scale = pytest.mark.skipif(not FULL_SCALE, reason='set SIM_FULL_SCALE=1 for acceptance-scale runs')


def small_sim(replications=20, seed=12345):
    return SimulationConfig(replications=replications, seed=seed, max_workers=2)


def test_replication_seed_is_stable():
    assert replication_seed(12345, 0) == replication_seed(12345, 0)
    assert replication_seed(12345, 0) != replication_seed(12345, 1)
    assert replication_seed(12345, 0) != replication_seed(54321, 0)


def test_run_once_unit_scenario():
    scenario = Scenario(ScenarioConfig(n_agents=50, dist_a=UNIT_A, dist_b=UNIT_B, simulation=small_sim()))
    trace = SimulationEngine(scenario).run_once(replication_seed(1, 0))

    assert trace.n_arrivals == 50
    assert len(trace.actions) == 50
    assert len(trace.records) == 50
    assert trace.exploration_end == 10
    assert trace.k_final == 9
    assert 0.0 <= trace.fraction_optimal <= 1.0
    # exploitation phase always plays the better revealed action
    post = trace.to_frame().iloc[10:]
    assert (post['case'] == 'post').all()
    assert post['action'].nunique() == 1


def test_same_seed_same_results():
    scenario = Scenario(ScenarioConfig(n_agents=30, dist_a=UNIT_A, dist_b=UNIT_B, simulation=small_sim(10)))
    _, first, _ = run_monte_carlo(scenario)
    _, second, _ = run_monte_carlo(scenario)
    pd.testing.assert_frame_equal(first, second)

    _, other, _ = run_monte_carlo(scenario, master_seed=99)
    assert not np.allclose(first['va'], other['va'])


def test_example_b_better_exactly_one_third():
    prob_a, _, _ = PiecewiseDistribution(EXAMPLE_A).dominance_moments(PiecewiseDistribution(EXAMPLE_B))
    assert 1 - prob_a == pytest.approx(1 / 3, abs=1e-12)


def run_example(replications):
    scenario = Scenario(ScenarioConfig(n_agents=10, dist_a=EXAMPLE_A, dist_b=EXAMPLE_B,
                                       simulation=small_sim(replications, seed=2024)))
    return scenario, run_monte_carlo(scenario)


def test_example_without_exploration():
    scenario, (metrics, rows, checks) = run_example(3000)

    assert scenario.partition is None
    assert metrics.replications == 3000
    # everyone plays a, so a run is optimal exactly when V_a >= V_b
    assert metrics.fraction_optimal == pytest.approx(2 / 3, abs=4 * metrics.fraction_optimal_se)
    assert metrics.fraction_optimal_se == pytest.approx(np.sqrt(2 / 9 / 3000), rel=0.1)
    assert metrics.b_better_rate == pytest.approx(1 - metrics.fraction_optimal, abs=1e-12)
    assert metrics.exploration_end_max == 0
    assert metrics.optimality_ratio is None
    assert metrics.regret_runs == 3000
    assert metrics.bound_failures == 0
    assert set(checks['check']) == {'conservation'}


def test_medium_bounds_hold_on_bounded_degree_graph():
    config = ScenarioConfig(name='medium-test', n_agents=400, mechanism='medium', dist_a=UNIT_A, dist_b=UNIT_B,
                            graph=GraphConfig(kind='bounded_degree_random', cap=3, p=0.005),
                            regime=RegimeConfig(alpha=0.2), arrival=ArrivalConfig(order='shuffle'),
                            simulation=small_sim(10, seed=7))
    scenario = Scenario(config)
    metrics, rows, checks = run_monte_carlo(scenario)

    assert scenario.graph.max_degree() <= 3
    assert metrics.bound_failures == 0
    assert metrics.unfinished_runs == 0
    assert (rows['k'] == scenario.partition.K).all()
    applicable = checks[checks['applicable']]
    assert {'medium_rho_shadow', 'medium_k_reaches_K', 'shadow_single_tester'} <= set(applicable['check'])


def test_high_mechanism_runs_on_two_tier_graph():
    config = ScenarioConfig(name='high-test', n_agents=300, mechanism='high', dist_a=UNIT_A, dist_b=UNIT_B,
                            graph=GraphConfig(kind='two_tier', hub_degree=20, p=0.003),
                            regime=RegimeConfig(alpha=0.25, beta=0.3), simulation=small_sim(5, seed=11))
    scenario = Scenario(config)
    metrics, rows, _ = run_monte_carlo(scenario)

    assert len(scenario.classification.high) == 5
    assert scenario.partition.replica_count == 6
    assert (rows['z'] <= 5).all()
    assert metrics.bound_failures == 0


def test_star_center_last_stalls():
    order = list(range(1, 100)) + [0]
    config = ScenarioConfig(name='star', n_agents=100, mechanism='medium', dist_a=UNIT_A, dist_b=UNIT_B,
                            graph=GraphConfig(kind='star', center=0), regime=RegimeConfig(alpha=0.4),
                            arrival=ArrivalConfig(order='permutation', permutation=order))
    scenario = Scenario(config)
    trace = SimulationEngine(scenario).run_once(replication_seed(0, 0))

    assert trace.k_final == 1
    assert trace.exploration_end is None
    report = bound_checks(trace, scenario)
    assert report.passed
    rho_shadow = next(c for c in report.checks if c.name == 'medium_rho_shadow')
    assert not rho_shadow.applicable


def test_degree_premise_uses_integer_floor():
    # 1000 ** (1/3) rounds just below 10 in floating point
    edges = [[0, leaf] for leaf in range(1, 11)]
    config = ScenarioConfig(name='cube-root', n_agents=1000, mechanism='medium', dist_a=UNIT_A, dist_b=UNIT_B,
                            graph=GraphConfig(kind='inline', edges=edges), regime=RegimeConfig(alpha=1 / 3))
    scenario = Scenario(config)
    trace = SimulationEngine(scenario).run_once(replication_seed(0, 0))
    rho_shadow = next(c for c in bound_checks(trace, scenario).checks if c.name == 'medium_rho_shadow')

    assert scenario.graph.max_degree() == 10
    assert rho_shadow.applicable
    assert rho_shadow.passed


def test_arrival_orders():
    base = ScenarioConfig(n_agents=6)
    assert build_arrival_order(base) == list(range(6))
    shuffled = ScenarioConfig(n_agents=6, arrival=ArrivalConfig(order='shuffle', seed=3))
    assert sorted(build_arrival_order(shuffled)) == list(range(6))
    assert build_arrival_order(shuffled) == build_arrival_order(shuffled)
    with pytest.raises(ValueError):
        build_arrival_order(ScenarioConfig(n_agents=3, arrival=ArrivalConfig(order='permutation',
                                                                             permutation=[0, 0, 1])))


def test_performance_summary():
    rows = pd.DataFrame({
        'avg_reward': [0.5, 0.7], 'fraction_optimal': [1.0, 0.5], 'optimality_ratio': [1.0, np.nan],
        'regret': [np.nan, 0.1], 'exploration_end': [10, np.nan], 'va': [0.6, 0.2], 'vb': [0.1, 0.3],
        'rho': [9, 9], 'shadow': [0, 2],
    })
    checks = pd.DataFrame([BoundCheck('x', 3, 2).to_row(), BoundCheck('x', 1, 2).to_row(),
                           BoundCheck('y', 5, 1, applicable=False).to_row()])
    metrics = PerformanceCalculator.summarize(rows, checks)

    assert metrics.avg_reward == pytest.approx(0.6)
    assert metrics.avg_reward_se == pytest.approx(0.1)
    assert metrics.ratio_runs == 1
    assert metrics.regret == pytest.approx(0.1)
    assert metrics.unfinished_runs == 1
    assert metrics.exploration_end_max == 10
    assert metrics.b_better_rate == pytest.approx(0.5)
    assert metrics.bound_failures == 1
    assert metrics.bound_summary['x']['failed_runs'] == 1
    assert metrics.bound_summary['y']['applicable_runs'] == 0
    assert PerformanceCalculator.standard_error(pd.Series([1.0])) == 0.0


def test_sweep_grid():
    config = ScenarioConfig(name='sweep-test', mechanism='medium', dist_a=UNIT_A, dist_b=UNIT_B,
                            sweep=SweepConfig(n_grid=[60], alpha_grid=[0.2, 0.3], beta_grid=[0.0],
                                              replications=3),
                            simulation=small_sim())
    frame = sweep(config)

    assert len(frame) == 2
    assert list(frame['alpha']) == [0.2, 0.3]
    assert {'feasible', 'n_high', 'K', 'avg_reward', 'bound_failures'} <= set(frame.columns)
    assert (frame['n_high'] == 1).all()
    assert (frame['K'] == 9).all()


def grid_config(n_grid, replications):
    return ScenarioConfig(name='grid', mechanism='high', dist_a=UNIT_A, dist_b=UNIT_B,
                          sweep=SweepConfig(n_grid=n_grid, alpha_grid=[0.1], beta_grid=[0.1],
                                            replications=replications),
                          simulation=small_sim(seed=5))


def assert_loss_shrinks(frame):
    loss = list(1 - frame['fraction_optimal'])
    assert all(later < earlier for earlier, later in zip(loss, loss[1:])), loss
    assert (frame['bound_failures'] == 0).all()


def test_high_suboptimal_share_shrinks_with_population():
    # replication i draws the same V_a, V_b in every cell
    assert_loss_shrinks(sweep(grid_config([100, 300, 1000], replications=20)))


@full_scale
def test_high_suboptimal_share_shrinks_full_grid():
    assert_loss_shrinks(sweep(grid_config(FULL_N_GRID, replications=FULL_MEDIUM_RUNS)))


@full_scale
def test_medium_bound_full_scale():
    config = ScenarioConfig(name='medium-full', n_agents=FULL_MEDIUM_N, mechanism='medium', dist_a=UNIT_A,
                            dist_b=UNIT_B, graph=GraphConfig(kind='bounded_degree_random', cap=15),
                            regime=RegimeConfig(alpha=0.3), arrival=ArrivalConfig(order='shuffle'),
                            simulation=small_sim(FULL_MEDIUM_RUNS, seed=7))
    metrics, rows, checks = run_monte_carlo(Scenario(config))

    assert metrics.bound_failures == 0
    assert checks[checks['check'] == 'medium_rho_shadow']['applicable'].all()


@full_scale
def test_example_full_scale():
    _, (metrics, _, _) = run_example(FULL_EXAMPLE_RUNS)
    assert metrics.fraction_optimal == pytest.approx(2 / 3, abs=0.005)


@full_scale
def test_failure_demos_full_budget():
    budget = MonteCarloBudget(n_outer=FULL_OUTER_RUNS, min_matched=200, z_threshold=3.0, seed=12345, max_workers=4)
    assert all(result.passed for result in failure_demos(budget))


def test_failure_demos_reproduce():
    budget = MonteCarloBudget(n_outer=4000, min_matched=100, z_threshold=4.0, seed=12345, max_workers=2)
    results = failure_demos(budget)

    assert [r.name for r in results] == ['test_set_edge', 'herding_chain', 'star_center_last', 'complete_graph']
    for result in results:
        assert result.passed, (result.name, result.witness)
    herding = results[1]
    assert herding.witness['bystander_gain'] == pytest.approx(0.125, abs=1e-6)
    assert herding.witness['tester_gain'] > 0.3


if __name__ == '__main__':
    sys.exit(pytest.main([__file__, '-v']))
