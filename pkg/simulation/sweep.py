"""
Regime Sweep
Metrics over a grid of population sizes and degree exponents
"""

from dataclasses import replace
from itertools import product
from typing import Optional

import pandas as pd

from network.visibility_graph import RegimeSpec
from simulation.scenario import RegimeConfig, Scenario, ScenarioConfig
from simulation.simulation_engine import run_monte_carlo
from utils import console


def sweep_cell_config(config: ScenarioConfig, n_agents: int, alpha: float, beta: float) -> ScenarioConfig:
    """Scenario for one grid cell: a two-tier graph generated for (N, alpha, beta)"""
    graph = replace(config.graph, kind='two_tier', edges=None, path=None, nodes=None)
    return replace(config, name=f"{config.name}-N{n_agents}-a{alpha:g}-b{beta:g}", n_agents=n_agents,
                   graph=graph, regime=RegimeConfig(alpha=alpha, beta=beta), test_positions=None,
                   audit=replace(config.audit, agents=None),
                   arrival=replace(config.arrival, order='identity' if config.arrival.order == 'permutation'
                                   else config.arrival.order, permutation=None))


def sweep(config: ScenarioConfig, replications: Optional[int] = None) -> pd.DataFrame:
    """
    Run the scenario's mechanism on every (N, alpha, beta) grid cell

    Each cell is tagged feasible or infeasible by the regime check of its
    generated graph; infeasible cells are still simulated.

    Args:
        config: Base scenario; its sweep section supplies the grid
        replications: Replications per cell (default: sweep.replications)

    Returns:
        DataFrame, one row per cell
    """
    grid = config.sweep
    replications = replications or grid.replications
    cells = list(product(grid.n_grid, grid.alpha_grid, grid.beta_grid))
    rows = []
    for done, (n_agents, alpha, beta) in enumerate(cells, 1):
        scenario = Scenario(sweep_cell_config(config, n_agents, alpha, beta))
        check = scenario.graph.check_regime(RegimeSpec(alpha, beta))
        metrics, _, _ = run_monte_carlo(scenario, replications=replications)
        rows.append({
            'n_agents': n_agents,
            'alpha': alpha,
            'beta': beta,
            'feasible': check.feasible,
            'n_high': check.n_high,
            'high_cap': check.high_cap,
            'degree_threshold': check.degree_threshold,
            'K': scenario.exploration_cells,
            'avg_reward': metrics.avg_reward,
            'avg_reward_se': metrics.avg_reward_se,
            'fraction_optimal': metrics.fraction_optimal,
            'fraction_optimal_se': metrics.fraction_optimal_se,
            'exploration_end_mean': metrics.exploration_end_mean,
            'exploration_end_max': metrics.exploration_end_max,
            'unfinished_runs': metrics.unfinished_runs,
            'bound_failures': metrics.bound_failures,
        })
        console.progress(done, len(cells), 'Sweep', every=1)
    return pd.DataFrame(rows)
