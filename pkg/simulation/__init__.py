"""
Simulation Framework
Seeded replications of a scenario, with welfare metrics and bound checks
"""

from .simulation_engine import SimulationEngine, RunTrace, run_once, run_monte_carlo, replication_seed
from .scenario import Scenario, ScenarioConfig
from .performance_metrics import PerformanceCalculator, Metrics
from .bound_checks import bound_checks, BoundCheck, BoundReport

__all__ = [
    'SimulationEngine',
    'RunTrace',
    'run_once',
    'run_monte_carlo',
    'replication_seed',
    'Scenario',
    'ScenarioConfig',
    'PerformanceCalculator',
    'Metrics',
    'bound_checks',
    'BoundCheck',
    'BoundReport'
]
