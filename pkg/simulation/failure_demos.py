"""
Failure Demonstrations
Canned scenarios where a naive mechanism loses incentive compatibility or stalls
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from agents.bayesian_agent import MonteCarloBudget, PolicyProfile
from agents.ic_auditor import AuditResult, deviation_gain
from network.visibility_graph import power_floor
from simulation.scenario import (ArrivalConfig, GraphConfig, RegimeConfig, Scenario,
                                 ScenarioConfig)
from simulation.simulation_engine import SimulationEngine, replication_seed
from utils import console
from utils.errors import SimulatorError

UNIT_A = [[0.0, 1.0, 1.0]]
UNIT_B = [[0.0, 0.5, 1.0]]
# E(V_a | V_a < ess_sup V_b) = 0.45 exceeds mu_b = 0.145
SKEWED_B = [[0.0, 0.2, 0.9], [0.2, 0.9, 0.1]]

COMPLETE_N = 50


class DemoFailed(SimulatorError):
    """A failure demonstration did not reproduce its pathology"""


@dataclass
class DemoResult:
    name: str
    passed: bool
    detail: str
    witness: Dict = field(default_factory=dict)


def _find(result: AuditResult, signature: str):
    return next((row for row in result.rows if row.signature == signature), None)


def _test_set_edge(mc: MonteCarloBudget) -> DemoResult:
    """Two consecutive testers who see each other: the second learns V_a is in D_2"""
    config = ScenarioConfig(name='test-set-edge', n_agents=12, mechanism='no_visibility',
                            dist_a=UNIT_A, dist_b=UNIT_B,
                            graph=GraphConfig(kind='inline', edges=[[1, 2]]))
    scenario = Scenario(config)
    expected = scenario.va.cond_expect(scenario.partition.cells[1]) - scenario.mu_b
    result = deviation_gain(2, scenario, mc)
    row = _find(result, 'msg=b seen=1:a')
    passed = (row is not None and row.status == 'violation'
              and abs(row.exact_diff - expected) < 1e-9
              and (row.matched < mc.min_matched or abs(row.diff - expected) <= mc.z_threshold * row.stderr))
    witness = {'agent': 2, 'position': 3, 'expected_gain': expected}
    if row is not None:
        witness.update(exact_gain=row.exact_diff, mc_gain=row.diff, stderr=row.stderr, matched=row.matched)
    return DemoResult('test_set_edge', passed, 'tester seeing the previous tester plays a on b', witness)


def _herding_chain(mc: MonteCarloBudget) -> DemoResult:
    """
    Testers i, j and k with a best-responding bystander v in between

    v herds on b only when both i and j played b, so k, seeing v play a,
    learns V_a is in its own test cell.
    """
    K = 9
    positions = [2, 3] + list(range(5, K + 3))
    config = ScenarioConfig(name='herding-chain', n_agents=K + 5, mechanism='no_visibility',
                            dist_a=UNIT_A, dist_b=UNIT_B, test_positions=positions,
                            graph=GraphConfig(kind='inline', edges=[[1, 3], [2, 3], [3, 4]]))
    scenario = Scenario(config)
    profile = PolicyProfile.compliant().best_responding(3)
    herd = deviation_gain(3, scenario, mc)
    herd_row = _find(herd, 'msg=a seen=1:b,2:b')
    result = deviation_gain(4, scenario, mc, profile)
    row = _find(result, 'msg=b seen=3:a')
    passed = (row is not None and row.status == 'violation'
              and herd_row is not None and herd_row.status == 'violation')
    witness = {'bystander': 3, 'tester': 4}
    if herd_row is not None:
        witness['bystander_gain'] = herd_row.exact_diff
    if row is not None:
        witness.update(tester_gain=row.diff, stderr=row.stderr, matched=row.matched)
    return DemoResult('herding_chain', passed, 'bystander herds, later tester deviates', witness)


def _star_center_last(n_agents: int = 100) -> DemoResult:
    """Medium mechanism on a star whose center arrives last: one tester blocks everyone"""
    order = list(range(1, n_agents)) + [0]
    config = ScenarioConfig(name='star-center-last', n_agents=n_agents, mechanism='medium',
                            dist_a=UNIT_A, dist_b=UNIT_B, graph=GraphConfig(kind='star', center=0),
                            regime=RegimeConfig(alpha=0.4),
                            arrival=ArrivalConfig(order='permutation', permutation=order))
    scenario = Scenario(config)
    trace = SimulationEngine(scenario).run_once(replication_seed(config.simulation.seed, 0))
    K = scenario.partition.K
    alpha = config.regime.alpha
    guard = 2 * (K - 1) * n_agents ** (2 * alpha)
    passed = trace.k_final < K and trace.exploration_end is None
    witness = {'k_final': trace.k_final, 'K': K, 'shadow': len(trace.shadow),
               'max_degree': scenario.graph.max_degree(), 'degree_cap': power_floor(n_agents, alpha),
               'guard': guard}
    return DemoResult('star_center_last', passed, 'exploration stalls after one tester', witness)


def _complete_graph(mc: MonteCarloBudget) -> DemoResult:
    """
    Every mechanism on the complete graph

    No Visibility leaks the test cell, Medium and High never finish
    exploring, and the threshold mechanism is incentive compatible only
    when E(V_a | V_a < ess_sup V_b) <= mu_b.
    """
    def build(mechanism, dist_b=SKEWED_B, **extra):
        return Scenario(ScenarioConfig(name=f'complete-{mechanism}', n_agents=COMPLETE_N, mechanism=mechanism,
                                       dist_a=UNIT_A, dist_b=dist_b, graph=GraphConfig(kind='complete'),
                                       **extra))

    witness = {}
    no_vis = deviation_gain(2, build('no_visibility'), mc)
    witness['no_visibility_gain'] = no_vis.max_gain

    medium = build('medium')
    trace = SimulationEngine(medium).run_once(replication_seed(mc.seed, 0))
    witness['medium_k'] = trace.k_final
    witness['medium_K'] = medium.partition.K

    high = build('high', regime=RegimeConfig(alpha=0.4, beta=1.0))
    trace_high = SimulationEngine(high).run_once(replication_seed(mc.seed, 0))
    witness['high_k'] = trace_high.k_final
    witness['high_K_prime'] = high.partition.K_prime

    skewed = deviation_gain(1, build('threshold'), mc)
    witness['threshold_gain'] = skewed.max_gain
    boundary = build('threshold', dist_b=UNIT_B)
    boundary_results = [deviation_gain(agent, boundary, mc) for agent in (1, 2)]
    witness['threshold_boundary_gain'] = max(r.max_gain for r in boundary_results)

    passed = (not no_vis.certified
              and trace.k_final < medium.partition.K and trace.exploration_end is None
              and trace_high.k_final < high.partition.K_prime and trace_high.exploration_end is None
              and not skewed.certified
              and all(r.certified for r in boundary_results))
    return DemoResult('complete_graph', passed, 'no mechanism both explores and stays incentive compatible',
                      witness)


def failure_demos(mc: Optional[MonteCarloBudget] = None, raise_on_failure: bool = False) -> List[DemoResult]:
    """
    Run the four failure demonstrations

    Args:
        mc: Monte Carlo budget for the audits
        raise_on_failure: Raise DemoFailed on the first demo that does not reproduce

    Returns:
        List of DemoResult
    """
    mc = mc or MonteCarloBudget()
    demos = [
        lambda: _test_set_edge(mc),
        lambda: _herding_chain(mc),
        _star_center_last,
        lambda: _complete_graph(mc),
    ]
    results = []
    for done, demo in enumerate(demos, 1):
        result = demo()
        console.log('Demo', f"{result.name}: {'reproduced' if result.passed else 'NOT reproduced'}")
        if not result.passed and raise_on_failure:
            raise DemoFailed(f"{result.name}: {result.witness}")
        results.append(result)
        console.progress(done, len(demos), 'Demo', every=1)
    return results
