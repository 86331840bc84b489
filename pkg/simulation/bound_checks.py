"""
Bound Checks
Compare a finished run against the exploration-length guarantees
"""

from dataclasses import dataclass
from typing import Dict, List

from mechanism.high_visibility import HighVisibilityMechanism
from mechanism.medium_visibility import MediumVisibilityMechanism
from mechanism.no_visibility import NoVisibilityMechanism
from network.visibility_graph import power_floor


@dataclass
class BoundCheck:
    name: str
    measured: float
    bound: float
    applicable: bool = True
    detail: str = ''

    @property
    def slack(self) -> float:
        return self.bound - self.measured

    @property
    def passed(self) -> bool:
        return (not self.applicable) or self.measured <= self.bound

    def to_row(self) -> Dict:
        return {
            'check': self.name, 'measured': self.measured, 'bound': self.bound,
            'slack': self.slack, 'applicable': self.applicable, 'passed': self.passed,
            'detail': self.detail,
        }


@dataclass
class BoundReport:
    checks: List[BoundCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _conservation(trace) -> BoundCheck:
    arrived = len(trace.actions) if trace.actions else trace.n_arrivals
    return BoundCheck('conservation', abs(arrived - trace.n_arrivals), 0,
                      detail='every agent acts exactly once')


def _medium_checks(trace, scenario) -> List[BoundCheck]:
    partition = scenario.mechanism.partition
    N = scenario.n_agents
    alpha = scenario.regime.alpha
    K = partition.K
    degree_ok = scenario.graph.max_degree() <= power_floor(N, alpha)
    bound = 2 * (K - 1) * N ** (2 * alpha)
    applicable = degree_ok and K > 1
    reason = '' if applicable else ('max degree exceeds floor(N^alpha)' if not degree_ok else 'K = 1')
    checks = [BoundCheck('medium_rho_shadow', len(trace.rho) + len(trace.shadow), bound, applicable,
                         reason or '|rho U shadow| <= 2(K-1)N^(2 alpha)')]
    reaches = applicable and N > bound
    checks.append(BoundCheck('medium_k_reaches_K', K - trace.k_final, 0, reaches,
                             'k = K when N > 2(K-1)N^(2 alpha)'))

    rho = set(trace.rho)
    worst = max([len(scenario.graph.neighbors(n) & rho) for n in trace.shadow], default=0)
    checks.append(BoundCheck('shadow_single_tester', worst, 1,
                             detail='each shadow agent neighbours at most one tester'))
    return checks


def _high_checks(trace, scenario) -> List[BoundCheck]:
    mechanism = scenario.mechanism
    partition = mechanism.partition
    N = scenario.n_agents
    alpha, beta = scenario.regime.alpha, scenario.regime.beta
    va, mu_b = scenario.va, scenario.vb.mean()
    mu_a = va.mean()
    K = scenario.exploration_cells
    c = (mu_a - mu_b / 2) / (mu_a - mu_b)

    premise = len(mechanism.high) <= power_floor(N, beta)
    measured = trace.exploration_end if trace.exploration_end is not None else N
    loose = 3 * K * c * N ** (beta + 2 * alpha)
    tight = 2 * (partition.K_prime - 1) * N ** (2 * alpha) + N ** beta + 1
    unfinished = trace.exploration_end is None

    def check(name, bound, detail):
        # an unfinished run only contradicts a bound it outlived
        applicable = premise and (not unfinished or bound < N)
        return BoundCheck(name, measured, bound, applicable, detail if premise else '|S| > floor(N^beta)')

    return [
        check('high_exploration_end', loose, 'exploration_end <= 3K c N^(beta + 2 alpha)'),
        check('high_exploration_end_tight', tight, "exploration_end <= 2(K'-1)N^(2 alpha) + N^beta + 1"),
    ]


def _no_visibility_checks(trace, scenario) -> List[BoundCheck]:
    mechanism = scenario.mechanism
    end = trace.exploration_end if trace.exploration_end is not None else trace.n_arrivals
    applicable = trace.n_arrivals > mechanism.last_test
    return [BoundCheck('no_visibility_exploration_end', end, mechanism.last_test, applicable,
                       'exploration over by the last test position')]


def bound_checks(trace, scenario) -> BoundReport:
    """
    Bound checks for a trace of the scenario's mechanism

    Args:
        trace: RunTrace
        scenario: Built scenario the trace came from

    Returns:
        BoundReport
    """
    checks = [_conservation(trace)]
    mechanism = scenario.mechanism
    if mechanism.partition is None:
        return BoundReport(checks)
    if isinstance(mechanism, MediumVisibilityMechanism):
        checks += _medium_checks(trace, scenario)
    elif isinstance(mechanism, HighVisibilityMechanism):
        checks += _high_checks(trace, scenario)
    elif isinstance(mechanism, NoVisibilityMechanism):
        checks += _no_visibility_checks(trace, scenario)
    return BoundReport(checks)
