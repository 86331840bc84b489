"""
Incentive Compatibility Auditor
Measures what an agent could gain by ignoring its recommendation
"""

from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from agents.bayesian_agent import (EXACT_TOLERANCE, InfoSet, MonteCarloBudget, PolicyProfile,
                                   estimate_from_sample, exact_posterior, other_action)
from mechanism.planner import Flag, Message
from rewards.distribution import ZeroMassEvent
from simulation.simulation_engine import SimulationEngine, replication_seed
from utils import console

GAIN_COLUMNS = ['agent', 'position', 'agent_class', 'signature', 'matched', 'ev_a', 'ev_b',
                'diff', 'gain', 'stderr', 'exact_diff', 'status']


@dataclass
class GainRow:
    agent: int
    position: int
    agent_class: str
    signature: str
    matched: int
    ev_a: float
    ev_b: float
    diff: float
    gain: float
    stderr: float
    exact_diff: float
    status: str


@dataclass
class AuditResult:
    agent: int
    position: int
    rows: List[GainRow] = field(default_factory=list)

    @property
    def max_gain(self) -> float:
        gains = [r.gain for r in self.rows if r.status != 'insufficient']
        exact = [max(0.0, r.exact_diff) for r in self.rows if not np.isnan(r.exact_diff)]
        return max(gains + exact, default=0.0)

    @property
    def witness(self) -> Optional[GainRow]:
        violations = self.violations
        if violations:
            return max(violations, key=lambda r: r.gain if np.isnan(r.exact_diff) else r.exact_diff)
        return None

    @property
    def violations(self) -> List[GainRow]:
        return [r for r in self.rows if r.status == 'violation']

    @property
    def insufficient(self) -> List[GainRow]:
        return [r for r in self.rows if r.status == 'insufficient']

    @property
    def certified(self) -> bool:
        return not self.violations


def _describe(signature) -> str:
    action, flag, observed = signature
    message = str(Message(action, Flag(flag)))
    seen = ",".join(f"{friend}:{act}" for friend, act in observed) or '-'
    return f"msg={message} seen={seen}"


def deviation_gain(agent: int, scenario, mc: MonteCarloBudget,
                   profile: Optional[PolicyProfile] = None) -> AuditResult:
    """
    Gain from deviating, per reachable information set of `agent`

    Outer runs are truncated at the agent's arrival and grouped by what it
    sees. For every group the gain is E[V_other - V_message | group], with
    its standard error; the closed form is reported next to it when one
    exists. Groups with fewer than mc.min_matched runs are kept and
    flagged as insufficient.

    Args:
        agent: Agent id to audit
        scenario: Built scenario
        mc: Monte Carlo budget (outer runs, matching floor, z threshold, seed)
        profile: Behaviour of the other agents (default: all compliant)

    Returns:
        AuditResult
    """
    engine = SimulationEngine(scenario, profile, max_workers=mc.max_workers)
    sample = engine.sample_information(agent, mc.n_outer, mc.seed)
    groups: Dict = defaultdict(list)
    for i, signature in enumerate(sample.signatures):
        groups[signature].append(i)

    result = AuditResult(agent=agent, position=sample.position)
    for signature in sorted(groups, key=repr):
        members = groups[signature]
        cases = Counter(sample.cases[i] for i in members)
        agent_class = sorted(cases.items(), key=lambda item: (-item[1], item[0]))[0][0]
        message = Message(signature[0], Flag(signature[1]))
        info = InfoSet(sample.position, agent, message, signature[2])
        alternative = other_action(message.action)

        exact_diff = np.nan
        try:
            estimate = exact_posterior(info, scenario, profile)
        except ZeroMassEvent:
            estimate = None
        if estimate is not None:
            exact_diff = estimate.value(alternative) - estimate.value(message.action)

        ev_a = ev_b = diff = stderr = np.nan
        if len(members) >= mc.min_matched:
            mc_estimate = estimate_from_sample(sample, signature, mc.min_matched)
            ev_a, ev_b = mc_estimate.ev_a, mc_estimate.ev_b
            diff = mc_estimate.value(alternative) - mc_estimate.value(message.action)
            stderr = mc_estimate.se_gain

        if not np.isnan(exact_diff):
            status = 'violation' if exact_diff > EXACT_TOLERANCE else 'ok'
        elif np.isnan(diff):
            status = 'insufficient'
        else:
            status = 'violation' if diff > mc.z_threshold * stderr else 'ok'

        result.rows.append(GainRow(
            agent=agent, position=sample.position, agent_class=agent_class,
            signature=_describe(signature), matched=len(members), ev_a=ev_a, ev_b=ev_b,
            diff=diff, gain=max(0.0, diff) if not np.isnan(diff) else np.nan,
            stderr=stderr, exact_diff=exact_diff, status=status,
        ))
    console.log('Audit', f"agent {agent} (position {sample.position}): {len(result.rows)} information sets, "
                         f"max gain {result.max_gain:.4g}, {len(result.violations)} violations", level=2)
    return result


def default_audit_agents(scenario, seed: int, limit: int = 8) -> List[int]:
    """
    First agent of every class seen in one compliant run

    Args:
        scenario: Built scenario
        seed: Master seed; replication 0 is used as the reference run
        limit: Maximum number of agents

    Returns:
        Agent ids in arrival order
    """
    trace = SimulationEngine(scenario).run_once(replication_seed(seed, 0))
    chosen = {}
    for record in trace.records:
        if record.case not in chosen:
            chosen[record.case] = record.agent
    agents = sorted(chosen.values(), key=lambda a: scenario.position_of[a])
    return agents[:limit]


def audit_agents(scenario, agents: Optional[Sequence[int]], mc: MonteCarloBudget,
                 profile: Optional[PolicyProfile] = None) -> List[AuditResult]:
    """Audit each agent in turn (default: one agent per class)"""
    if not agents:
        agents = default_audit_agents(scenario, mc.seed)
    results = []
    for done, agent in enumerate(agents, 1):
        results.append(deviation_gain(agent, scenario, mc, profile))
        console.progress(done, len(agents), 'Audit', every=1)
    return results


def audit_frame(results: Sequence[AuditResult]) -> pd.DataFrame:
    rows = [asdict(row) for result in results for row in result.rows]
    return pd.DataFrame(rows, columns=GAIN_COLUMNS)
