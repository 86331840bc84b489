"""
Bayesian Agent
Information sets, policy profiles and posterior expected rewards
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from utils.errors import SimulatorError
from mechanism.planner import ACTION_A, ACTION_B, Message
from mechanism.no_visibility import NoVisibilityMechanism
from rewards.distribution import IntervalSet, ZeroMassEvent

COMPLIANT = 'compliant'
BEST_RESPONSE = 'best-response'
DEVIATE = 'deviate-at'

# closed-form gains below this are numerical noise
EXACT_TOLERANCE = 1e-9


class InsufficientSupport(SimulatorError):
    """Too few Monte Carlo runs reproduce the information set"""


def other_action(action: str) -> str:
    return ACTION_B if action == ACTION_A else ACTION_A


@dataclass(frozen=True)
class InfoSet:
    """What an agent knows when choosing: its message and its friends' earlier actions"""

    position: int
    agent: int
    message: Message
    observed: Tuple[Tuple[int, str], ...] = ()

    def signature(self) -> Tuple:
        return (self.message.action, self.message.flag.value, self.observed)

    def describe(self) -> str:
        seen = ",".join(f"{friend}:{action}" for friend, action in self.observed) or '-'
        return f"msg={self.message} seen={seen}"


@dataclass(frozen=True)
class MonteCarloBudget:
    n_outer: int = 20000
    min_matched: int = 200
    z_threshold: float = 3.0
    seed: int = 12345
    max_workers: int = 4


@dataclass
class PosteriorEstimate:
    ev_a: float
    ev_b: float
    matched: int = 0
    se_a: float = 0.0
    se_b: float = 0.0
    se_gain: float = 0.0
    exact: bool = False

    def value(self, action: str) -> float:
        return self.ev_a if action == ACTION_A else self.ev_b


@dataclass
class PolicyProfile:
    """
    Per-agent behaviour; agents not listed comply with their message

    Overrides map an agent to (kind, predicate). A deviate-at agent plays
    the other action whenever the predicate accepts its InfoSet (always,
    when the predicate is None).
    """

    overrides: Dict[int, Tuple[str, Optional[Callable[[InfoSet], bool]]]] = field(default_factory=dict)

    @classmethod
    def compliant(cls) -> 'PolicyProfile':
        return cls()

    def best_responding(self, *agents: int) -> 'PolicyProfile':
        overrides = dict(self.overrides)
        for agent in agents:
            overrides[agent] = (BEST_RESPONSE, None)
        return PolicyProfile(overrides)

    def deviating(self, agent: int, predicate: Optional[Callable[[InfoSet], bool]] = None) -> 'PolicyProfile':
        overrides = dict(self.overrides)
        overrides[agent] = (DEVIATE, predicate)
        return PolicyProfile(overrides)

    def kind_of(self, agent: int) -> str:
        return self.overrides.get(agent, (COMPLIANT, None))[0]

    def is_compliant(self, agent: int) -> bool:
        return agent not in self.overrides

    def all_compliant(self, except_agent: Optional[int] = None) -> bool:
        return all(agent == except_agent for agent in self.overrides)

    def choose(self, info: InfoSet, scenario) -> str:
        kind, predicate = self.overrides.get(info.agent, (COMPLIANT, None))
        if kind == COMPLIANT:
            return info.message.action
        if kind == DEVIATE:
            if predicate is None or predicate(info):
                return other_action(info.message.action)
            return info.message.action
        return scenario.best_response_policy(info)


def _message_event(mechanism: NoVisibilityMechanism, position: int, action: str,
                   full: IntervalSet) -> IntervalSet:
    k = mechanism.test_index(position)
    if k is None:
        return full if action == ACTION_A else IntervalSet()
    event = mechanism.partition.test_event(k)
    return event if action == ACTION_B else full - event


def exact_posterior(info: InfoSet, scenario, profile: Optional[PolicyProfile] = None) -> Optional[PosteriorEstimate]:
    """
    Closed-form posterior for the No Visibility mechanism

    Every exploration-phase message is a V_a event, so the information set
    is an IntervalSet of V_a; argmax messages add the event V_a >= V_b,
    handled through the dominance moments.

    Args:
        info: Information set
        scenario: Built scenario
        profile: Behaviour of the other agents (None = all compliant)

    Returns:
        PosteriorEstimate, or None when no closed form applies
    """
    mechanism = scenario.mechanism
    if not isinstance(mechanism, NoVisibilityMechanism):
        return None
    if profile is not None and not profile.all_compliant(except_agent=info.agent):
        return None
    va, vb = scenario.va, scenario.vb
    heard = info.observed + ((info.agent, info.message.action),)

    if mechanism.partition is None:
        if any(action != ACTION_A for _, action in heard):
            raise ZeroMassEvent(f"Information set {info.describe()} is unreachable")
        return PosteriorEstimate(va.mean(), vb.mean(), exact=True)

    full = va.support()
    event = full
    post_actions = set()
    for friend, action in heard:
        position = scenario.position_of[friend]
        if mechanism.is_post(position):
            post_actions.add(action)
        else:
            event = event & _message_event(mechanism, position, action, full)
    if va.prob(event) <= 0 or len(post_actions) > 1:
        raise ZeroMassEvent(f"Information set {info.describe()} is unreachable")
    if not post_actions:
        return PosteriorEstimate(va.cond_expect(event), vb.mean(), exact=True)

    restricted = va.restrict(event)
    p_ge, ea, eb = restricted.dominance_moments(vb)
    if post_actions == {ACTION_A}:
        if p_ge <= 0:
            raise ZeroMassEvent(f"Information set {info.describe()} is unreachable")
        return PosteriorEstimate(ea / p_ge, eb / p_ge, exact=True)
    q = 1.0 - p_ge
    if q <= 0:
        raise ZeroMassEvent(f"Information set {info.describe()} is unreachable")
    return PosteriorEstimate((restricted.mean() - ea) / q, (vb.mean() - eb) / q, exact=True)


def estimate_from_sample(sample, signature: Tuple, min_matched: int) -> PosteriorEstimate:
    """Posterior means over the sampled runs that reproduce `signature`"""
    mask = np.fromiter((s == signature for s in sample.signatures), dtype=bool, count=len(sample.signatures))
    matched = int(mask.sum())
    if matched < max(min_matched, 2):
        raise InsufficientSupport(f"{matched} matched runs for {signature} (need {min_matched})")
    va, vb = sample.va[mask], sample.vb[mask]
    root = np.sqrt(matched)
    msg = signature[0]
    gain = (vb - va) if msg == ACTION_A else (va - vb)
    return PosteriorEstimate(
        ev_a=float(va.mean()), ev_b=float(vb.mean()), matched=matched,
        se_a=float(va.std(ddof=1) / root), se_b=float(vb.std(ddof=1) / root),
        se_gain=float(gain.std(ddof=1) / root), exact=False,
    )


def posterior_values(info: InfoSet, scenario, mc: MonteCarloBudget,
                     profile: Optional[PolicyProfile] = None, exact: bool = True) -> PosteriorEstimate:
    """
    E[V_a | info] and E[V_b | info]

    Uses the closed form when available, otherwise conditions Monte Carlo
    runs of the scenario on the discrete information signature.

    Raises:
        InsufficientSupport: fewer than mc.min_matched runs match
    """
    if exact:
        estimate = exact_posterior(info, scenario, profile)
        if estimate is not None:
            return estimate
    from simulation.simulation_engine import SimulationEngine

    engine = SimulationEngine(scenario, profile, max_workers=mc.max_workers)
    sample = engine.sample_information(info.agent, mc.n_outer, mc.seed)
    return estimate_from_sample(sample, info.signature(), mc.min_matched)


def decide(info: InfoSet, estimate: PosteriorEstimate, z_threshold: float = 3.0) -> str:
    """Take the other action only when it is better beyond the statistical tolerance"""
    msg = info.message.action
    alternative = other_action(msg)
    diff = estimate.value(alternative) - estimate.value(msg)
    tolerance = EXACT_TOLERANCE if estimate.exact else z_threshold * estimate.se_gain
    return alternative if diff > tolerance else msg


def best_response(info: InfoSet, scenario, mc: MonteCarloBudget,
                  profile: Optional[PolicyProfile] = None) -> str:
    estimate = posterior_values(info, scenario, mc, profile)
    return decide(info, estimate, mc.z_threshold)
