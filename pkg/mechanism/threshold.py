"""
Threshold Mechanism
Complete-graph fallback: test b once unless V_a already beats every V_b
"""

from typing import Tuple

from mechanism.planner import (ACTION_A, ACTION_B, Message, PlannerState,
                               RecommendationMechanism)
from rewards.distribution import PiecewiseDistribution


class ThresholdMechanism(RecommendationMechanism):
    """
    Agent 1 gets a. If V_a >= x = ess_sup(V_b) everyone gets a; otherwise
    agent 2 gets b and the rest get the revealed argmax. Incentive
    compatible only when E(V_a | V_a < x) <= mu_b.
    """

    kind = 'threshold'

    def __init__(self, vb: PiecewiseDistribution):
        super().__init__(None)
        self.threshold = vb.ess_sup()

    @property
    def explores(self) -> bool:
        return True

    def _recommend(self, state: PlannerState, position: int, agent: int) -> Tuple[Message, str]:
        if position == 1:
            return Message(ACTION_A), 'first'
        va = state.revealed.get(ACTION_A)
        if va is None or va >= self.threshold:
            if state.experiment:
                state.close_exploration(2)
            return Message(ACTION_A), 'post'
        if position == 2:
            state.rho.append(agent)
            return Message(ACTION_B), 'test'
        if state.experiment:
            state.close_exploration(position)
        return Message(state.best_action()), 'post'

    def describe(self):
        return {'kind': self.kind, 'threshold': self.threshold}
