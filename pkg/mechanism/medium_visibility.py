"""
Medium Visibility Mechanism
Bounded-degree graphs: tests go to agents outside every tester's 2-neighbourhood
"""

from typing import Optional, Tuple

from mechanism.planner import (ACTION_A, ACTION_B, Message, PlannerState,
                               RecommendationMechanism)
from network.visibility_graph import VisibilityGraph
from rewards.partition import ExplorationPartition


class MediumVisibilityMechanism(RecommendationMechanism):
    """
    An arrival within distance 2 of a tester joins the shadow set and gets a.
    Any other arrival becomes the next tester while k < K; after that
    everyone gets the revealed argmax.
    """

    kind = 'medium'

    def __init__(self, partition: Optional[ExplorationPartition], graph: VisibilityGraph):
        super().__init__(partition)
        self.graph = graph
        self._events = [partition.test_event(k) for k in range(1, partition.K + 1)] if partition else []

    def _recommend(self, state: PlannerState, position: int, agent: int) -> Tuple[Message, str]:
        if self.partition is None:
            if state.exploration_end is None:
                state.exploration_end = 0
            state.experiment = False
            return Message(ACTION_A), 'no_exploration'
        if position == 1:
            return Message(ACTION_A), 'first'
        if state.k < self.partition.K:
            if agent in state.blocked:
                state.shadow.add(agent)
                return Message(ACTION_A), 'shadow'
            state.rho.append(agent)
            state.k += 1
            state.blocked |= self.graph.second_neighborhood((agent,)) - set(state.rho)
            va = state.revealed.get(ACTION_A)
            if va is not None and self._events[state.k - 1].contains(va):
                return Message(ACTION_B), 'test'
            return Message(ACTION_A), 'test'
        if state.experiment:
            state.close_exploration(position)
        return Message(state.best_action()), 'post'
