"""
High Visibility Mechanism
Few hubs of unbounded degree over a bounded-degree tier, with replicated D_0
"""

from typing import Optional, Tuple

import numpy as np

from mechanism.planner import (ACTION_A, ACTION_B, Flag, Message, PlannerState,
                               RecommendationMechanism, ReplicaExhausted)
from network.visibility_graph import Classification, VisibilityGraph
from rewards.partition import RANDOM_TAG, ReplicatedPartition


class HighVisibilityMechanism(RecommendationMechanism):
    """
    Messages carry a flag: TRUE while exploring, FALSE once the planner has
    settled on c, SPECIAL for the one forced b at the end of the tests.

    Each S arrival moves the replica index z forward. T arrivals outside the
    T-restricted 2-neighbourhood of the testers are tested against
    D_0^z U D_k; a b-recommendation (or SPECIAL) sets knowledge, and the next
    eligible arrival closes the experiment.
    """

    kind = 'high'

    def __init__(self, partition: Optional[ReplicatedPartition], graph: VisibilityGraph,
                 classification: Classification):
        super().__init__(partition)
        self.graph = graph
        self.classification = classification
        self.low = classification.low
        self.high = classification.high

    def new_state(self, stream: Optional[np.random.Generator] = None) -> PlannerState:
        state = PlannerState()
        if self.partition is not None and self.partition.mode == RANDOM_TAG and stream is not None:
            state.replica_label = int(stream.integers(self.partition.replica_count))
        return state

    def _settled(self, state: PlannerState, position: int, case: str) -> Tuple[Message, str]:
        state.close_exploration(position)
        return Message(state.c, Flag.FALSE), case

    def _recommend(self, state: PlannerState, position: int, agent: int) -> Tuple[Message, str]:
        partition = self.partition
        if partition is None:
            if state.exploration_end is None:
                state.exploration_end = 0
            state.experiment = False
            return Message(ACTION_A, Flag.TRUE), 'no_exploration'
        if position == 1:
            return Message(ACTION_A, Flag.TRUE), 'first'
        if not state.experiment:
            state.c = state.best_action()
            return Message(state.c, Flag.FALSE), 'post'

        if state.k < partition.K_prime:
            if agent in self.high:
                state.z += 1
                if state.knowledge:
                    return self._settled(state, position, 's_knowledge')
                if state.z > partition.replica_count - 1:
                    raise ReplicaExhausted(
                        f"S arrival {state.z} needs replica {state.z} of {partition.replica_count}")
                return Message(ACTION_A, Flag.TRUE), 's_no_knowledge'
            if agent in state.blocked:
                state.shadow.add(agent)
                return Message(ACTION_A, Flag.TRUE), 't_blocked'
            state.rho.append(agent)
            state.k += 1
            state.blocked |= self.graph.second_neighborhood((agent,), self.low) - set(state.rho)
            va = state.revealed.get(ACTION_A)
            if va is not None and (partition.in_replica(state.z, va, state.replica_label)
                                   or partition.cells[state.k - 1].contains(va)):
                state.knowledge = True
                return Message(ACTION_B, Flag.TRUE), 't_rho'
            return Message(ACTION_A, Flag.TRUE), 't_rho'

        if state.knowledge:
            return self._settled(state, position, 'close')
        state.knowledge = True
        return Message(ACTION_B, Flag.SPECIAL), 'special'
