"""
No Visibility Mechanism
Agents see nobody; K tests followed by the revealed argmax
"""

from typing import Optional, Sequence, Tuple

from mechanism.planner import (ACTION_A, ACTION_B, Message, PlannerState,
                               RecommendationMechanism)
from rewards.partition import ExplorationPartition


class NoVisibilityMechanism(RecommendationMechanism):
    """
    Agent 1 gets a; the k-th test position gets b iff V_a in D_0 U D_k;
    every later agent gets the better revealed action.

    Args:
        partition: Exploration partition, or None when no exploration is needed
        test_positions: Ordered arrival positions of the K tests (default 2..K+1)
    """

    kind = 'no_visibility'

    def __init__(self, partition: Optional[ExplorationPartition],
                 test_positions: Optional[Sequence[int]] = None):
        super().__init__(partition)
        K = partition.K if partition else 0
        if test_positions is None:
            test_positions = range(2, K + 2)
        self.test_positions = tuple(int(p) for p in test_positions)
        if len(self.test_positions) != K:
            raise ValueError(f"Need {K} test positions, got {len(self.test_positions)}")
        if any(p < 2 for p in self.test_positions) or list(self.test_positions) != sorted(set(self.test_positions)):
            raise ValueError("Test positions must be increasing and start after agent 1")
        self._test_index = {p: k for k, p in enumerate(self.test_positions, 1)}
        self._events = [partition.test_event(k) for k in range(1, K + 1)] if partition else []
        self.last_test = self.test_positions[-1] if self.test_positions else 1

    def test_index(self, position: int) -> Optional[int]:
        return self._test_index.get(position)

    def is_post(self, position: int) -> bool:
        return position > self.last_test

    def _recommend(self, state: PlannerState, position: int, agent: int) -> Tuple[Message, str]:
        if self.partition is None:
            if state.exploration_end is None:
                state.exploration_end = 0
            state.experiment = False
            return Message(ACTION_A), 'no_exploration'
        if position == 1:
            return Message(ACTION_A), 'first'
        if position <= self.last_test:
            k = self._test_index.get(position)
            if k is None:
                return Message(ACTION_A), 'idle'
            state.k = k
            state.rho.append(agent)
            va = state.revealed.get(ACTION_A)
            if va is not None and self._events[k - 1].contains(va):
                return Message(ACTION_B), 'test'
            return Message(ACTION_A), 'test'
        if state.experiment:
            state.close_exploration(position)
        return Message(state.best_action()), 'post'
