"""
Planner Core
Messages, planner state and the base class every mechanism extends
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Set, Tuple

import numpy as np

from utils.errors import SimulatorError

ACTION_A = 'a'
ACTION_B = 'b'
ACTIONS = (ACTION_A, ACTION_B)


class OutOfOrderArrival(SimulatorError):
    """Arrival position or agent does not match the planner's expectations"""


class ReplicaExhausted(SimulatorError):
    """More high-degree arrivals than replicas of D_0"""


class Flag(Enum):
    TRUE = 'TRUE'
    FALSE = 'FALSE'
    SPECIAL = 'SPECIAL'
    NONE = 'NONE'


@dataclass(frozen=True)
class Message:
    action: str
    flag: Flag = Flag.NONE

    def __str__(self) -> str:
        if self.flag is Flag.NONE:
            return self.action
        return f"({self.action},{self.flag.value})"


@dataclass
class PlannerState:
    """Everything the planner knows and remembers inside one run"""

    revealed: Dict[str, float] = field(default_factory=dict)
    rho: List[int] = field(default_factory=list)
    shadow: Set[int] = field(default_factory=set)
    blocked: Set[int] = field(default_factory=set)
    arrived: Set[int] = field(default_factory=set)
    k: int = 0
    z: int = 0
    experiment: bool = True
    knowledge: bool = False
    c: str = ACTION_A
    replica_label: int = 0
    next_position: int = 1
    case: str = ''
    exploration_end: Optional[int] = None

    def best_action(self) -> str:
        """argmax over revealed rewards; a when b is unknown or on ties"""
        va = self.revealed.get(ACTION_A)
        vb = self.revealed.get(ACTION_B)
        if vb is None:
            return ACTION_A
        if va is None:
            return ACTION_B
        return ACTION_B if vb > va else ACTION_A

    def close_exploration(self, position: int):
        self.experiment = False
        self.c = self.best_action()
        if self.exploration_end is None:
            self.exploration_end = position - 1


class RecommendationMechanism(ABC):
    """
    Online planner: one message per arrival, rewards revealed after each choice

    Subclasses implement `_recommend`, returning the message and a case
    label naming the branch that produced it.
    """

    kind = 'base'

    def __init__(self, partition=None):
        self.partition = partition

    @property
    def explores(self) -> bool:
        return self.partition is not None

    def new_state(self, stream: Optional[np.random.Generator] = None) -> PlannerState:
        return PlannerState()

    def step(self, state: PlannerState, position: int, agent: int) -> Message:
        """
        Issue the message for the next arrival

        Args:
            state: Planner state of this run (mutated)
            position: 1-based arrival index
            agent: Arriving agent id

        Returns:
            Message for the agent
        """
        if position != state.next_position:
            raise OutOfOrderArrival(f"Expected position {state.next_position}, got {position}")
        if agent in state.arrived:
            raise OutOfOrderArrival(f"Agent {agent} already arrived")
        message, case = self._recommend(state, position, agent)
        state.case = case
        state.arrived.add(agent)
        state.next_position += 1
        return message

    @abstractmethod
    def _recommend(self, state: PlannerState, position: int, agent: int) -> Tuple[Message, str]:
        pass

    def reveal(self, state: PlannerState, agent: int, action: str, reward: float):
        """Record the reward of `action`; later reveals of the same action are ignored"""
        if agent not in state.arrived:
            raise OutOfOrderArrival(f"Agent {agent} has not arrived yet")
        state.revealed.setdefault(action, reward)

    def describe(self) -> Dict:
        return {'kind': self.kind, 'cells': self.partition.K if self.partition else 0}
