"""
Recommendation Mechanisms
Planner state machines and the factory that wires them to a scenario
"""

from typing import Optional, Sequence

from .planner import (ACTION_A, ACTION_B, ACTIONS, Flag, Message, PlannerState,
                      RecommendationMechanism, OutOfOrderArrival, ReplicaExhausted)
from .no_visibility import NoVisibilityMechanism
from .medium_visibility import MediumVisibilityMechanism
from .high_visibility import HighVisibilityMechanism
from .threshold import ThresholdMechanism

from network.visibility_graph import Classification, VisibilityGraph
from rewards.distribution import PiecewiseDistribution
from rewards.partition import (RANDOM_TAG, NoExplorationNeeded, build_partition,
                               build_replicated_partition)

MECHANISM_KINDS = ('no_visibility', 'medium', 'high', 'threshold')


def build_mechanism(kind: str, va: PiecewiseDistribution, vb: PiecewiseDistribution,
                    graph: VisibilityGraph, classification: Optional[Classification] = None,
                    replica_count: Optional[int] = None, replica_mode: str = RANDOM_TAG,
                    tol: float = 1e-9, xtol: float = 1e-10, granularity: int = 512,
                    test_positions: Optional[Sequence[int]] = None) -> RecommendationMechanism:
    """
    Build the partition a mechanism needs and the mechanism itself

    Args:
        kind: One of MECHANISM_KINDS
        va: Law of the a-priori better action
        vb: Law of the other action
        graph: Visibility graph
        classification: T/S split (required for 'high')
        replica_count: Replicas of D_0 for 'high' (default |S| + 1)
        replica_mode: 'random-tag' or 'comb'
        tol: Partition halting tolerance
        xtol: Bisection tolerance
        granularity: Micro-cells per replica in comb mode
        test_positions: Explicit No Visibility test positions

    Returns:
        RecommendationMechanism
    """
    if kind == 'threshold':
        return ThresholdMechanism(vb)

    mu_b = vb.mean()
    if kind == 'high':
        if classification is None:
            raise ValueError("High Visibility needs a T/S classification")
        if replica_count is None:
            replica_count = len(classification.high) + 1
        try:
            partition = build_replicated_partition(va, mu_b, replica_count, replica_mode,
                                                   tol, xtol, granularity)
        except NoExplorationNeeded:
            partition = None
        return HighVisibilityMechanism(partition, graph, classification)

    try:
        partition = build_partition(va, mu_b, tol, xtol)
    except NoExplorationNeeded:
        partition = None
    if kind == 'no_visibility':
        return NoVisibilityMechanism(partition, test_positions if partition else None)
    if kind == 'medium':
        return MediumVisibilityMechanism(partition, graph)
    raise ValueError(f"Unknown mechanism '{kind}'")


__all__ = [
    'ACTION_A', 'ACTION_B', 'ACTIONS', 'Flag', 'Message', 'PlannerState',
    'RecommendationMechanism', 'OutOfOrderArrival', 'ReplicaExhausted',
    'NoVisibilityMechanism', 'MediumVisibilityMechanism', 'HighVisibilityMechanism',
    'ThresholdMechanism', 'build_mechanism', 'MECHANISM_KINDS'
]
