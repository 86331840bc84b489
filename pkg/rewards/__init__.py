"""
Reward Laws and Exploration Partitions
"""

from .distribution import (Interval, IntervalSet, PiecewiseDistribution,
                           ZeroMassEvent, InvalidDistribution)
from .partition import (ExplorationPartition, ReplicatedPartition, NoExplorationNeeded,
                        PriorOrderViolation, build_partition, build_replicated_partition,
                        verify_partition, k_bounds, kprime_bound, halting_bound, bracket_applies, cell_table,
                        RANDOM_TAG, COMB)

__all__ = [
    'Interval', 'IntervalSet', 'PiecewiseDistribution', 'ZeroMassEvent', 'InvalidDistribution',
    'ExplorationPartition', 'ReplicatedPartition', 'NoExplorationNeeded', 'PriorOrderViolation',
    'build_partition', 'build_replicated_partition', 'verify_partition', 'k_bounds',
    'kprime_bound', 'halting_bound', 'bracket_applies', 'cell_table', 'RANDOM_TAG', 'COMB'
]
