"""
Visibility Networks
Graphs over agents, degree classification and seeded generators
"""

from .visibility_graph import (VisibilityGraph, RegimeSpec, RegimeCheck, Classification,
                               UnknownAgent, power_floor)
from .generators import generate, load_edge_list, InfeasibleParams, GRAPH_KINDS

__all__ = [
    'VisibilityGraph',
    'RegimeSpec',
    'RegimeCheck',
    'Classification',
    'UnknownAgent',
    'power_floor',
    'generate',
    'load_edge_list',
    'InfeasibleParams',
    'GRAPH_KINDS'
]
