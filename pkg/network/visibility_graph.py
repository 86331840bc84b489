"""
Visibility Graph
Who sees whose chosen action, plus the T/S degree classification
"""

import math
import numbers
from dataclasses import dataclass
from typing import Collection, Dict, FrozenSet, Iterable, List, Optional, Tuple

import networkx as nx

from utils.errors import SimulatorError


class UnknownAgent(SimulatorError):
    """Agent id outside 0..N-1"""


@dataclass(frozen=True)
class RegimeSpec:
    """Degree exponent alpha and hub-count exponent beta"""

    alpha: float
    beta: float = 0.0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")


@dataclass(frozen=True)
class Classification:
    """T: degree <= floor(N^alpha); S: the rest"""

    low: FrozenSet[int]
    high: FrozenSet[int]
    threshold: int


@dataclass(frozen=True)
class RegimeCheck:
    feasible: bool
    n_high: int
    high_cap: int
    degree_threshold: int
    exponent_sum: float
    max_degree: int


def power_floor(n: int, exponent: float) -> int:
    """floor(n ** exponent), robust to 1000 ** (1/3) = 9.999..."""
    return int(math.floor(n ** exponent + 1e-9))


class VisibilityGraph:
    """
    Undirected, irreflexive graph on agents 0..N-1

    Args:
        n_agents: Number of agents N
        edges: Optional iterable of (i, j) pairs
    """

    def __init__(self, n_agents: int, edges: Iterable[Tuple[int, int]] = ()):
        if n_agents < 1:
            raise ValueError("A graph needs at least one agent")
        self._graph = nx.Graph()
        self._graph.add_nodes_from(range(n_agents))
        self._adjacency: Optional[Dict[int, FrozenSet[int]]] = None
        for i, j in edges:
            self.add_edge(i, j)

    @classmethod
    def from_edges(cls, n_agents: int, pairs: Iterable[Tuple[int, int]]) -> 'VisibilityGraph':
        return cls(n_agents, pairs)

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> 'VisibilityGraph':
        relabelled = nx.convert_node_labels_to_integers(graph, ordering='sorted')
        relabelled.remove_edges_from(list(nx.selfloop_edges(relabelled)))
        return cls(relabelled.number_of_nodes(), relabelled.edges())

    @property
    def n_agents(self) -> int:
        return self._graph.number_of_nodes()

    @property
    def nx_graph(self) -> nx.Graph:
        return self._graph

    def _check(self, agent: int):
        if not isinstance(agent, numbers.Integral) or not 0 <= agent < self.n_agents:
            raise UnknownAgent(f"Agent {agent!r} not in 0..{self.n_agents - 1}")

    def add_edge(self, i: int, j: int):
        self._check(i)
        self._check(j)
        if i == j:
            raise ValueError(f"Self-loop on agent {i}")
        self._graph.add_edge(i, j)
        self._adjacency = None

    def _adj(self) -> Dict[int, FrozenSet[int]]:
        if self._adjacency is None:
            self._adjacency = {n: frozenset(self._graph.adj[n]) for n in self._graph.nodes}
        return self._adjacency

    def neighbors(self, agent: int, arrived: Optional[Collection[int]] = None) -> FrozenSet[int]:
        """
        B(n), or B^t(n) when `arrived` lists the agents seen so far

        Args:
            agent: Agent id
            arrived: Agents that already arrived

        Returns:
            Frozen set of neighbour ids
        """
        self._check(agent)
        nbrs = self._adj()[agent]
        if arrived is None:
            return nbrs
        return frozenset(n for n in nbrs if n in arrived)

    def degree(self, agent: int) -> int:
        self._check(agent)
        return len(self._adj()[agent])

    def max_degree(self) -> int:
        return max((len(v) for v in self._adj().values()), default=0)

    def edges(self) -> List[Tuple[int, int]]:
        return sorted((min(i, j), max(i, j)) for i, j in self._graph.edges())

    def edge_count(self) -> int:
        return self._graph.number_of_edges()

    def classify(self, alpha: float) -> Classification:
        threshold = power_floor(self.n_agents, alpha)
        adjacency = self._adj()
        low = frozenset(n for n, nbrs in adjacency.items() if len(nbrs) <= threshold)
        high = frozenset(adjacency) - low
        return Classification(low=low, high=high, threshold=threshold)

    def second_neighborhood(self, seed: Iterable[int],
                            restrict: Optional[Collection[int]] = None) -> FrozenSet[int]:
        """
        B_X(seed) U B_X(B_X(seed)) without the seed itself

        B_X(n) = B(n) & X when `restrict` is given.
        """
        adjacency = self._adj()

        def step(nodes):
            out = set()
            for n in nodes:
                nbrs = adjacency[n]
                out |= nbrs if restrict is None else nbrs & restrict
            return out

        seed = set(seed)
        first = step(seed)
        return frozenset((first | step(first)) - seed)

    def check_regime(self, spec: RegimeSpec) -> RegimeCheck:
        classes = self.classify(spec.alpha)
        high_cap = power_floor(self.n_agents, spec.beta)
        exponent_sum = 2 * spec.alpha + spec.beta
        return RegimeCheck(
            feasible=len(classes.high) <= high_cap and exponent_sum < 1,
            n_high=len(classes.high),
            high_cap=high_cap,
            degree_threshold=classes.threshold,
            exponent_sum=exponent_sum,
            max_degree=self.max_degree(),
        )

    def __repr__(self) -> str:
        return f"VisibilityGraph(n_agents={self.n_agents}, edges={self.edge_count()})"
