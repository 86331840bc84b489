"""
Graph Generators
Deterministic (seeded) visibility graphs for the simulation regimes
"""

from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from utils.errors import SimulatorError
from network.visibility_graph import VisibilityGraph, power_floor

GRAPH_KINDS = ('empty', 'complete', 'star', 'path', 'bounded_degree_random', 'two_tier')


class InfeasibleParams(SimulatorError):
    """Generator parameters cannot produce the requested graph"""


def _seed_from(stream: Optional[np.random.Generator]) -> int:
    if stream is None:
        stream = np.random.default_rng(0)
    return int(stream.integers(2 ** 31 - 1))


def _capped_fill(n_agents: int, candidates: List[Tuple[int, int]], degree: np.ndarray,
                 cap: int, stream: np.random.Generator, graph: VisibilityGraph):
    """Add shuffled candidate edges while both endpoints stay within the cap"""
    order = stream.permutation(len(candidates))
    for idx in order:
        i, j = candidates[idx]
        if degree[i] < cap and degree[j] < cap:
            graph.add_edge(i, j)
            degree[i] += 1
            degree[j] += 1


def bounded_degree_random(n_agents: int, cap: int, p: Optional[float] = None,
                          stream: Optional[np.random.Generator] = None) -> VisibilityGraph:
    """
    Erdos-Renyi candidate edges, kept only while both degrees are below `cap`

    Args:
        n_agents: Number of agents
        cap: Maximum degree
        p: Candidate edge probability (default cap / (N - 1))
        stream: Random generator

    Returns:
        VisibilityGraph with max degree <= cap
    """
    if cap < 0:
        raise InfeasibleParams(f"Degree cap {cap} must be non-negative")
    if p is None:
        p = min(1.0, cap / max(n_agents - 1, 1))
    if not 0.0 <= p <= 1.0:
        raise InfeasibleParams(f"Edge probability {p} outside [0, 1]")
    stream = stream if stream is not None else np.random.default_rng(0)
    candidates = list(nx.fast_gnp_random_graph(n_agents, p, seed=_seed_from(stream)).edges())
    graph = VisibilityGraph(n_agents)
    _capped_fill(n_agents, candidates, np.zeros(n_agents, dtype=int), cap, stream, graph)
    return graph


def two_tier(n_agents: int, alpha: float, beta: float, hub_degree: Optional[int] = None,
             p: Optional[float] = None, stream: Optional[np.random.Generator] = None) -> VisibilityGraph:
    """
    floor(N^beta) hubs of large degree over a floor(N^alpha)-capped low tier

    Hubs link to each other and to up to `hub_degree` low-tier agents that
    still have room under the cap; the low tier is then filled as in
    bounded_degree_random.
    """
    cap = power_floor(n_agents, alpha)
    n_hubs = power_floor(n_agents, beta)
    if n_hubs >= n_agents:
        raise InfeasibleParams(f"{n_hubs} hubs leave no low-tier agents among {n_agents}")
    if cap < 1:
        raise InfeasibleParams("Degree cap floor(N^alpha) must be at least 1")
    if hub_degree is None:
        hub_degree = n_agents - 1
    stream = stream if stream is not None else np.random.default_rng(0)

    graph = VisibilityGraph(n_agents)
    hubs = sorted(int(h) for h in stream.choice(n_agents, size=n_hubs, replace=False))
    hub_set = set(hubs)
    low = [n for n in range(n_agents) if n not in hub_set]
    degree = np.zeros(n_agents, dtype=int)

    for a, hub in enumerate(hubs):
        for other in hubs[a + 1:]:
            graph.add_edge(hub, other)
    for hub in hubs:
        linked = 0
        for idx in stream.permutation(len(low)):
            if linked >= hub_degree:
                break
            agent = low[idx]
            if degree[agent] < cap:
                graph.add_edge(hub, agent)
                degree[agent] += 1
                linked += 1

    if p is None:
        p = min(1.0, cap / max(len(low) - 1, 1))
    tier = nx.fast_gnp_random_graph(len(low), p, seed=_seed_from(stream))
    candidates = [(low[i], low[j]) for i, j in tier.edges()]
    _capped_fill(n_agents, candidates, degree, cap, stream, graph)
    return graph


def star(n_agents: int, center: int = 0) -> VisibilityGraph:
    if not 0 <= center < n_agents:
        raise InfeasibleParams(f"Star center {center} not in 0..{n_agents - 1}")
    return VisibilityGraph(n_agents, [(center, j) for j in range(n_agents) if j != center])


def path(n_agents: int, nodes: Optional[Sequence[int]] = None) -> VisibilityGraph:
    nodes = list(range(n_agents)) if nodes is None else list(nodes)
    return VisibilityGraph(n_agents, zip(nodes, nodes[1:]))


def generate(kind: str, n_agents: int, stream: Optional[np.random.Generator] = None,
             **params) -> VisibilityGraph:
    """
    Build a graph of the given kind

    Args:
        kind: One of GRAPH_KINDS
        n_agents: Number of agents
        stream: Random generator for the random kinds
        **params: Kind-specific parameters (center, nodes, cap, alpha, beta, p, hub_degree)

    Returns:
        VisibilityGraph
    """
    if n_agents < 1:
        raise InfeasibleParams("n_agents must be positive")
    if kind == 'empty':
        return VisibilityGraph(n_agents)
    if kind == 'complete':
        return VisibilityGraph.from_networkx(nx.complete_graph(n_agents))
    if kind == 'star':
        return star(n_agents, params.get('center', 0))
    if kind == 'path':
        return path(n_agents, params.get('nodes'))
    if kind == 'bounded_degree_random':
        cap = params.get('cap')
        if cap is None:
            if params.get('alpha') is None:
                raise InfeasibleParams("bounded_degree_random needs 'cap' or 'alpha'")
            cap = power_floor(n_agents, params['alpha'])
        return bounded_degree_random(n_agents, cap, params.get('p'), stream)
    if kind == 'two_tier':
        if params.get('alpha') is None:
            raise InfeasibleParams("two_tier needs 'alpha'")
        return two_tier(n_agents, params['alpha'], params.get('beta', 0.0),
                        params.get('hub_degree'), params.get('p'), stream)
    raise InfeasibleParams(f"Unknown graph kind '{kind}'")


def load_edge_list(path_name, n_agents: Optional[int] = None) -> VisibilityGraph:
    """
    Read 'i j' pairs, one per line, 0-indexed; '#' starts a comment

    Raises:
        ValueError: on a malformed line, naming the line number
    """
    pairs = []
    for number, raw in enumerate(Path(path_name).read_text().splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ValueError(f"{path_name}: line {number}: expected 'i j', got {raw!r}")
        try:
            pairs.append((int(fields[0]), int(fields[1])))
        except ValueError:
            raise ValueError(f"{path_name}: line {number}: agent ids must be integers")
    if n_agents is None:
        n_agents = 1 + max((max(p) for p in pairs), default=0)
    return VisibilityGraph(n_agents, pairs)
