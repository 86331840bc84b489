"""
Test Network - visibility graphs, classification and generators
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.append(str(Path(__file__).parent))

from network.generators import (InfeasibleParams, bounded_degree_random, generate, load_edge_list,
                                two_tier)
from network.visibility_graph import RegimeSpec, UnknownAgent, VisibilityGraph, power_floor


def test_neighbors_and_degree():
    graph = VisibilityGraph.from_edges(5, [(0, 1), (1, 2), (3, 1)])

    assert graph.neighbors(1) == frozenset({0, 2, 3})
    assert graph.neighbors(1, arrived={0, 4}) == frozenset({0})
    assert graph.degree(1) == 3
    assert graph.degree(4) == 0
    assert graph.max_degree() == 3
    assert graph.edges() == [(0, 1), (1, 2), (1, 3)]
    assert graph.edge_count() == 3


def test_invalid_edges_rejected():
    graph = VisibilityGraph(3)
    with pytest.raises(ValueError):
        graph.add_edge(1, 1)
    with pytest.raises(UnknownAgent):
        graph.add_edge(0, 5)
    with pytest.raises(UnknownAgent):
        graph.neighbors(-1)


def test_numpy_agent_ids_accepted():
    graph = VisibilityGraph(3)
    graph.add_edge(np.int64(0), np.int64(2))
    assert graph.neighbors(np.int64(2)) == frozenset({0})


def test_power_floor():
    assert power_floor(1000, 1 / 3) == 10
    assert power_floor(100, 0.5) == 10
    assert power_floor(60, 0.0) == 1


def test_classify_star():
    star = generate('star', 10, center=0)
    classes = star.classify(0.5)

    assert classes.threshold == 3
    assert classes.high == frozenset({0})
    assert len(classes.low) == 9


def test_second_neighborhood_on_path():
    path = generate('path', 5)

    # the seed is never part of its own 2-neighbourhood
    assert path.second_neighborhood((0,)) == frozenset({1, 2})
    assert path.second_neighborhood((2,)) == frozenset({0, 1, 3, 4})
    assert path.second_neighborhood((1, 2)) == frozenset({0, 3, 4})
    assert path.second_neighborhood((0,), restrict={0, 1}) == frozenset({1})
    assert generate('path', 4).second_neighborhood((0,)) == frozenset({1, 2})


def test_check_regime():
    star = generate('star', 100)
    check = star.check_regime(RegimeSpec(alpha=0.3, beta=0.0))

    assert check.degree_threshold == 3
    assert check.n_high == 1
    assert check.high_cap == 1
    assert check.feasible
    assert not star.check_regime(RegimeSpec(alpha=0.5, beta=0.0)).feasible


def test_complete_graph():
    graph = generate('complete', 6)
    assert graph.edge_count() == 15
    assert graph.max_degree() == 5


def test_bounded_degree_random_respects_cap():
    graph = bounded_degree_random(200, 3, stream=np.random.default_rng(5))
    again = bounded_degree_random(200, 3, stream=np.random.default_rng(5))

    assert graph.max_degree() <= 3
    assert graph.edge_count() > 0
    assert graph.edges() == again.edges()


def test_two_tier_regime():
    graph = two_tier(300, 0.25, 0.3, hub_degree=20, p=0.003, stream=np.random.default_rng(11))
    check = graph.check_regime(RegimeSpec(alpha=0.25, beta=0.3))

    assert check.n_high == 5
    assert check.feasible
    classes = graph.classify(0.25)
    assert all(graph.degree(n) <= 4 for n in classes.low)


def test_infeasible_generator_params():
    with pytest.raises(InfeasibleParams):
        generate('two_tier', 20, alpha=0.3, beta=1.0)
    with pytest.raises(InfeasibleParams):
        generate('hypercube', 20)
    with pytest.raises(InfeasibleParams):
        generate('star', 5, center=7)


def test_load_edge_list(tmp_path):
    edges = tmp_path / "edges.txt"
    edges.write_text("# friends\n0 1\n\n1 2  # trailing comment\n")
    graph = load_edge_list(edges, 4)

    assert graph.n_agents == 4
    assert graph.edges() == [(0, 1), (1, 2)]

    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n2\n")
    with pytest.raises(ValueError, match="line 2"):
        load_edge_list(bad, 4)


if __name__ == '__main__':
    sys.exit(pytest.main([__file__, '-v']))
