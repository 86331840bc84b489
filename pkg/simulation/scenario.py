"""
Scenario
Configuration records and the built objects a simulation runs on
"""

import threading
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, List, Optional

import numpy as np

from agents.bayesian_agent import (InfoSet, InsufficientSupport, MonteCarloBudget, PolicyProfile,
                                   decide, estimate_from_sample, exact_posterior)
from mechanism import build_mechanism
from mechanism.planner import Flag, Message
from network.generators import generate, load_edge_list
from network.visibility_graph import RegimeSpec, VisibilityGraph
from rewards.distribution import PiecewiseDistribution
from rewards.partition import NoExplorationNeeded, PriorOrderViolation, build_partition
from simulation.simulation_engine import SimulationEngine
from utils import console

# salts keep auxiliary streams apart from the replication fan-out
GRAPH_STREAM = 101
ARRIVAL_STREAM = 102


@dataclass
class GraphConfig:
    kind: str = 'empty'
    center: int = 0
    nodes: Optional[List[int]] = None
    cap: Optional[int] = None
    p: Optional[float] = None
    hub_degree: Optional[int] = None
    edges: Optional[List[List[int]]] = None
    path: Optional[str] = None
    seed: Optional[int] = None


@dataclass
class RegimeConfig:
    alpha: float = 0.3
    beta: float = 0.0


@dataclass
class ArrivalConfig:
    order: str = 'identity'
    permutation: Optional[List[int]] = None
    seed: Optional[int] = None


@dataclass
class ReplicaConfig:
    mode: str = 'random-tag'
    count: Optional[int] = None
    granularity: int = 512


@dataclass
class SimulationConfig:
    replications: int = 100
    seed: int = 12345
    max_workers: int = 4


@dataclass
class ToleranceConfig:
    partition: float = 1e-9
    bisection: float = 1e-10
    comb: float = 1e-3


@dataclass
class AuditConfig:
    n_outer: int = 20000
    min_matched: int = 200
    z_threshold: float = 3.0
    agents: Optional[List[int]] = None


@dataclass
class SweepConfig:
    n_grid: List[int] = field(default_factory=lambda: [100, 300, 1000])
    alpha_grid: List[float] = field(default_factory=lambda: [0.1, 0.2, 0.3])
    beta_grid: List[float] = field(default_factory=lambda: [0.0, 0.2])
    replications: int = 20


@dataclass
class ScenarioConfig:
    name: str = 'unit'
    n_agents: int = 50
    mechanism: str = 'no_visibility'
    dist_a: List[List[float]] = field(default_factory=lambda: [[0.0, 1.0, 1.0]])
    dist_b: List[List[float]] = field(default_factory=lambda: [[0.0, 0.5, 1.0]])
    test_positions: Optional[List[int]] = None
    graph: GraphConfig = field(default_factory=GraphConfig)
    regime: RegimeConfig = field(default_factory=RegimeConfig)
    arrival: ArrivalConfig = field(default_factory=ArrivalConfig)
    replica: ReplicaConfig = field(default_factory=ReplicaConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    audit: AuditConfig = field(default_factory=AuditConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)

    def with_seed(self, seed: int) -> 'ScenarioConfig':
        return replace(self, simulation=replace(self.simulation, seed=seed))

    def audit_budget(self, seed: Optional[int] = None) -> MonteCarloBudget:
        return MonteCarloBudget(
            n_outer=self.audit.n_outer,
            min_matched=self.audit.min_matched,
            z_threshold=self.audit.z_threshold,
            seed=self.simulation.seed if seed is None else seed,
            max_workers=self.simulation.max_workers,
        )


def auxiliary_stream(master_seed: int, salt: int) -> np.random.Generator:
    return np.random.default_rng([master_seed, salt])


def build_graph(config: ScenarioConfig) -> VisibilityGraph:
    spec = config.graph
    n = config.n_agents
    if spec.kind == 'edge_list':
        return load_edge_list(spec.path, n)
    if spec.kind == 'inline':
        return VisibilityGraph.from_edges(n, [tuple(pair) for pair in spec.edges or []])
    seed = spec.seed if spec.seed is not None else config.simulation.seed
    return generate(spec.kind, n, auxiliary_stream(seed, GRAPH_STREAM),
                    center=spec.center, nodes=spec.nodes, cap=spec.cap, p=spec.p,
                    hub_degree=spec.hub_degree, alpha=config.regime.alpha, beta=config.regime.beta)


def build_arrival_order(config: ScenarioConfig) -> List[int]:
    """Fixed arrival order: identity, an explicit permutation, or one seeded shuffle"""
    n = config.n_agents
    spec = config.arrival
    if spec.order == 'identity':
        return list(range(n))
    if spec.order == 'permutation':
        order = [int(a) for a in spec.permutation or []]
        if sorted(order) != list(range(n)):
            raise ValueError(f"arrival.permutation must list every agent 0..{n - 1} once")
        return order
    if spec.order == 'shuffle':
        seed = spec.seed if spec.seed is not None else config.simulation.seed
        return [int(a) for a in auxiliary_stream(seed, ARRIVAL_STREAM).permutation(n)]
    raise ValueError(f"Unknown arrival order '{spec.order}'")


class Scenario:
    """
    Everything a run needs, built once from a ScenarioConfig

    Args:
        config: Scenario configuration
        graph: Prebuilt graph (overrides config.graph)
    """

    def __init__(self, config: ScenarioConfig, graph: Optional[VisibilityGraph] = None):
        self.config = config
        self.va = PiecewiseDistribution(config.dist_a)
        self.vb = PiecewiseDistribution(config.dist_b)
        if self.va.mean() <= self.vb.mean():
            raise PriorOrderViolation(
                f"mean(dist_a) = {self.va.mean():.6g} must exceed mean(dist_b) = {self.vb.mean():.6g}; "
                f"swap the two actions")
        self.graph = graph if graph is not None else build_graph(config)
        if self.graph.n_agents != config.n_agents:
            raise ValueError(f"Graph has {self.graph.n_agents} agents, scenario has {config.n_agents}")
        self.regime = RegimeSpec(config.regime.alpha, config.regime.beta)
        self.classification = self.graph.classify(self.regime.alpha)
        self.arrival_order = build_arrival_order(config)
        self.position_of: Dict[int, int] = {agent: pos for pos, agent in enumerate(self.arrival_order, 1)}
        self.mechanism = build_mechanism(
            config.mechanism, self.va, self.vb, self.graph, self.classification,
            replica_count=config.replica.count, replica_mode=config.replica.mode,
            tol=config.tolerances.partition, xtol=config.tolerances.bisection,
            granularity=config.replica.granularity, test_positions=config.test_positions,
        )
        self._policy_tables: Dict[int, Dict] = {}
        self._policy_lock = threading.Lock()
        console.log('Scenario', f"{config.name}: N={config.n_agents}, mechanism={config.mechanism}, "
                                f"graph={config.graph.kind}, |S|={len(self.classification.high)}", level=2)

    @property
    def n_agents(self) -> int:
        return self.config.n_agents

    @property
    def partition(self):
        return self.mechanism.partition

    @property
    def mu_a(self) -> float:
        return self.va.mean()

    @property
    def mu_b(self) -> float:
        return self.vb.mean()

    @cached_property
    def exploration_cells(self) -> int:
        """K of the unreplicated partition (0 when no exploration is needed)"""
        try:
            return build_partition(self.va, self.mu_b, self.config.tolerances.partition,
                                   self.config.tolerances.bisection).K
        except NoExplorationNeeded:
            return 0

    def agent_at(self, position: int) -> int:
        return self.arrival_order[position - 1]

    def best_response_policy(self, info: InfoSet) -> str:
        """
        Best response of an agent that assumes everyone else complies

        Closed form where available; otherwise a Monte Carlo table per agent,
        computed once and shared across runs and threads.
        """
        estimate = exact_posterior(info, self)
        if estimate is not None:
            return decide(info, estimate)
        with self._policy_lock:
            table = self._policy_tables.get(info.agent)
            if table is None:
                table = self._build_policy_table(info.agent)
                self._policy_tables[info.agent] = table
        return table.get(info.signature(), info.message.action)

    def _build_policy_table(self, agent: int) -> Dict:
        budget = self.config.audit_budget()
        engine = SimulationEngine(self, PolicyProfile.compliant(), max_workers=budget.max_workers)
        sample = engine.sample_information(agent, budget.n_outer, budget.seed)
        table = {}
        for signature in sorted(set(sample.signatures), key=repr):
            try:
                estimate = estimate_from_sample(sample, signature, budget.min_matched)
            except InsufficientSupport:
                continue
            template = InfoSet(0, agent, _message_of(signature))
            table[signature] = decide(template, estimate, budget.z_threshold)
        console.log('Policy', f"best-response table for agent {agent}: {len(table)} information sets", level=2)
        return table


def _message_of(signature) -> Message:
    return Message(signature[0], Flag(signature[1]))
