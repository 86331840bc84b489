"""
Simulation Engine
Runs agents through a mechanism, one arrival at a time, over many seeded replications
"""

from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd

from agents.bayesian_agent import InfoSet, PolicyProfile
from mechanism.planner import ACTION_A
from simulation.bound_checks import bound_checks
from simulation.performance_metrics import PerformanceCalculator
from utils import console


def replication_seed(master_seed: int, index: int) -> int:
    """Child seed of replication `index`; shared by simulations and audits"""
    child = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(child.generate_state(1, dtype=np.uint64)[0])


class ArrivalRecord(NamedTuple):
    position: int
    agent: int
    message_action: str
    flag: str
    action: str
    reward: float
    case: str
    k: int
    z: int
    experiment: bool
    knowledge: bool


@dataclass
class RunTrace:
    """Outcome of one replication"""

    index: int
    seed: int
    va: float
    vb: float
    n_arrivals: int
    n_optimal: int
    total_reward: float
    exploration_end: Optional[int]
    rho: List[int]
    shadow: List[int]
    k_final: int
    z_final: int
    b_revealed: bool
    actions: Dict[int, str] = field(default_factory=dict)
    records: List[ArrivalRecord] = field(default_factory=list)

    @property
    def best_reward(self) -> float:
        return max(self.va, self.vb)

    @property
    def fraction_optimal(self) -> float:
        return self.n_optimal / self.n_arrivals

    @property
    def avg_reward(self) -> float:
        return self.total_reward / self.n_arrivals

    @property
    def regret(self) -> float:
        return self.best_reward - self.avg_reward

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.records, columns=ArrivalRecord._fields)


@dataclass
class InformationSample:
    """Information signatures of one agent across outer runs, with the realised rewards"""

    agent: int
    position: int
    signatures: List[Tuple]
    va: np.ndarray
    vb: np.ndarray
    cases: List[str]


class SimulationEngine:
    """
    Drives a built Scenario

    Args:
        scenario: Built scenario (distributions, graph, arrival order, mechanism)
        profile: Agent behaviour; everyone complies by default
        max_workers: Threads used for replications and outer audit runs
    """

    def __init__(self, scenario, profile: Optional[PolicyProfile] = None,
                 max_workers: Optional[int] = None):
        self.scenario = scenario
        self.profile = profile or PolicyProfile.compliant()
        self.max_workers = max_workers or scenario.config.simulation.max_workers

    def _play(self, seed: int, index: int = 0, keep_records: bool = False,
              stop_agent: Optional[int] = None):
        scenario = self.scenario
        mechanism = scenario.mechanism
        graph = scenario.graph
        profile = self.profile

        stream = np.random.default_rng(seed)
        va = scenario.va.sample(stream)
        vb = scenario.vb.sample(stream)
        state = mechanism.new_state(stream)
        best = max(va, vb)

        actions: Dict[int, str] = {}
        records: List[ArrivalRecord] = []
        n_optimal = 0
        total = 0.0
        for position, agent in enumerate(scenario.arrival_order, 1):
            message = mechanism.step(state, position, agent)
            if agent == stop_agent or not profile.is_compliant(agent):
                observed = tuple(sorted((f, actions[f]) for f in graph.neighbors(agent) if f in actions))
                info = InfoSet(position, agent, message, observed)
                if agent == stop_agent:
                    return info, va, vb, state.case
                action = profile.choose(info, scenario)
            else:
                action = message.action
            reward = va if action == ACTION_A else vb
            mechanism.reveal(state, agent, action, reward)
            actions[agent] = action
            total += reward
            if reward >= best:
                n_optimal += 1
            if keep_records:
                records.append(ArrivalRecord(position, agent, message.action, message.flag.value,
                                             action, reward, state.case, state.k, state.z,
                                             state.experiment, state.knowledge))
        if stop_agent is not None:
            raise ValueError(f"Agent {stop_agent} never arrives")

        return RunTrace(
            index=index, seed=seed, va=va, vb=vb,
            n_arrivals=len(scenario.arrival_order), n_optimal=n_optimal, total_reward=total,
            exploration_end=state.exploration_end, rho=list(state.rho), shadow=sorted(state.shadow),
            k_final=state.k, z_final=state.z, b_revealed='b' in state.revealed,
            actions=actions, records=records,
        )

    def run_once(self, seed: int, index: int = 0, keep_records: bool = True) -> RunTrace:
        """
        One replication: draw V_a, V_b, then planner step, agent policy, reveal

        Args:
            seed: Replication seed
            index: Replication index (carried into the trace)
            keep_records: Keep the per-arrival trace rows

        Returns:
            RunTrace
        """
        return self._play(seed, index, keep_records)

    def run_replications(self, replications: int, master_seed: int, reducer=None,
                         tag: str = 'Simulate') -> List:
        """
        Run replications in a thread pool and return results ordered by index

        Args:
            replications: Number of runs
            master_seed: Master seed fanned out with replication_seed
            reducer: Optional callable(trace) -> result applied in the worker
            tag: Console tag for progress lines

        Returns:
            List of traces (or reducer results), ordered by replication index
        """
        def job(i):
            trace = self._play(replication_seed(master_seed, i), i)
            return reducer(trace) if reducer else trace

        results = [None] * replications
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            futures = {executor.submit(job, i): i for i in range(replications)}
            completed = 0
            for future in as_completed(futures):
                results[futures[future]] = future.result()
                completed += 1
                console.progress(completed, replications, tag, every=max(1, replications // 10))
        return results

    def sample_information(self, agent: int, n_outer: int, master_seed: int) -> InformationSample:
        """
        Truncated runs up to `agent`'s arrival, recording what it would see

        Run i uses the same seed as replication i, so audits line up with
        simulations of the same scenario.
        """
        chunks = max(1, min(self.max_workers, n_outer))
        bounds = np.linspace(0, n_outer, chunks + 1).astype(int)

        def job(lo, hi):
            return [self._play(replication_seed(master_seed, i), i, stop_agent=agent) for i in range(lo, hi)]

        parts: List[Optional[List]] = [None] * chunks
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            futures = {executor.submit(job, bounds[c], bounds[c + 1]): c for c in range(chunks)}
            for future in as_completed(futures):
                parts[futures[future]] = future.result()
        rows = [row for part in parts for row in part]
        position = self.scenario.position_of[agent]
        return InformationSample(
            agent=agent, position=position,
            signatures=[info.signature() for info, _, _, _ in rows],
            va=np.array([row[1] for row in rows]),
            vb=np.array([row[2] for row in rows]),
            cases=[row[3] for row in rows],
        )


def run_once(scenario, seed: int, profile: Optional[PolicyProfile] = None) -> RunTrace:
    return SimulationEngine(scenario, profile).run_once(seed)


def run_monte_carlo(scenario, profile: Optional[PolicyProfile] = None, replications: Optional[int] = None,
                    master_seed: Optional[int] = None):
    """
    Replicate the scenario and aggregate Metrics, bound checks included

    Returns:
        (Metrics, per-replication DataFrame, bound-check DataFrame)
    """
    config = scenario.config.simulation
    replications = replications if replications is not None else config.replications
    master_seed = master_seed if master_seed is not None else config.seed

    def reduce(trace: RunTrace):
        row = PerformanceCalculator.replication_row(trace)
        checks = [dict(check.to_row(), replication=trace.index) for check in bound_checks(trace, scenario).checks]
        return row, checks

    console.log('Simulate', f"{scenario.config.name}: {replications} replications, "
                            f"{scenario.n_agents} agents, mechanism={scenario.mechanism.kind}")
    engine = SimulationEngine(scenario, profile)
    results = engine.run_replications(replications, master_seed, reduce)
    rows = pd.DataFrame([row for row, _ in results])
    checks = pd.DataFrame([check for _, group in results for check in group])
    metrics = PerformanceCalculator.summarize(rows, checks)
    return metrics, rows, checks
