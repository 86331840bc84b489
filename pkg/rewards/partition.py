"""
Exploration Partition
Builds and verifies the cells the planner tests V_a against
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import bisect

from utils.errors import SimulatorError
from rewards.distribution import IntervalSet, PiecewiseDistribution

RANDOM_TAG = 'random-tag'
COMB = 'comb'
REPLICA_MODES = (RANDOM_TAG, COMB)


class NoExplorationNeeded(SimulatorError):
    """P(V_a < mu_b) = 0, so b is never worth testing"""


class PriorOrderViolation(SimulatorError):
    """mean(V_a) must be at least mu_b"""


@dataclass(frozen=True)
class ExplorationPartition:
    """
    D_0 = [L, mu_b) plus cells D_1..D_K tiling [mu_b, R]

    Test k recommends b exactly when V_a lies in D_0 U D_k.
    """

    d0: IntervalSet
    cells: Tuple[IntervalSet, ...]
    mu_b: float

    @property
    def K(self) -> int:
        return len(self.cells)

    def test_event(self, k: int) -> IntervalSet:
        return self.d0 | self.cells[k - 1]

    def cell_index(self, v: float) -> Optional[int]:
        if self.d0.contains(v):
            return 0
        for k, cell in enumerate(self.cells, 1):
            if cell.contains(v):
                return k
        return None


@dataclass(frozen=True)
class ReplicatedPartition:
    """
    D_0 split into replica_count replicas, each paired with the cells

    In random-tag mode replica j is "V_a in D_0 and the run label is j";
    in comb mode the replicas are explicit equal-mass subsets of D_0.
    """

    d0: IntervalSet
    cells: Tuple[IntervalSet, ...]
    mu_b: float
    replica_count: int
    mode: str = RANDOM_TAG
    replicas: Optional[Tuple[IntervalSet, ...]] = field(default=None)

    @property
    def K_prime(self) -> int:
        return len(self.cells)

    @property
    def K(self) -> int:
        return len(self.cells)

    def in_replica(self, j: int, v: float, label: int = 0) -> bool:
        if not 0 <= j < self.replica_count:
            return False
        if self.mode == RANDOM_TAG:
            return label == j and self.d0.contains(v)
        return self.replicas[j].contains(v)

    def test_event(self, k: int) -> IntervalSet:
        return self.cells[k - 1]


def _check_order(va: PiecewiseDistribution, mu_b: float) -> Tuple[IntervalSet, float, float]:
    if va.mean() < mu_b:
        raise PriorOrderViolation(
            f"mean(V_a) = {va.mean():.6g} must be at least mu_b = {mu_b:.6g}; relabel the actions")
    d0 = IntervalSet.between(va.support_lo, mu_b)
    d0_mass, d0_moment = va.mass_and_moment(d0)
    if d0_mass <= 0:
        raise NoExplorationNeeded(f"P(V_a < {mu_b:.6g}) = 0")
    return d0, d0_mass, d0_moment


def exploration_gap(va: PiecewiseDistribution, mu_b: float) -> float:
    """delta = P(V_a < mu_b) * (mu_b - E[V_a | V_a < mu_b])"""
    _, d0_mass, d0_moment = _check_order(va, mu_b)
    return d0_mass * mu_b - d0_moment


def bracket_applies(va: PiecewiseDistribution, mu_b: float) -> bool:
    """The K bracket, the delta / R mass floor and the R / delta cap need L >= 0 and mu_b >= 0"""
    return va.support_lo >= 0 and mu_b >= 0


def halting_bound(va: PiecewiseDistribution, mu_b: float) -> Optional[float]:
    """R / delta, or None when rewards can be negative"""
    if not bracket_applies(va, mu_b):
        return None
    return va.support_hi / exploration_gap(va, mu_b)


def k_bounds(va: PiecewiseDistribution, mu_b: float) -> Optional[Tuple[int, int]]:
    """
    Integer bracket for the number of cells

    Returns:
        (ceil((mu_a - mu_b) / delta + 1), floor((mu_a - mu_b / 2) / delta + 2)),
        or None when V_a can be negative or mu_b < 0
    """
    if not bracket_applies(va, mu_b):
        return None
    delta = exploration_gap(va, mu_b)
    mu_a = va.mean()
    lower = math.ceil((mu_a - mu_b) / delta + 1 - 1e-9)
    upper = math.floor((mu_a - mu_b / 2) / delta + 2 + 1e-9)
    return lower, upper


def kprime_bound(va: PiecewiseDistribution, mu_b: float, replica_count: int, K: int) -> float:
    mu_a = va.mean()
    if mu_a <= mu_b:
        return math.inf
    return (mu_a - mu_b / 2) / (mu_a - mu_b) * replica_count * (K - 1) + 2


def _build_cells(va: PiecewiseDistribution, mu_b: float, base_mass: float, base_moment: float,
                 tol: float, xtol: float) -> Tuple[IntervalSet, ...]:
    R = va.support_hi
    delta = base_mass * mu_b - base_moment
    # interior cells carry at least delta / (R - mu_b) mass
    max_cells = math.ceil((R - mu_b) / delta) + 2

    def excess(y: float, left: float) -> float:
        mass, moment = va.mass_and_moment(IntervalSet.between(left, y))
        return (base_moment + moment) / (base_mass + mass) - mu_b

    cells: List[IntervalSet] = []
    left = mu_b
    while True:
        if len(cells) >= max_cells:
            raise SimulatorError(f"Partition did not halt within {max_cells} cells")
        tail = IntervalSet.between(left, R, right_closed=True)
        if tail.is_empty():
            break
        mass, moment = va.mass_and_moment(tail)
        if (base_moment + moment) / (base_mass + mass) <= mu_b + tol:
            cells.append(tail)
            break
        y = bisect(excess, left, R, args=(left,), xtol=xtol)
        cells.append(IntervalSet.between(left, y))
        left = y
    return tuple(cells)


def build_partition(va: PiecewiseDistribution, mu_b: float, tol: float = 1e-9,
                    xtol: float = 1e-10) -> ExplorationPartition:
    """
    Build the exploration partition for V_a against the known mean mu_b

    Each cell [x_{k-1}, x_k) solves E(V_a | D_0 U cell) = mu_b by bisection;
    the last cell runs to R once that conditional mean cannot exceed mu_b.

    Args:
        va: Law of the a-priori better action
        mu_b: Mean of the other action
        tol: Halting slack on the final cell
        xtol: Bisection tolerance

    Returns:
        ExplorationPartition
    """
    d0, d0_mass, d0_moment = _check_order(va, mu_b)
    cells = _build_cells(va, mu_b, d0_mass, d0_moment, tol, xtol)
    return ExplorationPartition(d0=d0, cells=cells, mu_b=mu_b)


def build_replicated_partition(va: PiecewiseDistribution, mu_b: float, replica_count: int,
                               mode: str = RANDOM_TAG, tol: float = 1e-9, xtol: float = 1e-10,
                               granularity: int = 512) -> ReplicatedPartition:
    """
    Partition built against one replica of D_0

    Every replica carries P_0 / m mass with mean E_0, so the cells are built
    with D_0 replaced by that (mass, mean) pair.
    """
    if replica_count < 1:
        raise ValueError("replica_count must be at least 1")
    if mode not in REPLICA_MODES:
        raise ValueError(f"Unknown replica mode '{mode}'")
    d0, d0_mass, d0_moment = _check_order(va, mu_b)
    cells = _build_cells(va, mu_b, d0_mass / replica_count, d0_moment / replica_count, tol, xtol)
    replicas = None
    if mode == COMB:
        replicas = tuple(va.quantile_split(d0, replica_count, granularity))
    return ReplicatedPartition(d0=d0, cells=cells, mu_b=mu_b, replica_count=replica_count,
                               mode=mode, replicas=replicas)


@dataclass
class CheckResult:
    name: str
    residual: float
    tolerance: float
    detail: str = ''
    applicable: bool = True

    @property
    def passed(self) -> bool:
        return not self.applicable or bool(self.residual <= self.tolerance)


@dataclass
class PartitionReport:
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([
            {'check': c.name, 'residual': c.residual, 'tolerance': c.tolerance,
             'applicable': c.applicable, 'passed': c.passed, 'detail': c.detail}
            for c in self.checks
        ])


def _tiling_checks(p, va: PiecewiseDistribution, tol: float) -> List[CheckResult]:
    full = va.support()
    covered = p.d0
    overlap = 0.0
    for cell in p.cells:
        overlap += (covered & cell).length()
        covered = covered | cell
    gap = (full - covered).length() + (covered - full).length()
    seams = [abs(p.cells[0].span()[0] - p.mu_b)] if p.cells else [0.0]
    for prev, cell in zip(p.cells, p.cells[1:]):
        seams.append(abs(cell.span()[0] - prev.span()[1]))
    return [
        CheckResult('coverage', gap, tol, 'measure of [L,R] not tiled'),
        CheckResult('disjointness', overlap, tol, 'measure covered twice'),
        CheckResult('tiling_order', max(seams), tol, 'cells run left to right from mu_b'),
    ]


def _indifference_checks(cells, mu_b: float, base_mass: float, base_moment: float,
                         va: PiecewiseDistribution, tol: float) -> List[CheckResult]:
    interior = 0.0
    for cell in cells[:-1]:
        mass, moment = va.mass_and_moment(cell)
        interior = max(interior, abs((base_moment + moment) / (base_mass + mass) - mu_b))
    mass, moment = va.mass_and_moment(cells[-1])
    final = max(0.0, (base_moment + moment) / (base_mass + mass) - mu_b)
    return [
        CheckResult('interior_indifference', interior, tol, 'max |E(V_a | D_0 U D_k) - mu_b|, k < K'),
        CheckResult('final_slack', final, tol, 'E(V_a | D_0 U D_K) - mu_b'),
    ]


def verify_partition(p, va: PiecewiseDistribution, tol: float = 1e-9,
                     comb_tol: float = 1e-3) -> PartitionReport:
    """
    Recompute every structural property of a partition from V_a

    Args:
        p: ExplorationPartition or ReplicatedPartition
        va: Law of V_a the partition was built for
        tol: Residual tolerance
        comb_tol: Tolerance on comb-mode replica means

    Returns:
        PartitionReport with one CheckResult per property
    """
    mu_b = p.mu_b
    d0, d0_mass, d0_moment = _check_order(va, mu_b)
    delta = d0_mass * mu_b - d0_moment
    R = va.support_hi
    checks = _tiling_checks(p, va, tol)
    checks.append(CheckResult('d0_shape', (d0 - p.d0).length() + (p.d0 - d0).length(), tol,
                              'D_0 = [L, mu_b)'))

    replicated = isinstance(p, ReplicatedPartition)
    m = p.replica_count if replicated else 1
    checks += _indifference_checks(p.cells, mu_b, d0_mass / m, d0_moment / m, va, tol)

    if not replicated:
        if not bracket_applies(va, mu_b):
            skipped = f'needs L >= 0 and mu_b >= 0 (L={va.support_lo:.6g}, mu_b={mu_b:.6g})'
            for name in ('k_bracket', 'interior_mass_floor', 'halting_count'):
                checks.append(CheckResult(name, 0.0, 0.0, skipped, applicable=False))
            return PartitionReport(checks)
        lower, upper = k_bounds(va, mu_b)
        outside = max(0, lower - p.K, p.K - upper)
        checks.append(CheckResult('k_bracket', float(outside), 0.0, f'K={p.K} in [{lower}, {upper}]'))
        interior = [va.prob(cell) for cell in p.cells[:-1]]
        floor = delta / R
        shortfall = max([0.0] + [floor - mass for mass in interior])
        checks.append(CheckResult('interior_mass_floor', shortfall, tol, f'interior masses >= {floor:.6g}'))
        checks.append(CheckResult('halting_count', max(0.0, p.K - R / delta), 0.0,
                                  f'K <= R/delta = {R / delta:.6g}'))
        return PartitionReport(checks)

    K = build_partition(va, mu_b).K
    bound = kprime_bound(va, mu_b, m, K)
    checks.append(CheckResult('kprime_bound', max(0.0, p.K_prime - bound), 0.0,
                              f"K'={p.K_prime} <= {bound:.6g}"))
    if p.mode == COMB:
        mass_dev = max(abs(va.prob(r) - d0_mass / m) for r in p.replicas)
        mean_dev = max(abs(va.cond_expect(r) - d0_moment / d0_mass) for r in p.replicas)
        union = IntervalSet()
        overlap = 0.0
        for r in p.replicas:
            overlap += (union & r).length()
            union = union | r
        cover = (d0 - union).length() + (union - d0).length() + overlap
        checks.append(CheckResult('replica_cover', cover, tol, 'replicas partition D_0'))
        checks.append(CheckResult('replica_mass', mass_dev, tol, 'each replica carries P_0/m'))
        checks.append(CheckResult('replica_mean', mean_dev, comb_tol, 'each replica has mean E_0'))
    return PartitionReport(checks)


def cell_table(p, va: PiecewiseDistribution) -> pd.DataFrame:
    """One row per cell: index, bounds, mass, conditional mean and the indifference residual"""
    m = getattr(p, 'replica_count', 1)
    base_mass, base_moment = va.mass_and_moment(p.d0)
    base_mass, base_moment = base_mass / m, base_moment / m
    rows = [{
        'cell': 0, 'lo': p.d0.span()[0], 'hi': p.d0.span()[1],
        'mass': base_mass * m, 'cond_mean': base_moment / base_mass, 'residual': np.nan,
    }]
    for k, cell in enumerate(p.cells, 1):
        mass, moment = va.mass_and_moment(cell)
        lo, hi = cell.span()
        rows.append({
            'cell': k, 'lo': lo, 'hi': hi, 'mass': mass,
            'cond_mean': moment / mass if mass > 0 else np.nan,
            'residual': (base_moment + moment) / (base_mass + mass) - p.mu_b,
        })
    return pd.DataFrame(rows, columns=['cell', 'lo', 'hi', 'mass', 'cond_mean', 'residual'])
