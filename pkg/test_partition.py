"""
Test Partition - exploration cells, their bounds and the verifier
"""

import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

sys.path.append(str(Path(__file__).parent))

from rewards.distribution import IntervalSet, PiecewiseDistribution
from rewards.partition import (COMB, RANDOM_TAG, NoExplorationNeeded, PriorOrderViolation,
                               build_partition, build_replicated_partition, cell_table,
                               exploration_gap, halting_bound, k_bounds, verify_partition)

UNIT = PiecewiseDistribution([[0.0, 1.0, 1.0]])
MU_B = 0.25


def test_unit_cells_follow_square_root_edges():
    partition = build_partition(UNIT, MU_B)

    assert partition.K == 9
    assert partition.d0 == IntervalSet.between(0.0, MU_B)
    for k, cell in enumerate(partition.cells[:-1], 1):
        lo, hi = cell.span()
        assert lo == pytest.approx(MU_B + 0.25 * math.sqrt(k - 1), abs=1e-8)
        assert hi == pytest.approx(MU_B + 0.25 * math.sqrt(k), abs=1e-8)
    assert partition.cells[-1].span()[1] == 1.0
    assert partition.cells[-1].contains(1.0)


def test_second_cell_gain():
    partition = build_partition(UNIT, MU_B)
    d2 = partition.cells[1]
    lo, hi = d2.span()

    assert lo == pytest.approx(0.5, abs=1e-8)
    assert hi == pytest.approx(0.603553, abs=1e-6)
    assert UNIT.cond_expect(d2) == pytest.approx(0.551777, abs=1e-6)
    assert UNIT.cond_expect(d2) - MU_B == pytest.approx(0.3018, abs=1e-4)


def test_each_test_event_is_indifferent():
    partition = build_partition(UNIT, MU_B)
    for k in range(1, partition.K):
        assert UNIT.cond_expect(partition.test_event(k)) == pytest.approx(MU_B, abs=1e-9)
    assert UNIT.cond_expect(partition.test_event(partition.K)) <= MU_B + 1e-9


def test_bounds_and_gap():
    assert exploration_gap(UNIT, MU_B) == pytest.approx(0.03125)
    assert halting_bound(UNIT, MU_B) == pytest.approx(32.0)
    assert k_bounds(UNIT, MU_B) == (9, 14)


def test_single_cell_when_means_close():
    partition = build_partition(UNIT, 0.5)
    assert partition.K == 1
    assert partition.cells[0].span() == (0.5, 1.0)
    assert k_bounds(UNIT, 0.5)[0] == 1
    assert verify_partition(partition, UNIT).passed

    replicated = build_replicated_partition(UNIT, 0.5, 2)
    assert verify_partition(replicated, UNIT).passed


def test_bracket_skipped_for_negative_rewards():
    va = PiecewiseDistribution([[-1.0, 1.0, 1.0]])
    partition = build_partition(va, -0.5)
    report = verify_partition(partition, va)

    assert k_bounds(va, -0.5) is None
    assert halting_bound(va, -0.5) is None
    assert report.passed, report.to_frame()
    skipped = {c.name for c in report.checks if not c.applicable}
    assert skipped == {'k_bracket', 'interior_mass_floor', 'halting_count'}
    frame = report.to_frame()
    assert not frame.loc[frame['check'] == 'k_bracket', 'applicable'].item()


def test_bracket_applies_for_nonnegative_rewards():
    report = verify_partition(build_partition(UNIT, MU_B), UNIT)
    bracket = next(c for c in report.checks if c.name == 'k_bracket')
    assert bracket.applicable
    assert bracket.residual == 0.0


def test_no_exploration_needed():
    va = PiecewiseDistribution([[-3.0, -1.0, 1.0]])
    with pytest.raises(NoExplorationNeeded):
        build_partition(va, -3.0)


def test_prior_order_violation():
    with pytest.raises(PriorOrderViolation):
        build_partition(UNIT, 0.5 + 1e-3)


def test_cell_index():
    partition = build_partition(UNIT, MU_B)
    assert partition.cell_index(0.1) == 0
    assert partition.cell_index(0.55) == 2
    assert partition.cell_index(1.0) == partition.K


def test_verify_passes_on_built_partition():
    report = verify_partition(build_partition(UNIT, MU_B), UNIT)
    assert report.passed, report.to_frame()
    names = set(report.to_frame()['check'])
    assert {'coverage', 'disjointness', 'interior_indifference', 'k_bracket',
            'interior_mass_floor', 'halting_count'} <= names


def test_verify_detects_widened_cell():
    partition = build_partition(UNIT, MU_B)
    cells = list(partition.cells)
    cells[0] = IntervalSet.between(MU_B, 0.51)
    cells[1] = IntervalSet.between(0.51, cells[1].span()[1])
    corrupted = replace(partition, cells=tuple(cells))

    report = verify_partition(corrupted, UNIT)
    failed = {c.name for c in report.failures()}
    assert 'interior_indifference' in failed
    assert 'coverage' not in failed
    indifference = next(c for c in report.checks if c.name == 'interior_indifference')
    assert indifference.residual > 0.004


def test_replicated_partition_random_tag():
    partition = build_replicated_partition(UNIT, MU_B, 3, RANDOM_TAG)

    assert partition.replica_count == 3
    assert partition.K_prime > build_partition(UNIT, MU_B).K
    assert verify_partition(partition, UNIT).passed
    assert partition.in_replica(1, 0.1, label=1)
    assert not partition.in_replica(1, 0.1, label=2)
    assert not partition.in_replica(1, 0.6, label=1)
    assert not partition.in_replica(3, 0.1, label=3)


def test_replicated_partition_comb():
    partition = build_replicated_partition(UNIT, MU_B, 3, COMB, granularity=256)
    report = verify_partition(partition, UNIT)

    assert report.passed, report.to_frame()
    hits = [j for j in range(3) if partition.in_replica(j, 0.1)]
    assert len(hits) == 1


def test_cell_table():
    partition = build_partition(UNIT, MU_B)
    table = cell_table(partition, UNIT)

    assert list(table.columns) == ['cell', 'lo', 'hi', 'mass', 'cond_mean', 'residual']
    assert len(table) == partition.K + 1
    assert table.loc[0, 'mass'] == pytest.approx(0.25)
    assert table['mass'].sum() == pytest.approx(1.0)
    assert table['residual'].iloc[1:-1].abs().max() < 1e-8


def random_mixture(rng):
    n = int(rng.integers(1, 4))
    starts = rng.uniform(0.0, 1.0, size=n)
    widths = rng.uniform(0.2, 1.0, size=n)
    weights = rng.dirichlet(np.ones(n)) + 0.05
    weights = weights / weights.sum()
    return PiecewiseDistribution([[s, s + w, p] for s, w, p in zip(starts, widths, weights)])


def test_random_mixture_partitions():
    rng = np.random.default_rng(20240601)
    checked = 0
    while checked < 100:
        va = random_mixture(rng)
        mu_b = va.support_lo + rng.uniform(0.3, 0.9) * (va.mean() - va.support_lo)
        lower, upper = k_bounds(va, mu_b)
        if upper > 150:
            continue
        partition = build_partition(va, mu_b, xtol=1e-13)
        report = verify_partition(partition, va, tol=1e-8)

        assert report.passed, (va, mu_b, report.failures())
        assert all(check.applicable for check in report.checks)
        assert lower <= partition.K <= upper
        assert partition.d0 == IntervalSet.between(va.support_lo, mu_b)
        for k in range(1, partition.K):
            assert va.cond_expect(partition.test_event(k)) == pytest.approx(mu_b, abs=1e-8)
        checked += 1


if __name__ == '__main__':
    sys.exit(pytest.main([__file__, '-v']))
