"""
Test Distribution - piecewise-uniform reward laws and interval sets
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.append(str(Path(__file__).parent))

from rewards.distribution import (IntervalSet, InvalidDistribution, PiecewiseDistribution,
                                  ZeroMassEvent)

UNIT = PiecewiseDistribution([[0.0, 1.0, 1.0]])
HALF = PiecewiseDistribution([[0.0, 0.5, 1.0]])


def test_uniform_moments():
    assert UNIT.mean() == pytest.approx(0.5)
    assert UNIT.variance() == pytest.approx(1 / 12)
    assert HALF.mean() == pytest.approx(0.25)
    assert UNIT.ess_sup() == 1.0


def test_mixture_mean():
    mix = PiecewiseDistribution([[0.0, 0.2, 0.9], [0.2, 0.9, 0.1]])
    assert mix.mean() == pytest.approx(0.9 * 0.1 + 0.1 * 0.55)
    assert mix.support_lo == 0.0
    assert mix.support_hi == 0.9


def test_invalid_pieces_rejected():
    with pytest.raises(InvalidDistribution):
        PiecewiseDistribution([[0.0, 1.0, 0.7]])
    with pytest.raises(InvalidDistribution):
        PiecewiseDistribution([[1.0, 0.0, 1.0]])
    with pytest.raises(InvalidDistribution):
        PiecewiseDistribution([])
    with pytest.raises(InvalidDistribution):
        PiecewiseDistribution([[0.0, 0.5, -0.5], [0.5, 1.0, 1.5]])


def test_interval_set_algebra():
    left = IntervalSet.between(0.0, 1.0)
    right = IntervalSet.between(0.5, 2.0)

    assert (left | right).span() == (0.0, 2.0)
    assert len(left | right) == 1
    assert (left & right) == IntervalSet.between(0.5, 1.0)
    assert (left - right) == IntervalSet.between(0.0, 0.5)
    assert IntervalSet.between(1.0, 1.0).is_empty()

    hole = IntervalSet.between(0.2, 0.4).complement(0.0, 1.0)
    assert hole.length() == pytest.approx(0.8)
    assert not hole.contains(0.3)
    assert hole.contains(1.0)


def test_half_open_boundaries():
    cell = IntervalSet.between(0.25, 0.5)
    assert cell.contains(0.25)
    assert not cell.contains(0.5)
    closed = IntervalSet.between(0.5, 1.0, right_closed=True)
    assert closed.contains(1.0)
    assert (cell | closed).contains(0.5)


def test_mass_and_moment_exact():
    mass, moment = UNIT.mass_and_moment(IntervalSet.between(0.25, 0.5))
    assert mass == pytest.approx(0.25)
    assert moment == pytest.approx((0.25 - 0.0625) / 2)
    assert UNIT.cond_expect(IntervalSet.between(0.25, 0.5)) == pytest.approx(0.375)


def test_zero_mass_conditioning_raises():
    with pytest.raises(ZeroMassEvent):
        UNIT.cond_expect(IntervalSet.between(2.0, 3.0))
    with pytest.raises(ZeroMassEvent):
        UNIT.restrict(IntervalSet())


def test_restrict_renormalises():
    upper = UNIT.restrict(IntervalSet.between(0.5, 1.0, right_closed=True))
    assert upper.mean() == pytest.approx(0.75)
    assert float(np.sum(upper.weights)) == pytest.approx(1.0)


def test_cdf_and_quantile():
    assert UNIT.cdf(0.3) == pytest.approx(0.3)
    assert UNIT.quantile(0.3) == pytest.approx(0.3)
    assert HALF.quantile(1.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        UNIT.quantile(1.5)


def test_quantile_split_equal_mass_and_mean():
    d0 = IntervalSet.between(0.0, 0.25)
    pieces = UNIT.quantile_split(d0, 3, granularity=512)

    assert len(pieces) == 3
    for piece in pieces:
        assert UNIT.prob(piece) == pytest.approx(0.25 / 3, abs=1e-9)
        assert UNIT.cond_expect(piece) == pytest.approx(0.125, abs=1e-3)
    union = pieces[0] | pieces[1] | pieces[2]
    assert (union - d0).length() == pytest.approx(0.0, abs=1e-12)
    assert (d0 - union).length() == pytest.approx(0.0, abs=1e-12)


def test_dominance_moments_closed_form():
    prob, ea, eb = UNIT.dominance_moments(UNIT)
    assert prob == pytest.approx(0.5)
    assert ea == pytest.approx(1 / 3)
    assert eb == pytest.approx(1 / 6)

    prob, _, _ = UNIT.dominance_moments(HALF)
    assert prob == pytest.approx(0.75)


def test_sampling_matches_mean():
    stream = np.random.default_rng(7)
    draws = UNIT.sample_many(stream, 20000)
    assert draws.min() >= 0.0 and draws.max() < 1.0
    assert draws.mean() == pytest.approx(0.5, abs=0.01)

    same = [PiecewiseDistribution([[0.0, 1.0, 1.0]]).sample(np.random.default_rng(3)) for _ in range(2)]
    assert same[0] == same[1]


def random_mixture(rng, lo=0.0, hi=1.0):
    n = int(rng.integers(1, 4))
    starts = rng.uniform(lo, hi, size=n)
    widths = rng.uniform(0.2, 1.0, size=n)
    weights = rng.dirichlet(np.ones(n)) + 0.05
    weights = weights / weights.sum()
    return PiecewiseDistribution([[s, s + w, p] for s, w, p in zip(starts, widths, weights)])


def random_event(rng, dist):
    cuts = np.sort(rng.uniform(dist.support_lo, dist.support_hi, size=4))
    return IntervalSet.between(cuts[0], cuts[1]) | IntervalSet.between(cuts[2], cuts[3])


def in_event(draws, event):
    mask = np.zeros(len(draws), dtype=bool)
    for part in event:
        upper = (draws <= part.hi) if part.right_closed else (draws < part.hi)
        mask |= (draws >= part.lo) & upper
    return mask


def test_additivity_and_mixture_identity_on_random_mixtures():
    rng = np.random.default_rng(4242)
    for _ in range(100):
        dist = random_mixture(rng, lo=-1.0, hi=1.0)
        event = random_event(rng, dist)
        mid = rng.uniform(dist.support_lo, dist.support_hi)
        left = event & IntervalSet.between(dist.support_lo, mid)
        right = event - left

        assert dist.prob(event) == pytest.approx(dist.prob(left) + dist.prob(right), abs=1e-12)
        assert dist.prob(dist.support()) == pytest.approx(1.0, abs=1e-12)
        parts = [s for s in (left, right) if dist.prob(s) > 0]
        if dist.prob(event) > 0:
            expected = sum(dist.cond_expect(s) * dist.prob(s) for s in parts)
            assert dist.cond_expect(event) * dist.prob(event) == pytest.approx(expected, abs=1e-12)
            assert dist.support_lo <= dist.cond_expect(event) <= dist.support_hi
        # conditioning on the whole support gives back the mean
        assert dist.cond_expect(dist.support()) == pytest.approx(dist.mean(), abs=1e-12)


def test_sampled_conditional_means_converge():
    rng = np.random.default_rng(99)
    checked = 0
    while checked < 10:
        dist = random_mixture(rng)
        event = random_event(rng, dist)
        if dist.prob(event) < 0.2:
            continue
        draws = dist.sample_many(rng, 10 ** 5)
        inside = draws[in_event(draws, event)]
        sigma = np.sqrt(dist.restrict(event).variance() / len(inside))

        assert abs(inside.mean() - dist.cond_expect(event)) <= 4 * sigma
        assert len(inside) / 10 ** 5 == pytest.approx(dist.prob(event), abs=0.01)
        checked += 1


if __name__ == '__main__':
    sys.exit(pytest.main([__file__, '-v']))
