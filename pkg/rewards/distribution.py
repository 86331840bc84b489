"""
Reward Distributions
Piecewise-uniform reward laws and the interval sets they are queried on
"""

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from utils.errors import SimulatorError

WEIGHT_TOLERANCE = 1e-12


class ZeroMassEvent(SimulatorError):
    """Conditioning event has zero probability"""


class InvalidDistribution(SimulatorError):
    """Mixture pieces or weights are malformed"""


@dataclass(frozen=True)
class Interval:
    """Half-open interval [lo, hi), or [lo, hi] when right_closed"""

    lo: float
    hi: float
    right_closed: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"Empty interval [{self.lo}, {self.hi})")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        if self.right_closed:
            return self.lo <= x <= self.hi
        return self.lo <= x < self.hi

    def includes_hi(self, point: float) -> bool:
        """True if the interval reaches `point` from the left and keeps it"""
        return self.hi > point or (self.hi == point and self.right_closed)

    def __repr__(self) -> str:
        return f"[{self.lo:.6g}, {self.hi:.6g}{']' if self.right_closed else ')'}"


def _normalize(parts: Iterable[Interval]) -> Tuple[Interval, ...]:
    ordered = sorted(parts, key=lambda p: (p.lo, p.hi))
    merged: List[Interval] = []
    for part in ordered:
        if merged and part.lo <= merged[-1].hi:
            last = merged[-1]
            if part.hi > last.hi:
                hi, closed = part.hi, part.right_closed
            elif part.hi == last.hi:
                hi, closed = last.hi, last.right_closed or part.right_closed
            else:
                hi, closed = last.hi, last.right_closed
            merged[-1] = Interval(last.lo, hi, closed)
        else:
            merged.append(part)
    return tuple(merged)


class IntervalSet:
    """
    Finite union of intervals, kept sorted, disjoint and merged

    Two sets are equal when their canonical forms are equal.
    """

    __slots__ = ('parts',)

    def __init__(self, parts: Iterable[Interval] = ()):
        self.parts = _normalize(parts)

    @classmethod
    def between(cls, lo: float, hi: float, right_closed: bool = False) -> 'IntervalSet':
        """[lo, hi) as a set; empty when lo >= hi"""
        if lo >= hi:
            return cls()
        return cls([Interval(lo, hi, right_closed)])

    def is_empty(self) -> bool:
        return not self.parts

    def contains(self, x: float) -> bool:
        return any(part.contains(x) for part in self.parts)

    def span(self) -> Optional[Tuple[float, float]]:
        if not self.parts:
            return None
        return self.parts[0].lo, self.parts[-1].hi

    def length(self) -> float:
        return math.fsum(part.length for part in self.parts)

    def union(self, other: 'IntervalSet') -> 'IntervalSet':
        return IntervalSet(self.parts + other.parts)

    def intersection(self, other: 'IntervalSet') -> 'IntervalSet':
        out = []
        i = j = 0
        left, right = self.parts, other.parts
        while i < len(left) and j < len(right):
            a, b = left[i], right[j]
            lo = max(a.lo, b.lo)
            hi = min(a.hi, b.hi)
            if lo < hi:
                out.append(Interval(lo, hi, a.includes_hi(hi) and b.includes_hi(hi)))
            if a.hi < b.hi:
                i += 1
            elif b.hi < a.hi:
                j += 1
            else:
                i += 1
                j += 1
        return IntervalSet(out)

    def complement(self, lo: float, hi: float) -> 'IntervalSet':
        """Complement within [lo, hi] (closed at hi)"""
        out = []
        cursor = lo
        for part in self.parts:
            if part.hi <= lo:
                continue
            if part.lo >= hi:
                break
            if part.lo > cursor:
                out.append(Interval(cursor, part.lo))
            cursor = max(cursor, part.hi)
        if cursor < hi:
            out.append(Interval(cursor, hi, True))
        return IntervalSet(out)

    def difference(self, other: 'IntervalSet') -> 'IntervalSet':
        if not self.parts or not other.parts:
            return self
        lo = min(self.parts[0].lo, other.parts[0].lo)
        hi = max(self.parts[-1].hi, other.parts[-1].hi)
        return self.intersection(other.complement(lo, hi))

    __or__ = union
    __and__ = intersection
    __sub__ = difference

    def __iter__(self):
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self.parts == other.parts

    def __hash__(self) -> int:
        return hash(self.parts)

    def __repr__(self) -> str:
        if not self.parts:
            return "IntervalSet(empty)"
        return " U ".join(repr(p) for p in self.parts)


class PiecewiseDistribution:
    """
    Finite mixture of uniform laws on [lo, hi) pieces

    Args:
        pieces: Sequence of (lo, hi, weight) triples. Weights must be
            positive and sum to 1 within WEIGHT_TOLERANCE.
    """

    def __init__(self, pieces: Sequence[Sequence[float]]):
        if len(pieces) == 0:
            raise InvalidDistribution("Distribution needs at least one piece")
        try:
            table = np.array([[float(v) for v in piece] for piece in pieces], dtype=float)
        except (TypeError, ValueError) as e:
            raise InvalidDistribution(f"Pieces must be numeric (lo, hi, weight) triples: {e}")
        if table.ndim != 2 or table.shape[1] != 3:
            raise InvalidDistribution("Each piece must be a (lo, hi, weight) triple")
        if not np.all(np.isfinite(table)):
            raise InvalidDistribution("Pieces must be finite")
        lo, hi, weights = table[:, 0], table[:, 1], table[:, 2]
        if np.any(lo >= hi):
            raise InvalidDistribution("Every piece needs lo < hi")
        if np.any(weights <= 0):
            raise InvalidDistribution("Every piece needs a positive weight")
        total = math.fsum(weights)
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise InvalidDistribution(f"Weights sum to {total!r}, expected 1")

        self.lo = lo
        self.hi = hi
        self.weights = weights
        self.density = weights / (hi - lo)
        self.support_lo = float(lo.min())
        self.support_hi = float(hi.max())

    @classmethod
    def from_triples(cls, triples: Sequence[Sequence[float]]) -> 'PiecewiseDistribution':
        return cls(triples)

    @classmethod
    def uniform(cls, lo: float, hi: float) -> 'PiecewiseDistribution':
        return cls([(lo, hi, 1.0)])

    @property
    def pieces(self) -> List[Tuple[float, float, float]]:
        return [(float(a), float(b), float(w)) for a, b, w in zip(self.lo, self.hi, self.weights)]

    def support(self) -> IntervalSet:
        return IntervalSet.between(self.support_lo, self.support_hi, right_closed=True)

    # ---- moments -------------------------------------------------------

    def mean(self) -> float:
        return float(np.sum(self.weights * (self.lo + self.hi) / 2))

    def variance(self) -> float:
        second = np.sum(self.weights * (self.lo ** 2 + self.lo * self.hi + self.hi ** 2) / 3)
        return float(max(second - self.mean() ** 2, 0.0))

    def ess_sup(self) -> float:
        return float(self.hi[self.weights > 0].max())

    def mass_and_moment(self, s: IntervalSet) -> Tuple[float, float]:
        """
        Exact P(V in s) and E[V; V in s]

        Args:
            s: Event as an interval set

        Returns:
            (mass, first moment restricted to s)
        """
        mass = 0.0
        moment = 0.0
        for part in s:
            a = np.maximum(part.lo, self.lo)
            b = np.minimum(part.hi, self.hi)
            overlap = b > a
            if not overlap.any():
                continue
            a, b, dens = a[overlap], b[overlap], self.density[overlap]
            mass += float(np.sum(dens * (b - a)))
            moment += float(np.sum(dens * (b * b - a * a) / 2))
        return mass, moment

    def prob(self, s: IntervalSet) -> float:
        return self.mass_and_moment(s)[0]

    def cond_expect(self, s: IntervalSet) -> float:
        mass, moment = self.mass_and_moment(s)
        if mass <= 0:
            raise ZeroMassEvent(f"P(V in {s!r}) = 0")
        return float(np.clip(moment / mass, self.support_lo, self.support_hi))

    def restrict(self, s: IntervalSet) -> 'PiecewiseDistribution':
        """Conditional law of V given V in s"""
        pieces = []
        for part in s:
            for a, b, dens in zip(self.lo, self.hi, self.density):
                lo, hi = max(part.lo, a), min(part.hi, b)
                if hi > lo:
                    pieces.append([lo, hi, dens * (hi - lo)])
        if not pieces:
            raise ZeroMassEvent(f"P(V in {s!r}) = 0")
        total = math.fsum(p[2] for p in pieces)
        for piece in pieces:
            piece[2] /= total
        # renormalised weights may miss 1 by a few ulps
        pieces[-1][2] = 1.0 - math.fsum(p[2] for p in pieces[:-1])
        return PiecewiseDistribution(pieces)

    # ---- cdf / quantiles ------------------------------------------------

    def cdf(self, x: float) -> float:
        frac = np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        return float(np.clip(np.sum(self.weights * frac), 0.0, 1.0))

    def _breakpoints(self) -> Tuple[np.ndarray, np.ndarray]:
        xs = np.unique(np.concatenate([self.lo, self.hi]))
        return xs, np.array([self.cdf(x) for x in xs])

    def quantile(self, p: float) -> float:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"Quantile level {p} outside [0, 1]")
        xs, cdfs = self._breakpoints()
        return float(np.interp(p, cdfs, xs))

    def quantile_split(self, s: IntervalSet, m: int, granularity: int = 512) -> List[IntervalSet]:
        """
        Split s into m interleaved pieces of equal mass

        s is cut into m * granularity equal-mass micro-cells which are dealt
        round-robin, so every output has the same mass and nearly the same
        conditional mean as s.

        Args:
            s: Event to split
            m: Number of outputs
            granularity: Micro-cells per output

        Returns:
            List of m interval sets partitioning s
        """
        if m < 1:
            raise ValueError("m must be at least 1")
        total = self.prob(s)
        if total <= 0:
            raise ZeroMassEvent(f"P(V in {s!r}) = 0")
        if m == 1:
            return [s]

        span_lo, span_hi = s.span()
        inner = [x for x in np.concatenate([self.lo, self.hi]) if span_lo < x < span_hi]
        edges = sorted({span_lo, span_hi, *inner, *(p.lo for p in s), *(p.hi for p in s)})
        xs = np.array(edges)
        restricted_cdf = np.array([self.prob(s & IntervalSet.between(span_lo, x)) for x in xs])

        n_cells = m * granularity
        targets = np.arange(n_cells + 1) * (total / n_cells)
        cuts = np.interp(targets, restricted_cdf, xs)
        cuts[0], cuts[-1] = span_lo, span_hi
        closed_end = s.parts[-1].right_closed

        buckets: List[List[Interval]] = [[] for _ in range(m)]
        for i in range(n_cells):
            lo, hi = cuts[i], cuts[i + 1]
            if hi <= lo:
                continue
            last = i == n_cells - 1
            cell = s & IntervalSet.between(lo, hi, right_closed=last and closed_end)
            buckets[i % m].extend(cell.parts)
        return [IntervalSet(parts) for parts in buckets]

    # ---- sampling ------------------------------------------------------

    def sample(self, stream: np.random.Generator) -> float:
        idx = stream.choice(len(self.weights), p=self.weights) if len(self.weights) > 1 else 0
        return float(stream.uniform(self.lo[idx], self.hi[idx]))

    def sample_many(self, stream: np.random.Generator, size: int) -> np.ndarray:
        idx = stream.choice(len(self.weights), size=size, p=self.weights)
        return stream.uniform(self.lo[idx], self.hi[idx])

    # ---- pairwise ------------------------------------------------------

    def dominance_moments(self, other: 'PiecewiseDistribution') -> Tuple[float, float, float]:
        """
        Exact joint moments of two independent draws

        Returns:
            (P(V >= W), E[V; V >= W], E[W; V >= W]) where V ~ self, W ~ other
        """
        prob = ea = eb = 0.0
        x = Polynomial([0.0, 1.0])
        for a0, a1, fa in zip(self.lo, self.hi, self.density):
            for b0, b1, fb in zip(other.lo, other.hi, other.density):
                # on [b0, b1]: F_W = fb (x - b0), G_W = fb (x^2 - b0^2) / 2
                lo, hi = max(a0, b0), min(a1, b1)
                if hi > lo:
                    cdf_w = fb * (x - b0)
                    partial_w = fb * (x * x - b0 * b0) / 2
                    prob += _integrate(fa * cdf_w, lo, hi)
                    ea += _integrate(fa * x * cdf_w, lo, hi)
                    eb += _integrate(fa * partial_w, lo, hi)
                # above b1 the whole W piece lies below V
                lo = max(a0, b1)
                if a1 > lo:
                    mass_w = fb * (b1 - b0)
                    prob += fa * mass_w * (a1 - lo)
                    ea += fa * mass_w * (a1 * a1 - lo * lo) / 2
                    eb += fa * (a1 - lo) * fb * (b1 * b1 - b0 * b0) / 2
        return float(prob), float(ea), float(eb)

    def __repr__(self) -> str:
        body = ", ".join(f"({a:.6g}, {b:.6g}, {w:.6g})" for a, b, w in self.pieces)
        return f"PiecewiseDistribution([{body}])"


def _integrate(poly: Polynomial, lo: float, hi: float) -> float:
    antiderivative = poly.integ()
    return float(antiderivative(hi) - antiderivative(lo))
