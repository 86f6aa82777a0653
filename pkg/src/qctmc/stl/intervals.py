"""Finite unions of intervals over [0, B] whose endpoints may be algebraic.

An endpoint is a base (a rational or a refinable root) plus a rational
offset.  Two endpoints are ordered exactly when both are rational and by
refining the roots involved otherwise.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction

from ..roots import RootRef, compare_roots
from ..scalars import to_fraction


@dataclass(frozen=True, eq=False)
class Endpoint:
    base: object  # Fraction or RootRef
    offset: Fraction = Fraction(0)
    open: bool = False

    @classmethod
    def of(cls, x, open_=False, offset=Fraction(0)):
        if isinstance(x, Endpoint):
            return cls(x.base, x.offset + offset, open_)
        if isinstance(x, RootRef):
            if x.exact:
                return cls(x.lo + offset, Fraction(0), open_)
            return cls(x, to_fraction(offset), open_)
        return cls(to_fraction(x) + to_fraction(offset), Fraction(0), open_)

    @property
    def is_rational(self):
        return not isinstance(self.base, RootRef)

    @property
    def value(self):
        """Exact value of a rational endpoint."""
        if not self.is_rational:
            raise TypeError("endpoint is a root, not a rational")
        return self.base + self.offset

    def shift(self, q) -> "Endpoint":
        return Endpoint(self.base, self.offset + to_fraction(q), self.open)

    def with_open(self, open_) -> "Endpoint":
        return Endpoint(self.base, self.offset, open_)

    def bracket(self):
        """Rational (lo, hi) containing the endpoint's position."""
        if self.is_rational:
            return self.value, self.value
        return self.base.lo + self.offset, self.base.hi + self.offset

    def __float__(self):
        lo, hi = self.bracket()
        return float((lo + hi) / 2)

    def __str__(self):
        if self.is_rational:
            return str(self.value)
        s = f"root({self.base.owner})~{float(self.base):.8g}"
        if self.offset:
            s += f"{'+' if self.offset > 0 else '-'}{abs(self.offset)}"
        return s

    __repr__ = __str__


def compare(p: Endpoint, q: Endpoint) -> int:
    """Order the positions of two endpoints (flags ignored)."""
    if p.is_rational and q.is_rational:
        a, b = p.value, q.value
        return (a > b) - (a < b)
    if q.is_rational:
        return p.base.compare_rational(q.value - p.offset)
    if p.is_rational:
        return -q.base.compare_rational(p.value - q.offset)
    return compare_roots(p.base, q.base, q.offset - p.offset)


def _lower_cmp(p, q):
    """Order as lower bounds: a closed end starts before an open one at the same point."""
    c = compare(p, q)
    if c:
        return c
    return (p.open > q.open) - (p.open < q.open)


def _upper_cmp(p, q):
    """Order as upper bounds: an open end stops before a closed one at the same point."""
    c = compare(p, q)
    if c:
        return c
    return (q.open > p.open) - (q.open < p.open)


@dataclass(frozen=True, eq=False)
class Interval:
    lo: Endpoint
    hi: Endpoint

    def is_empty(self):
        c = compare(self.lo, self.hi)
        return c > 0 or (c == 0 and (self.lo.open or self.hi.open))

    def contains(self, t) -> bool:
        p = Endpoint.of(t)
        a, b = compare(self.lo, p), compare(p, self.hi)
        if a > 0 or b > 0:
            return False
        if a == 0 and self.lo.open:
            return False
        if b == 0 and self.hi.open:
            return False
        return True

    def __str__(self):
        if compare(self.lo, self.hi) == 0:
            return f"{{{self.lo}}}"
        return f"{'(' if self.lo.open else '['}{self.lo}, {self.hi}{')' if self.hi.open else ']'}"


def _intersect_pair(a: Interval, b: Interval):
    lo = a.lo if _lower_cmp(a.lo, b.lo) >= 0 else b.lo
    hi = a.hi if _upper_cmp(a.hi, b.hi) <= 0 else b.hi
    iv = Interval(lo, hi)
    return None if iv.is_empty() else iv


def _touch(hi: Endpoint, lo: Endpoint):
    """True when an interval ending at hi and one starting at lo overlap or abut."""
    c = compare(hi, lo)
    return c > 0 or (c == 0 and not (hi.open and lo.open))


class IntervalSet:
    """A normalized finite union of intervals inside [0, horizon]."""

    def __init__(self, intervals, horizon, _normalized=False):
        self.horizon = to_fraction(horizon)
        self.intervals = tuple(intervals) if _normalized else tuple(self._normalize(intervals))

    # ---------------------------------------------------------------- construction
    @classmethod
    def empty(cls, horizon):
        return cls((), horizon, True)

    @classmethod
    def full(cls, horizon):
        return cls.from_bounds([(0, horizon)], horizon)

    @classmethod
    def point(cls, x, horizon):
        return cls([Interval(Endpoint.of(x), Endpoint.of(x))], horizon)

    @classmethod
    def from_bounds(cls, bounds, horizon):
        """From (lo, hi[, lo_open, hi_open]) tuples of rationals or roots."""
        ivs = []
        for b in bounds:
            lo, hi = b[0], b[1]
            lo_open = b[2] if len(b) > 2 else False
            hi_open = b[3] if len(b) > 3 else False
            ivs.append(Interval(Endpoint.of(lo, lo_open), Endpoint.of(hi, hi_open)))
        return cls(ivs, horizon)

    @classmethod
    def from_pieces(cls, pieces, horizon):
        """From ("point", x) and ("open", lo, hi) pieces, or Interval objects."""
        ivs = []
        for p in pieces:
            if isinstance(p, Interval):
                ivs.append(p)
            elif p[0] == "point":
                ivs.append(Interval(Endpoint.of(p[1]), Endpoint.of(p[1])))
            elif p[0] == "open":
                ivs.append(Interval(Endpoint.of(p[1], True), Endpoint.of(p[2], True)))
            else:
                raise ValueError(f"unknown piece {p!r}")
        return cls(ivs, horizon)

    def _normalize(self, intervals):
        window = Interval(Endpoint.of(0), Endpoint.of(self.horizon))
        clipped = []
        for iv in intervals:
            if iv.is_empty():
                continue
            c = _intersect_pair(iv, window)
            if c is not None:
                clipped.append(c)
        clipped.sort(key=functools.cmp_to_key(lambda a, b: _lower_cmp(a.lo, b.lo)))
        out = []
        for iv in clipped:
            if out and _touch(out[-1].hi, iv.lo):
                last = out[-1]
                hi = last.hi if _upper_cmp(last.hi, iv.hi) >= 0 else iv.hi
                out[-1] = Interval(last.lo, hi)
            else:
                out.append(iv)
        return out

    # ---------------------------------------------------------------- queries
    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def is_empty(self):
        return not self.intervals

    def contains(self, t) -> bool:
        return any(iv.contains(t) for iv in self.intervals)

    __contains__ = contains

    def equals(self, other: "IntervalSet") -> bool:
        if self.horizon != other.horizon or len(self) != len(other):
            return False
        for a, b in zip(self, other):
            if compare(a.lo, b.lo) or compare(a.hi, b.hi):
                return False
            if a.lo.open != b.lo.open or a.hi.open != b.hi.open:
                return False
        return True

    def __eq__(self, other):
        return isinstance(other, IntervalSet) and self.equals(other)

    __hash__ = None

    def __str__(self):
        if not self.intervals:
            return "{}"
        return " U ".join(str(iv) for iv in self.intervals)

    def __repr__(self):
        return f"IntervalSet({self}, horizon={self.horizon})"

    # ---------------------------------------------------------------- algebra
    def restrict(self, horizon) -> "IntervalSet":
        return IntervalSet(self.intervals, horizon)


def complement(j: IntervalSet) -> IntervalSet:
    """[0, B] minus j."""
    out = []
    start = Endpoint.of(0)
    for iv in j:
        out.append(Interval(start, iv.lo.with_open(not iv.lo.open)))
        start = iv.hi.with_open(not iv.hi.open)
    out.append(Interval(start, Endpoint.of(j.horizon)))
    return IntervalSet(out, j.horizon)


def intersect(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    if a.horizon != b.horizon:
        raise ValueError("interval sets over different horizons")
    out = []
    for x in a:
        for y in b:
            c = _intersect_pair(x, y)
            if c is not None:
                out.append(c)
    return IntervalSet(out, a.horizon)


def union(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    if a.horizon != b.horizon:
        raise ValueError("interval sets over different horizons")
    return IntervalSet(a.intervals + b.intervals, a.horizon)


def until_set(j1: IntervalSet, j2: IntervalSet, lo, hi, horizon=None) -> IntervalSet:
    """{t : some t' in [lo, hi] has [t, t+t') inside j1 and t+t' in j2}.

    t' = 0 makes the prefix condition vacuous, so 0 in [lo, hi] contributes j2
    itself.  For t' > 0 the prefix [t, t+t') must lie in one maximal interval
    A = <alpha, beta> of j1, so each pair (A, C) of j1 x j2 contributes
    A n ((C n (-inf, beta]) - T) with T = [lo, hi] n (0, inf).
    """
    lo, hi = to_fraction(lo), to_fraction(hi)
    if lo < 0 or hi < lo:
        raise ValueError("until bound must satisfy 0 <= lo <= hi")
    b = j1.horizon if horizon is None else to_fraction(horizon)
    pieces = list(j2.intervals) if lo == 0 else []
    if hi > 0:
        t_lo_open = lo == 0
        for a in j1:
            cap = a.hi.with_open(False)
            for c in j2:
                hi_end = c.hi if _upper_cmp(c.hi, cap) <= 0 else cap
                if Interval(c.lo, hi_end).is_empty():
                    continue
                # Minkowski difference <c1, c2> - <t1, t2> = <c1 - t2, c2 - t1>
                shifted_lo = Endpoint(c.lo.base, c.lo.offset - hi, c.lo.open)
                shifted_hi = Endpoint(hi_end.base, hi_end.offset - lo, hi_end.open or t_lo_open)
                shifted = Interval(shifted_lo, shifted_hi)
                if shifted.is_empty():
                    continue
                piece = _intersect_pair(shifted, a)
                if piece is not None:
                    pieces.append(piece)
    return IntervalSet(pieces, b)
