"""Isolating intervals and refinable references to real roots."""
from __future__ import annotations

import enum
import itertools
import threading
from dataclasses import dataclass
from fractions import Fraction

from flint import acb

from .errors import PrecisionExhausted
from .scalars import DEFAULT_PRECISION, Sign, arb_from_bounds, arb_of, max_precision, precisions, to_fraction, workprec

# Bisection stops once a bracket is narrower than 2**-COMPARE_BITS.
COMPARE_BITS = 256


class Kind(enum.Enum):
    SIGN_CHANGE = "sign-change"
    EXACT = "exact"


@dataclass(frozen=True)
class IsolatingInterval:
    lo: Fraction
    hi: Fraction
    kind: Kind = Kind.SIGN_CHANGE

    def __post_init__(self):
        object.__setattr__(self, "lo", to_fraction(self.lo))
        object.__setattr__(self, "hi", to_fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError("isolating interval with lo > hi")
        if self.kind is Kind.EXACT and self.lo != self.hi:
            raise ValueError("an exact root is a single point")

    @property
    def width(self):
        return self.hi - self.lo

    def __contains__(self, x):
        return self.lo <= to_fraction(x) <= self.hi


def sign_at(f, t, cap=None) -> Sign:
    """Certified sign of f(t) for a rational t, escalating precision."""
    t = to_fraction(t)
    for prec in precisions(DEFAULT_PRECISION, max_precision() if cap is None else cap):
        with workprec(prec):
            v = f.ball(arb_of(t), prec)
        if v > 0:
            return Sign.POSITIVE
        if v < 0:
            return Sign.NEGATIVE
    return Sign.UNDETERMINED


_ids = itertools.count()


class _Bracket:
    """Shared best-known bracket of one root, so refinements are remembered."""

    def __init__(self, lo, hi, sign_lo, sign_hi):
        self.lo, self.hi = lo, hi
        self.sign_lo, self.sign_hi = sign_lo, sign_hi
        self.lock = threading.Lock()


class RootRef:
    """A real root of ``function`` inside an isolating interval.

    ``sign`` evaluates the function's sign at a rational point; ``owner`` names
    the function for diagnostics.  Refinement returns a new reference to the
    same root; all references to one root share their best bracket.
    """

    __slots__ = ("owner", "function", "interval", "_sign", "_bracket", "uid")

    def __init__(self, owner, function, interval: IsolatingInterval, sign=None, _bracket=None, uid=None):
        self.owner = owner
        self.function = function
        self.interval = interval
        self._sign = sign if sign is not None else (lambda t: sign_at(function, t))
        if _bracket is None:
            if interval.kind is Kind.EXACT:
                _bracket = _Bracket(interval.lo, interval.hi, Sign.UNDETERMINED, Sign.UNDETERMINED)
            else:
                s_lo, s_hi = self._sign(interval.lo), self._sign(interval.hi)
                if s_lo == Sign.UNDETERMINED or s_hi == Sign.UNDETERMINED or s_lo == s_hi:
                    raise PrecisionExhausted(f"no certified sign change on [{interval.lo}, {interval.hi}] for {owner}")
                _bracket = _Bracket(interval.lo, interval.hi, s_lo, s_hi)
        self._bracket = _bracket
        self.uid = next(_ids) if uid is None else uid

    @property
    def exact(self):
        return self.interval.kind is Kind.EXACT

    @property
    def lo(self):
        return self._bracket.lo

    @property
    def hi(self):
        return self._bracket.hi

    @property
    def width(self):
        return self._bracket.hi - self._bracket.lo

    def same_root(self, other):
        return isinstance(other, RootRef) and self._bracket is other._bracket

    def __eq__(self, other):
        return self.same_root(other)

    def __hash__(self):
        return id(self._bracket)

    def _bisect(self):
        b = self._bracket
        with b.lock:
            lo, hi = b.lo, b.hi
            if lo == hi:
                return
            w = hi - lo
            for frac in (Fraction(1, 2), Fraction(3, 7), Fraction(4, 7), Fraction(1, 3), Fraction(2, 3)):
                m = lo + w * frac
                s = self._sign(m)
                if s != Sign.UNDETERMINED:
                    break
            else:
                raise PrecisionExhausted(f"sign of {self.owner} undetermined near {float(lo + w / 2):.17g}")
            if s == b.sign_lo:
                b.lo = m
            else:
                b.hi = m

    def refine_to(self, width) -> "RootRef":
        """Bisect until the bracket is at most ``width`` wide."""
        width = to_fraction(width)
        floor = Fraction(1, 2**COMPARE_BITS)
        while self.width > width:
            if self.width < floor:
                raise PrecisionExhausted(f"root of {self.owner} needs a bracket narrower than 2^-{COMPARE_BITS}")
            self._bisect()
        return self._snapshot()

    def _snapshot(self):
        kind = self.interval.kind
        iv = IsolatingInterval(self.lo, self.hi, kind)
        return RootRef(self.owner, self.function, iv, self._sign, self._bracket, self.uid)

    def enclose(self, prec=DEFAULT_PRECISION):
        self.refine_to(Fraction(1, 2**prec))
        with workprec(prec + 8):
            return acb(arb_from_bounds(self.lo, self.hi))

    def compare_rational(self, q) -> int:
        """-1, 0 or 1 as the root is below, equal to, or above q."""
        q = to_fraction(q)
        if self.exact:
            return (self.lo > q) - (self.lo < q)
        floor = Fraction(1, 2**COMPARE_BITS)
        while True:
            if q <= self.lo:
                # the root is strictly inside its sign-change bracket
                return 1
            if q >= self.hi:
                return -1
            if self.width < floor:
                raise PrecisionExhausted(f"cannot order root of {self.owner} against {q}")
            s = self._sign(q)
            if s != Sign.UNDETERMINED:
                b = self._bracket
                with b.lock:
                    if s == b.sign_lo:
                        b.lo = max(b.lo, q)
                    else:
                        b.hi = min(b.hi, q)
                continue
            self._bisect()

    def __float__(self):
        return float((self.lo + self.hi) / 2)

    def __repr__(self):
        return f"RootRef({self.owner}, [{float(self.lo):.12g}, {float(self.hi):.12g}])"


def refine_root(r: RootRef, target_width) -> RootRef:
    target_width = to_fraction(target_width)
    if r.width <= target_width:
        return r
    return r.refine_to(target_width)


def compare_roots(a: RootRef, b: RootRef, offset=Fraction(0)) -> int:
    """Order a against b + offset; equal only for the same root and offset 0."""
    offset = to_fraction(offset)
    if a.same_root(b):
        return (0 > offset) - (0 < offset)
    if b.exact:
        return a.compare_rational(b.lo + offset)
    if a.exact:
        return -b.compare_rational(a.lo - offset)
    if _coincide(a, b):
        return (0 > offset) - (0 < offset)
    floor = Fraction(1, 2**COMPARE_BITS)
    while True:
        if a.hi <= b.lo + offset:
            return -1
        if a.lo >= b.hi + offset:
            return 1
        if a.width < floor and b.width < floor:
            raise PrecisionExhausted(f"cannot separate roots of {a.owner} and {b.owner} (possible shared root)")
        if a.width >= b.width:
            a._bisect()
        else:
            b._bisect()


def _same_function(f, g):
    """Exact equality through the derivative sequences at 0, when both have one."""
    if f is g:
        return True
    sf, sg = getattr(f, "source", None), getattr(g, "source", None)
    if sf is None or sg is None or sf.charpoly != sg.charpoly:
        return False
    return sf.terms(sf.order) == sg.terms(sg.order)


def _coincide(a: RootRef, b: RootRef) -> bool:
    """Whether two sign-change references of one function name the same root.

    Each bracket holds exactly one root, so a sign change across the overlap
    of the brackets puts both roots there.  The brackets are then narrowed to
    the overlap.
    """
    if not _same_function(a.function, b.function):
        return False
    lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
    if lo >= hi:
        return False
    s_lo, s_hi = a._sign(lo), a._sign(hi)
    if Sign.UNDETERMINED in (s_lo, s_hi) or s_lo == s_hi:
        return False
    for r in (a, b):
        br = r._bracket
        with br.lock:
            br.lo, br.hi = lo, hi
            br.sign_lo, br.sign_hi = s_lo, s_hi
    return True


def make_pairwise_disjoint(roots):
    """Refine until brackets of different roots are disjoint; return them ordered."""
    roots = list(roots)
    for i in range(len(roots)):
        for j in range(i):
            compare_roots(roots[i], roots[j])
    snap = [r._snapshot() for r in roots]
    order = sorted(range(len(snap)), key=lambda k: (snap[k].lo, snap[k].hi))
    return [snap[k] for k in order]
