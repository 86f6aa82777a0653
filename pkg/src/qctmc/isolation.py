"""Certified real-root isolation for real exponential polynomials, and the
solution sets of atomic propositions."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from flint import arb, fmpq, fmpq_poly

from .algebraic import AlgebraicNumber
from .errors import DepthExceeded, PrecisionExhausted, ReconstructionFailure
from .exppoly import RealExpPoly, atomic_exppoly
from .roots import (
    IsolatingInterval,
    Kind,
    RootRef,
    compare_roots,
    make_pairwise_disjoint,
    refine_root,
    sign_at,
)
from .scalars import (
    DEFAULT_PRECISION,
    Sign,
    arb_bounds,
    arb_of,
    Surd,
    constant_value,
    max_precision,
    precisions,
    to_fraction,
    workprec,
)

__all__ = [
    "IsolatingInterval", "Kind", "RootRef", "ExponentBasis", "PolynomialForm", "IsolationStats",
    "exponent_basis", "polynomialize", "univariate_isolate", "isolate", "find_roots", "refine_root",
    "make_pairwise_disjoint", "compare_roots", "solve_atomic", "DEFAULT_EPSILON",
]

DEFAULT_EPSILON = Fraction(1, 1000)
DEFAULT_DEPTH_CAP = 64
BOUND_PIECES = 8


@dataclass
class IsolationStats:
    calls: int = 0
    max_depth: int = 0
    final_precision: int = DEFAULT_PRECISION


# ------------------------------------------------------------------ subdivision isolation

def _abs_upper(f: RealExpPoly, lo, hi, prec):
    """Rational upper bound of |f| over [lo, hi]."""
    ball = f.range_ball(lo, hi, prec, BOUND_PIECES)
    if not ball.is_finite():
        raise PrecisionExhausted("derivative bound is not finite")
    return arb_bounds(ball.abs_upper())[1]


def _abs_exceeds(f: RealExpPoly, t, bound, prec, strict=True):
    """Certified |f(t)| > bound (>= when not strict); False when undecided."""
    with workprec(prec):
        v = f.ball(arb_of(t), prec).abs_lower()
        b = arb_of(bound)
        return bool(v > b) if strict else bool(v >= b)


def _certified_sign(f, t):
    s = sign_at(f, t)
    if s == Sign.UNDETERMINED:
        raise PrecisionExhausted(f"sign of the function at t = {t} is undetermined at the precision cap")
    return int(s)


def isolate(phi: RealExpPoly, window, split=2, depth_cap=DEFAULT_DEPTH_CAP, stats=None):
    """Isolating intervals of the real roots of phi in [l, u].

    phi(l) and phi(u) must be nonzero.  The window is cut into ``split``
    pieces of width delta.  With M and M' bounding |phi'| and |phi''| on the
    window, a piece is dropped when |phi| > M delta at one end, accepted when
    |phi'| >= M' delta makes phi monotone on it (kept if phi changes sign),
    and subdivided otherwise.  Each returned interval holds exactly one root,
    and phi changes sign there.
    """
    l, u = (to_fraction(x) for x in window)
    if l > u:
        raise ValueError("empty window")
    stats = IsolationStats() if stats is None else stats
    stats.calls += 1
    out = []
    if l == u or phi.is_zero():
        return out
    _isolate(phi, phi.derivative, phi.derivative.derivative, l, u, split, 0, depth_cap, stats, out)
    return out


def _isolate(phi, d1, d2, l, u, n, depth, cap, stats, out):
    if depth > cap:
        raise DepthExceeded(
            f"recursion passed depth {cap} on [{float(l):.17g}, {float(u):.17g}]; "
            "the function may have a repeated root or share a root with its derivative")
    stats.max_depth = max(stats.max_depth, depth)
    prec = DEFAULT_PRECISION + 2 * depth
    stats.final_precision = max(stats.final_precision, prec)
    m1 = _abs_upper(d1, l, u, prec)
    m2 = _abs_upper(d2, l, u, prec)
    delta = (u - l) / n

    def pt(k):
        return min(l + k * delta, u)

    i = 0
    while i < n:
        a, b, c = pt(i), pt(i + 1), pt(i + 2)
        if _abs_exceeds(phi, a, m1 * delta, prec):
            i += 1
        elif _abs_exceeds(phi, b, m1 * delta, prec):
            i += 2
        elif _abs_exceeds(d1, a, m2 * delta, prec, strict=False):
            if _certified_sign(phi, a) * _certified_sign(phi, b) < 0:
                out.append(IsolatingInterval(a, b))
            i += 1
        elif _abs_exceeds(d1, b, m2 * delta, prec, strict=False):
            if _certified_sign(phi, a) * _certified_sign(phi, c) < 0:
                out.append(IsolatingInterval(a, c))
            i += 2
        else:
            _isolate(phi, d1, d2, a, b, n, depth + 1, cap, stats, out)
            i += 1


# ------------------------------------------------------------------ exponent basis

@dataclass(frozen=True)
class ExponentBasis:
    """alpha_i = sum_j combos[i][j] * basis[j] with nonnegative integers."""

    basis: tuple
    combos: tuple
    exponents: tuple = ()

    def combination(self, alpha):
        alpha = _as_alg(alpha)
        if alpha in self.exponents:
            return self.combos[self.exponents.index(alpha)]
        if alpha.is_zero():
            return (0,) * len(self.basis)
        rel = _find_relation(alpha, list(self.basis), 8)
        if rel is None:
            raise ValueError(f"exponent {alpha} is not a small combination of the basis")
        return tuple(rel.get(j, 0) for j in range(len(self.basis)))


def _as_alg(a):
    if isinstance(a, AlgebraicNumber):
        return a
    return AlgebraicNumber.rational(to_fraction(a))


def _rational_gcd(qs):
    num, den = 0, 1
    for q in qs:
        num = math.gcd(num, q.numerator)
        den = den * q.denominator // math.gcd(den, q.denominator)
    return Fraction(num, den)


def _combine(coeffs, basis):
    total = AlgebraicNumber.rational(0)
    for n, mu in zip(coeffs, basis):
        if n:
            total = total + mu.scale(n)
    return total


def _find_relation(a, basis, cmax):
    """Nonnegative n with a = sum n_j basis_j using one or two basis elements."""
    if not basis:
        return None
    za = complex(a)
    zs = [complex(b) for b in basis]
    cands = [({j: n}, n * zj) for j, zj in enumerate(zs) for n in range(1, cmax + 1)]
    for j, k in itertools.combinations(range(len(zs)), 2):
        for n in range(1, cmax + 1):
            for m in range(1, cmax + 1):
                cands.append(({j: n, k: m}, n * zs[j] + m * zs[k]))
    for rel, z in cands:
        if abs(z - za) < 1e-9 * (1 + abs(za)):
            if _combine([rel.get(j, 0) for j in range(len(basis))], basis) == a:
                return rel
    return None


def exponent_basis(exponents, max_coefficient=4) -> ExponentBasis:
    """A basis mu_1..mu_k such that every exponent is a nonnegative integer
    combination of it.

    Irrational exponents are visited by increasing modulus.  Each one is
    written through the current basis when a small relation exists (checked
    exactly) and joins the basis otherwise.  Rational exponents left over are
    written through the gcd of their sign class.
    """
    exps = [_as_alg(a) for a in exponents]
    if len(set(exps)) != len(exps):
        raise ValueError("exponents must be pairwise distinct")
    irr = sorted((a for a in exps if not a.is_rational()), key=lambda a: (abs(complex(a)), a.sort_key()))
    basis, found = [], {}
    for a in irr:
        rel = _find_relation(a, basis, max_coefficient)
        if rel is None:
            found[a] = {len(basis): 1}
            basis.append(a)
        else:
            found[a] = rel
    leftovers = []
    for a in exps:
        if not a.is_rational() or a.is_zero():
            continue
        rel = _find_relation(a, basis, max_coefficient)
        if rel is None:
            leftovers.append(a.as_fraction())
        else:
            found[a] = rel
    for positive in (False, True):
        cls = [q for q in leftovers if (q > 0) == positive]
        if cls:
            g = _rational_gcd(cls) * (1 if positive else -1)
            basis.append(AlgebraicNumber.rational(g))
            for q in cls:
                found[AlgebraicNumber.rational(q)] = {len(basis) - 1: int(q / g)}
    k = len(basis)
    combos = []
    for a in exps:
        rel = {} if a.is_zero() else found[a]
        combos.append(tuple(rel.get(j, 0) for j in range(k)))
    return ExponentBasis(tuple(basis), tuple(combos), tuple(exps))


# ------------------------------------------------------------------ polynomial form

@dataclass
class PolynomialForm:
    """f(t) = P(t, e^{mu_1 t}, ..., e^{mu_k t}) as {(t power, (n_1..n_k)): coefficient}."""

    basis: ExponentBasis
    terms: dict

    @property
    def nvars(self):
        return len(self.basis.basis)

    def uses_t(self):
        return any(tp > 0 for tp, _ in self.terms)

    def evaluate(self, t, precision=DEFAULT_PRECISION):
        with workprec(precision):
            tt = arb_of(t)
            ys = [(mu.enclose(precision) * tt).exp() for mu in self.basis.basis]
            total = arb(0)
            for (tp, ns), c in self.terms.items():
                v = c.enclose(precision) * tt ** tp
                for y, n in zip(ys, ns):
                    v *= y ** n
                total = total + v
        return total


def polynomialize(f, basis: ExponentBasis | None = None) -> PolynomialForm:
    """Rewrite f over an exponent basis; the result is spot-checked against f."""
    cf = f.complex_form if isinstance(f, RealExpPoly) else f
    if basis is None:
        basis = exponent_basis(cf.exponents)
    terms = {}
    for term in cf.terms:
        try:
            ns = basis.combination(term.exponent)
        except ValueError:
            raise ReconstructionFailure(f"exponent {term.exponent} is not covered by the basis") from None
        for r, c in enumerate(term.coeffs):
            terms[(r, tuple(ns))] = c
    form = PolynomialForm(basis, terms)
    if cf.terms:
        for t in (Fraction(0), Fraction(1, 3), Fraction(1), Fraction(5, 2)):
            if not form.evaluate(t).overlaps(cf.evaluate(t)):
                raise ReconstructionFailure(f"polynomial form disagrees with the function at t = {t}")
    return form


# ------------------------------------------------------------------ univariate cases

def _fq(q):
    q = to_fraction(q)
    return fmpq(q.numerator, q.denominator)


def _exact_rational(c):
    v = constant_value(c)
    if v is None or not v.is_rational() or not v.is_real():
        return None
    return v.as_fraction()


def _squarefree(g: fmpq_poly):
    if g.degree() <= 0:
        return g
    return g / g.gcd(g.derivative())


def _poly_real_roots(g: fmpq_poly, lo, hi):
    """Real roots of g in [lo, hi] as sorted, pairwise disjoint rational brackets.

    A bracket (a, a) is an exact rational root.  Otherwise g has exactly one
    root in (a, b) and none at a or b.
    """
    if g.degree() <= 0:
        return []
    _, facs = g.factor()
    exact, irrational = [], [h for h, _ in facs if h.degree() > 1]
    for h, _ in facs:
        if h.degree() == 1:
            c = h.coeffs()
            r = -to_fraction(c[0]) / to_fraction(c[1])
            if lo <= r <= hi:
                exact.append((r, r))
    for prec in precisions(DEFAULT_PRECISION, max_precision()):
        found, ok = [], True
        with workprec(prec):
            for h in irrational:
                for z, _ in h.complex_roots():
                    if not z.imag.is_zero():
                        continue
                    a, b = arb_bounds(z.real)
                    if b < lo or a > hi:
                        continue
                    if not (lo < a and b < hi):
                        ok = False
                    found.append((a, b))
        out = sorted(exact + found)
        if ok and all(out[k][1] < out[k + 1][0] for k in range(len(out) - 1)):
            return out
    raise PrecisionExhausted("polynomial roots could not be separated from each other or the window ends")


def univariate_isolate(g, window):
    """Isolating intervals of the roots of a rational polynomial in t within the window."""
    if not isinstance(g, fmpq_poly):
        g = fmpq_poly([_fq(c) for c in g])
    lo, hi = (to_fraction(x) for x in window)
    g = _squarefree(g)
    return [IsolatingInterval(a, b, Kind.EXACT if a == b else Kind.SIGN_CHANGE)
            for a, b in _poly_real_roots(g, lo, hi)]


class _PolySign:
    """Exact sign of a rational polynomial at a rational point."""

    def __init__(self, g: fmpq_poly):
        self.g = g

    def __call__(self, t):
        v = to_fraction(self.g(_fq(t)))
        return Sign((v > 0) - (v < 0))


def _t_polynomial(f: RealExpPoly):
    """f as an exact polynomial in t when its only exponent is 0."""
    cf = f.complex_form
    if cf is None:
        return None
    if not cf.terms:
        return fmpq_poly([0])
    if len(cf.terms) != 1 or not cf.terms[0].exponent.is_zero():
        return None
    coeffs = [_exact_rational(c) for c in cf.terms[0].coeffs]
    if any(c is None for c in coeffs):
        return None
    return fmpq_poly([_fq(c) for c in coeffs])


def _y_polynomial(f: RealExpPoly):
    """(g, mu) with f(t) = e^{s mu t} g(e^{mu t}), mu > 0 rational and s an integer."""
    cf = f.complex_form
    if cf is None or not cf.terms:
        return None
    if not all(t.exponent.is_rational() and len(t.coeffs) == 1 for t in cf.terms):
        return None
    qs = [t.exponent.as_fraction() for t in cf.terms]
    nz = [abs(q) for q in qs if q != 0]
    coeffs = [_exact_rational(t.coeffs[0]) for t in cf.terms]
    if not nz or any(c is None for c in coeffs):
        return None
    mu = _rational_gcd(nz)
    powers = [int(q / mu) for q in qs]
    shift = min(powers)
    g = [fmpq(0)] * (max(powers) - shift + 1)
    for p, c in zip(powers, coeffs):
        g[p - shift] += _fq(c)
    return fmpq_poly(g), mu


def _log_over(y, mu, prec):
    """Rational bounds of log(y) / mu."""
    with workprec(prec):
        return arb_bounds(arb_of(y).log() / arb_of(mu))


def _point_between(y_lo, y_hi, mu):
    """A rational t with y_lo < e^{mu t} < y_hi (y_lo may be 0)."""
    for prec in (64, 128, 256, 512, 1024, 2048):
        hi_t = _log_over(y_hi, mu, prec)[0]
        if y_lo <= 0:
            return hi_t - 1
        lo_t = _log_over(y_lo, mu, prec)[1]
        if lo_t < hi_t:
            return (lo_t + hi_t) / 2
    raise PrecisionExhausted("root images under the logarithm could not be separated")


def _y_roots(f, g, mu, l, u, owner):
    """Roots of f in [l, u] through y = e^{mu t}; g is squarefree with g(0) != 0."""
    with workprec(128):
        ya = arb_bounds(arb_of(mu * l).exp())[0]
        yb = arb_bounds(arb_of(mu * u).exp())[1]
    ys = [r for r in _poly_real_roots(g, Fraction(0), yb + 1) if r[0] > 0]
    refs = []
    for k, (y1, y2) in enumerate(ys):
        if y2 < ya:
            continue
        if y1 == y2 == 1:
            if l <= 0 <= u:
                refs.append(RootRef(owner, f, IsolatingInterval(0, 0, Kind.EXACT)))
            continue
        left = ys[k - 1][1] if k else Fraction(0)
        right = ys[k + 1][0] if k + 1 < len(ys) else y2 + 1
        # t-points whose images lie strictly in the gaps around this root
        lo_t = max(_point_between(left, y1, mu), l)
        hi_t = min(_point_between(y2, right, mu), u)
        if lo_t >= hi_t:
            continue
        s_lo, s_hi = sign_at(f, lo_t), sign_at(f, hi_t)
        if Sign.UNDETERMINED in (s_lo, s_hi):
            raise PrecisionExhausted(f"sign of {owner} undetermined near a window end")
        if s_lo != s_hi:
            refs.append(RootRef(owner, f, IsolatingInterval(lo_t, hi_t)))
    return refs


# ------------------------------------------------------------------ orchestration

def find_roots(f: RealExpPoly, window, owner="phi", stats=None, depth_cap=DEFAULT_DEPTH_CAP):
    """Real roots of f in [l, u] as RootRefs.

    A polynomial in t, or a polynomial in one rational exponential, is solved
    through its rational-coefficient polynomial.  Anything else goes through
    subdivision isolation, which needs f(l) and f(u) nonzero.  An exact zero
    at l = 0 is reported as an exact root and cut away with ``clear_left``.
    """
    l, u = (to_fraction(x) for x in window)
    stats = IsolationStats() if stats is None else stats
    tp = _t_polynomial(f)
    if tp is not None:
        if tp.is_zero():
            raise DepthExceeded(f"{owner} vanishes identically")
        stats.calls += 1
        sq = _squarefree(tp)
        return [RootRef(owner, f, iv, _PolySign(sq)) for iv in univariate_isolate(sq, (l, u))]
    yp = _y_polynomial(f)
    if yp is not None:
        stats.calls += 1
        g, mu = yp
        return _y_roots(f, _squarefree(g), mu, l, u, owner)
    head = []
    if l == 0 < u and sign_at_zero(f) == 0:
        head = [RootRef(owner, f, IsolatingInterval(0, 0, Kind.EXACT))]
        l = clear_left(f, min(u, DEFAULT_EPSILON))
    return head + [RootRef(owner, f, iv) for iv in isolate(f, (l, u), depth_cap=depth_cap, stats=stats)]


def _exact_derivatives_at_zero(f: RealExpPoly, n):
    src = f.source
    if src is None:
        return None
    return [to_fraction(x) for x in src.terms(n)]


def _sign_at_zero_of(g: RealExpPoly):
    """Sign of g(0), exactly when the coefficients allow, else from a ball."""
    vals = [constant_value(t.p[0]) if t.p else Surd() for t in g.terms]
    if all(v is not None for v in vals):
        total = sum(vals, Surd()).real
        if total.is_zero():
            return 0
    s = sign_at(g, 0)
    if s == Sign.UNDETERMINED:
        raise PrecisionExhausted("sign at t = 0 is undetermined")
    return int(s)


def _zero_order(f: RealExpPoly, limit=32):
    """(k, f^(k)) for the first derivative not vanishing at t = 0."""
    seq = _exact_derivatives_at_zero(f, limit)
    if seq is not None:
        k = next((j for j, v in enumerate(seq) if v != 0), None)
        if k is None:
            raise PrecisionExhausted("cannot certify the behaviour of the function near t = 0")
        dk = f
        for _ in range(k):
            dk = dk.derivative
        return k, dk
    dk = f
    for k in range(limit):
        if _sign_at_zero_of(dk) != 0:
            return k, dk
        dk = dk.derivative
    raise PrecisionExhausted("cannot certify the behaviour of the function near t = 0")


def clear_left(f: RealExpPoly, eps):
    """A positive eps' <= eps such that f has no root in (0, eps'], given f(0) = 0."""
    _, dk = _zero_order(f)
    prec = 2 * DEFAULT_PRECISION
    e = eps
    for _ in range(60):
        if not dk.range_ball(Fraction(0), e, prec, BOUND_PIECES).contains(0):
            return e
        e /= 2
    raise PrecisionExhausted("could not clear a neighbourhood of t = 0 of roots")


def sign_at_zero(g: RealExpPoly):
    seq = _exact_derivatives_at_zero(g, 1)
    if seq is not None:
        return (seq[0] > 0) - (seq[0] < 0)
    return _sign_at_zero_of(g)


# ------------------------------------------------------------------ atomic solution sets

def _gap_point(left, right):
    """A rational strictly between two consecutive marks, or None if they coincide."""
    while True:
        lo = left.hi if isinstance(left, RootRef) else left
        hi = right.lo if isinstance(right, RootRef) else right
        if lo < hi:
            return (lo + hi) / 2
        loose = [r for r in (left, right) if isinstance(r, RootRef) and not r.exact]
        if not loose:
            return None
        max(loose, key=lambda r: r.width)._bisect()


def factor_name(poly, end):
    """Display name of the function p - end."""
    s = str(poly)
    if end:
        s += f" - {end}" if end > 0 else f" + {-end}"
    return s


def _atom_parts(atom):
    if isinstance(atom, tuple):
        return atom
    return atom.poly, atom.bound


def solve_atomic(atom, signals, horizon, epsilon=DEFAULT_EPSILON, stats=None, cache=None):
    """{t in [0, b] : p(x(t)) in I} as an IntervalSet.

    ``atom`` is a (Polynomial, Bound) pair or anything with ``poly`` and
    ``bound``; ``horizon`` is b or the window (0, b).  Passing the same
    ``cache`` dict to several calls lets atoms that share a factor share its
    roots.
    """
    from .stl.intervals import IntervalSet

    poly, bound = _atom_parts(atom)
    if isinstance(horizon, tuple):
        if to_fraction(horizon[0]) != 0:
            raise ValueError("the solution window must start at 0")
        horizon = horizon[1]
    b = to_fraction(horizon)
    stats = IsolationStats() if stats is None else stats
    if bound.is_everything():
        return IntervalSet.full(b)
    if bound.is_empty():
        return IntervalSet.empty(b)
    if poly.is_constant():
        return IntervalSet.full(b) if bound.contains(poly.constant_term()) else IntervalSet.empty(b)
    point_bound = bound.lo is not None and bound.lo == bound.hi
    af = atomic_exppoly(poly, bound, signals)
    factors = af.factors[:1] if point_bound else list(af.factors)

    def closed(side):
        return bound.lo_closed if side == "lo" else bound.hi_closed

    live = []
    for g, side in factors:
        if g.is_zero():
            # p(x(t)) sits on this end of I for all t
            if not closed(side):
                return IntervalSet.empty(b)
            continue
        live.append((g, side))
    if not live:
        return IntervalSet.full(b)

    def wanted(s, side):
        if point_bound:
            return s == 0
        if s == 0:
            return closed(side)
        return s > 0 if side == "lo" else s < 0

    zero_signs = [sign_at_zero(g) for g, _ in live]
    zero_member = all(wanted(s, side) for s, (_, side) in zip(zero_signs, live))
    if b == 0:
        return IntervalSet.point(Fraction(0), b) if zero_member else IntervalSet.empty(b)

    roots, side_of = [], {}
    for s0, (g, side) in zip(zero_signs, live):
        owner = factor_name(poly, bound.lo if side == "lo" else bound.hi)
        start = clear_left(g, epsilon) if s0 == 0 else Fraction(0)
        key = (owner, start, b)
        found = None if cache is None else cache.get(key)
        if found is None:
            found = find_roots(g, (start, b), owner=owner, stats=stats)
            if cache is not None:
                found = cache.setdefault(key, found)
        for r in found:
            if r.exact and r.lo == 0:
                continue
            roots.append(r)
            side_of[r] = side
    ordered = make_pairwise_disjoint(roots)

    def inside(t):
        for g, side in live:
            s = sign_at(g, t)
            if s == Sign.UNDETERMINED:
                raise PrecisionExhausted(f"membership at t = {t} is undetermined")
            if not wanted(int(s), side):
                return False
        return True

    pieces = []
    if zero_member:
        pieces.append(("point", Fraction(0)))
    marks = [Fraction(0)] + ordered + [b]
    last_inside = False
    for k in range(len(marks) - 1):
        left, right = marks[k], marks[k + 1]
        m = _gap_point(left, right)
        if m is None:
            last_inside = False
            continue
        last_inside = inside(m)
        if last_inside:
            pieces.append(("open", left, right))
    end_is_root = bool(ordered) and ordered[-1].exact and ordered[-1].lo == b
    if last_inside and not end_is_root:
        pieces.append(("point", b))
    for r in ordered:
        if wanted(0, side_of[r]):
            pieces.append(("point", r))
    return IntervalSet.from_pieces(pieces, b)
