"""Exponential polynomials sum_i beta_i(t) * exp(alpha_i t).

Exponents are exact ``AlgebraicNumber`` values, so merging equal exponents is
an exact operation.  Coefficients are recipes (``scalars.Expr``) that can be
re-evaluated at any precision.  An ExpPoly built from an exact rational
derivative sequence keeps that sequence (``source``) so that polynomial
expressions of such signals can be formed exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from flint import acb, acb_mat, arb, fmpq, fmpq_poly

from .algebraic import AlgebraicNumber
from .errors import IllConditioned, RealnessViolation, UnknownSignal
from .scalars import (
    DEFAULT_PRECISION,
    Const,
    Expr,
    Im,
    Re,
    RealEnclosure,
    Wrapped,
    arb_from_bounds,
    arb_of,
    as_expr,
    constant_value,
    max_precision,
    precisions,
    simplify_add,
    simplify_mul,
    simplify_neg,
    to_fraction,
    workprec,
)

ZERO = Const(0)


def _is_zero(c):
    v = constant_value(c)
    return v is not None and v.is_zero()


def _poly_add(p, q):
    n = max(len(p), len(q))
    out = [simplify_add(p[i] if i < len(p) else ZERO, q[i] if i < len(q) else ZERO) for i in range(n)]
    return _trim(out)


def _poly_mul(p, q):
    if not p or not q:
        return ()
    out = [ZERO] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] = simplify_add(out[i + j], simplify_mul(a, b))
    return _trim(out)


def _trim(coeffs):
    coeffs = list(coeffs)
    while coeffs and _is_zero(coeffs[-1]):
        coeffs.pop()
    return tuple(coeffs)


# ------------------------------------------------------------------ sequences

def berlekamp_massey(seq):
    """Minimal characteristic polynomial (monic fmpq_poly) of a rational sequence."""
    s = [_fq(x) for x in seq]
    c, b = [fmpq(1)], [fmpq(1)]
    length, shift, last = 0, 1, fmpq(1)
    for n in range(len(s)):
        d = s[n]
        for i in range(1, length + 1):
            if i < len(c):
                d += c[i] * s[n - i]
        if d == 0:
            shift += 1
            continue
        coef = d / last
        new = c + [fmpq(0)] * max(0, len(b) + shift - len(c))
        for i, bi in enumerate(b):
            new[i + shift] -= coef * bi
        if 2 * length <= n:
            b, last, length, shift = c, d, n + 1 - length, 1
        else:
            shift += 1
        c = new
    c = c + [fmpq(0)] * max(0, length + 1 - len(c))
    return fmpq_poly([c[length - i] for i in range(length + 1)])


class RationalSequence:
    """Exact derivative sequence f^(j)(0), extendable through its recurrence."""

    def __init__(self, terms, charpoly: fmpq_poly):
        self.charpoly = charpoly
        self.order = charpoly.degree()
        self._terms = [_fq(x) for x in terms]
        if len(self._terms) < self.order:
            raise ValueError("not enough initial terms for the recurrence")
        self._rec = [-c for c in charpoly.coeffs()[: self.order]]

    def terms(self, n):
        t = self._terms
        k = self.order
        while len(t) < n:
            j = len(t)
            t.append(sum((self._rec[i] * t[j - k + i] for i in range(k)), fmpq(0)))
        return t[:n]

    def __getitem__(self, j):
        return self.terms(j + 1)[j]


class _VandermondeSystem:
    """Coefficients of t^r e^{lambda t} matching a derivative sequence."""

    def __init__(self, roots, seq):
        self.roots = roots  # [(AlgebraicNumber, multiplicity)]
        self.seq = seq
        self.cache = {}

    def solution(self, prec):
        for p in precisions(prec, max(prec, max_precision())):
            hit = self.cache.get(p)
            if hit is not None:
                return hit
            sol = self._solve(p)
            if sol is not None:
                self.cache[p] = sol
                return sol
        raise IllConditioned("confluent Vandermonde system could not be certified")

    def _solve(self, prec):
        n = sum(m for _, m in self.roots)
        with workprec(prec + 16):
            lams = [lam.enclose(prec + 16) for lam, _ in self.roots]
            a = acb_mat(n, n)
            col = 0
            for lam, (_, m) in zip(lams, self.roots):
                for r in range(m):
                    for j in range(n):
                        if j < r:
                            continue
                        falling = math.perm(j, r)
                        a[j, col] = falling * lam ** (j - r) if j > r else acb(falling)
                    col += 1
            rhs = acb_mat(n, 1, [acb(arb(x)) for x in self.seq[:n]])
            try:
                x = a.solve(rhs)
            except ZeroDivisionError:
                return None
        vals = [x[i, 0] for i in range(n)]
        if not all(v.is_finite() for v in vals):
            return None
        return vals


class SolvedCoefficient(Expr):
    def __init__(self, system, index):
        self.system = system
        self.index = index

    def enclose(self, prec):
        return self.system.solution(prec)[self.index]

    def __repr__(self):
        return f"SolvedCoefficient({self.index})"


def exppoly_from_sequence(seq, charpoly: fmpq_poly | None = None) -> "ExpPoly":
    """The ExpPoly whose derivatives at 0 are ``seq``.

    Without ``charpoly`` the sequence must contain at least twice as many terms
    as its linear complexity; the minimal polynomial is then found exactly.
    """
    seq = [_fq(x) for x in seq]
    mu = berlekamp_massey(seq) if charpoly is None else charpoly
    mu = mu / mu.leading_coefficient()
    n = mu.degree()
    source = RationalSequence(seq[: max(n, 1)] if n else [fmpq(0)], mu if n else fmpq_poly([0, 1]))
    if n == 0:
        return ExpPoly((), source=source)
    roots = AlgebraicNumber.roots_of(mu)
    terms_seq = source.terms(n)
    rational_only = all(lam.is_rational() for lam, _ in roots)
    if rational_only:
        coeffs = _solve_rational(roots, terms_seq)
    else:
        system = _VandermondeSystem(roots, terms_seq)
        coeffs = [SolvedCoefficient(system, k) for k in range(n)]
    terms, k = [], 0
    for lam, m in roots:
        terms.append((lam, coeffs[k:k + m]))
        k += m
    return ExpPoly.from_terms(terms, source=source)


def _solve_rational(roots, seq):
    from flint import fmpq_mat
    n = len(seq)
    a = fmpq_mat(n, n)
    col = 0
    for lam, m in roots:
        q = lam.as_fraction()
        fq = fmpq(q.numerator, q.denominator)
        for r in range(m):
            for j in range(r, n):
                a[j, col] = math.perm(j, r) * fq ** (j - r)
            col += 1
    x = a.solve(fmpq_mat(n, 1, list(seq)))
    return [Const(to_fraction(x[i, 0])) for i in range(n)]


# ------------------------------------------------------------------ ExpPoly

@dataclass(frozen=True)
class Term:
    exponent: AlgebraicNumber
    coeffs: tuple  # ascending powers of t

    @property
    def degree(self):
        return len(self.coeffs) - 1


def _as_exponent(a):
    if isinstance(a, AlgebraicNumber):
        return a
    return AlgebraicNumber.rational(to_fraction(a))


class ExpPoly:
    """Sum of beta_i(t) * exp(alpha_i t) with distinct exact exponents."""

    __slots__ = ("terms", "_source", "audit", "__dict__")

    def __init__(self, terms=(), source=None, audit=()):
        self.terms = tuple(terms)
        self._source = source
        self.audit = tuple(audit)

    @property
    def source(self):
        """Exact derivative sequence at 0, or None when coefficients are not rational."""
        if callable(self._source):
            self._source = self._source()
        return self._source

    @classmethod
    def from_terms(cls, pairs, source=None, audit=()):
        acc = {}
        order = []
        for alpha, coeffs in pairs:
            alpha = _as_exponent(alpha)
            coeffs = tuple(as_expr(c) for c in coeffs)
            if alpha in acc:
                acc[alpha] = _poly_add(acc[alpha], coeffs)
            else:
                acc[alpha] = _trim(coeffs)
                order.append(alpha)
        terms = [Term(a, acc[a]) for a in order if acc[a]]
        terms.sort(key=lambda t: t.exponent.sort_key())
        return cls(terms, source, audit)

    @classmethod
    def constant(cls, c):
        c = as_expr(c)
        if _is_zero(c):
            return cls((), RationalSequence([0], fmpq_poly([0, 1])))
        v = constant_value(c)
        src = None
        if v is not None and v.is_rational() and v.is_real():
            src = RationalSequence([_fq(v.as_fraction())], fmpq_poly([0, 1]))
        return cls.from_terms([(0, [c])], source=src)

    @classmethod
    def exponential(cls, alpha, coeffs=(1,)):
        return cls.from_terms([(alpha, coeffs)])

    # ---------------------------------------------------------------- algebra
    def __add__(self, other):
        other = _coerce(other)
        a, b = self, other

        def src():
            if a.source is None or b.source is None:
                return None
            return _seq_add(a.source, b.source)
        return ExpPoly.from_terms([(t.exponent, t.coeffs) for t in self.terms + other.terms],
                                  source=src, audit=self.audit + other.audit)

    __radd__ = __add__

    def __neg__(self):
        a = self

        def src():
            return None if a.source is None else _seq_scale(a.source, fmpq(-1))
        return ExpPoly([Term(t.exponent, tuple(simplify_neg(c) for c in t.coeffs)) for t in self.terms],
                       src, self.audit)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, ExpPoly):
            return self.scale(other)
        pairs = []
        for a in self.terms:
            for b in other.terms:
                pairs.append((a.exponent + b.exponent, _poly_mul(a.coeffs, b.coeffs)))
        a, b = self, other

        def src():
            if a.source is None or b.source is None:
                return None
            return _seq_mul(a.source, b.source)
        return ExpPoly.from_terms(pairs, source=src, audit=self.audit + other.audit)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c):
        c = as_expr(c)
        v = constant_value(c)
        a = self

        def src():
            if a.source is None or v is None or not (v.is_rational() and v.is_real()):
                return None
            return _seq_scale(a.source, _fq(v.as_fraction()))
        return ExpPoly.from_terms([(t.exponent, [simplify_mul(c, x) for x in t.coeffs]) for t in self.terms],
                                  source=src, audit=self.audit)

    def derivative(self):
        pairs = []
        for t in self.terms:
            alpha = Const(t.exponent.as_fraction()) if t.exponent.is_rational() else Wrapped(t.exponent)
            out = [simplify_mul(alpha, c) for c in t.coeffs]
            for r in range(1, len(t.coeffs)):
                out[r - 1] = simplify_add(out[r - 1], simplify_mul(Const(r), t.coeffs[r]))
            pairs.append((t.exponent, out))
        a = self

        def src():
            return None if a.source is None else _seq_shift(a.source)
        return ExpPoly.from_terms(pairs, source=src, audit=self.audit)

    # ---------------------------------------------------------------- queries
    def is_zero(self):
        return not self.terms

    @property
    def exponents(self):
        return [t.exponent for t in self.terms]

    def multiplicities(self):
        return {t.exponent: len(t.coeffs) for t in self.terms}

    def evaluate(self, t, precision=DEFAULT_PRECISION):
        """acb enclosure of f(t) for a rational or ball t."""
        with workprec(precision):
            tt = t if isinstance(t, (arb, acb)) else arb_of(t)
            total = acb(0)
            for term in self.terms:
                e = (term.exponent.enclose(precision) * tt).exp()
                total += _horner([c.enclose(precision) for c in term.coeffs], tt) * e
        return total

    def pruned(self, precision=DEFAULT_PRECISION):
        """Drop terms whose coefficients all certify |beta| < 2^(-precision/2)."""
        threshold = arb(2) ** (-(precision // 2))
        kept, notes = [], list(self.audit)
        for t in self.terms:
            balls = [c.enclose(precision) for c in t.coeffs]
            if all(b.abs_upper() < threshold for b in balls):
                notes.append(f"dropped exp({t.exponent}*t) term, |coefficient| < 2^-{precision // 2}")
            else:
                kept.append(t)
        return ExpPoly(kept, self._source, notes)

    def __call__(self, t, precision=DEFAULT_PRECISION):
        return self.evaluate(t, precision)

    def describe(self, digits=12):
        out = []
        for t in self.terms:
            cs = []
            for c in t.coeffs:
                z = c.enclose(DEFAULT_PRECISION)
                cs.append(_fmt_complex(complex(z.mid()), digits))
            out.append({"exponent": str(t.exponent), "exponent_approx": _fmt_complex(complex(t.exponent), digits),
                        "coefficients": cs})
        return out

    def __repr__(self):
        parts = []
        for t in self.terms:
            cs = " + ".join(f"({_fmt_complex(complex(c.enclose(64).mid()), 8)})*t^{r}"
                            for r, c in enumerate(t.coeffs))
            parts.append(f"[{cs}]*exp(({_fmt_complex(complex(t.exponent), 8)})*t)")
        return "ExpPoly(" + (" + ".join(parts) or "0") + ")"


def _fmt_complex(z, digits):
    if z.imag == 0:
        return f"{z.real:.{digits}g}"
    return f"{z.real:.{digits}g}{z.imag:+.{digits}g}i"


def _fq(q):
    if isinstance(q, fmpq):
        return q
    q = to_fraction(q)
    return fmpq(q.numerator, q.denominator)


def _coerce(x):
    if isinstance(x, ExpPoly):
        return x
    return ExpPoly.constant(x)


def _horner(coeffs, t):
    acc = acb(0)
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


# exact sequence arithmetic; the resulting recurrences are products of
# characteristic polynomials and only serve to extend the sequences


def _seq_add(a, b):
    cp = a.charpoly * b.charpoly / a.charpoly.gcd(b.charpoly)
    n = cp.degree()
    ta, tb = a.terms(n), b.terms(n)
    return RationalSequence([x + y for x, y in zip(ta, tb)], cp)


def _seq_scale(a, c):
    n = a.order
    return RationalSequence([c * x for x in a.terms(n)], a.charpoly)


def _seq_shift(a):
    n = a.order
    return RationalSequence(a.terms(n + 1)[1:], a.charpoly)


def _seq_mul(a, b):
    cp = _product_annihilator(a.charpoly, b.charpoly)
    n = cp.degree()
    return RationalSequence(leibniz(a.terms(n), b.terms(n)), cp)


def leibniz(f, g):
    """Derivative sequence of a product from those of its factors."""
    n = min(len(f), len(g))
    out = []
    for k in range(n):
        s = fmpq(0)
        for j in range(k + 1):
            s += math.comb(k, j) * f[j] * g[k - j]
        out.append(s)
    return out


def _product_annihilator(p, q):
    """A polynomial annihilating every product of sequences annihilated by p and q."""
    from .algebraic import _sum_annihilator
    if p.degree() == 0 or q.degree() == 0:
        return fmpq_poly([1])
    mp = max(m for _, m in p.factor_squarefree()[1])
    mq = max(m for _, m in q.factor_squarefree()[1])
    return _radical(_sum_annihilator(_radical(p), _radical(q))) ** (mp + mq - 1)


def _radical(p):
    r = fmpq_poly([1])
    for g, _ in p.factor_squarefree()[1]:
        r *= g
    return r


# ------------------------------------------------------------------ real form

@dataclass(frozen=True)
class RealTerm:
    """exp(a t) * (p(t) cos(b t) + q(t) sin(b t)) with b = Im(alpha) >= 0."""

    alpha: AlgebraicNumber
    p: tuple
    q: tuple = ()

    @property
    def oscillating(self):
        return not self.alpha.is_real()


class RealExpPoly:
    """Real-valued exponential polynomial in cos/sin form."""

    def __init__(self, terms, complex_form: ExpPoly | None = None):
        self.terms = tuple(terms)
        self.complex_form = complex_form
        self._compiled = {}

    @property
    def source(self):
        return None if self.complex_form is None else self.complex_form.source

    @cached_property
    def derivative(self):
        return canonical_real_form(self.complex_form.derivative())

    def is_zero(self):
        return not self.terms

    @property
    def exponents(self):
        """Complex exponents, both members of each conjugate pair."""
        out = []
        for t in self.terms:
            out.append(t.alpha)
            if t.oscillating:
                out.append(t.alpha.conjugate())
        return out

    def _data(self, prec):
        hit = self._compiled.get(prec)
        if hit is None:
            hit = []
            for t in self.terms:
                z = t.alpha.enclose(prec)
                a, b = z.real, (z.imag if t.oscillating else None)
                p = [c.enclose(prec).real for c in t.p]
                q = [c.enclose(prec).real for c in t.q]
                hit.append((a, b, p, q))
            self._compiled[prec] = hit
        return hit

    def ball(self, t, prec):
        """arb enclosure of f over the ball t (naive interval evaluation)."""
        with workprec(prec):
            total = arb(0)
            for a, b, p, q in self._data(prec):
                e = (a * t).exp()
                val = _horner_real(p, t)
                if b is not None:
                    s, c = (b * t).sin_cos()
                    val = val * c + _horner_real(q, t) * s
                total += e * val
        return total

    def evaluate(self, x, precision=DEFAULT_PRECISION, pieces=1):
        """Enclosure of f(x) for a rational x, or of f's range over an interval."""
        if isinstance(x, RealEnclosure):
            x = (x.lo, x.hi)
        if isinstance(x, tuple):
            lo, hi = to_fraction(x[0]), to_fraction(x[1])
            return RealEnclosure(self.range_ball(lo, hi, precision, pieces), precision)
        with workprec(precision):
            return RealEnclosure(self.ball(arb_of(x), precision), precision)

    def range_ball(self, lo, hi, prec, pieces=1):
        if lo == hi:
            with workprec(prec):
                return self.ball(arb_of(lo), prec)
        step = (hi - lo) / pieces
        out = None
        for k in range(pieces):
            a, b = lo + k * step, lo + (k + 1) * step
            r = self._range_piece(a, b, prec)
            out = r if out is None else out.union(r)
        return out

    def _range_piece(self, lo, hi, prec):
        with workprec(prec):
            t = arb_from_bounds(lo, hi)
            naive = self.ball(t, prec)
            if self.complex_form is None:
                return naive
            m = arb_of((lo + hi) / 2)
            slope = self.derivative.ball(t, prec)
            taylor = self.ball(m, prec) + slope * (t - m)
            try:
                return naive.intersection(taylor)
            except ValueError:
                return taylor

    def __call__(self, x, precision=DEFAULT_PRECISION):
        return self.evaluate(x, precision)

    def __repr__(self):
        parts = []
        for t in self.terms:
            a = complex(t.alpha)
            p = ", ".join(f"{float(c.enclose(64).real.mid()):.8g}" for c in t.p)
            if t.oscillating:
                q = ", ".join(f"{float(c.enclose(64).real.mid()):.8g}" for c in t.q)
                parts.append(f"exp({a.real:.8g}t)*([{p}]cos({a.imag:.8g}t) + [{q}]sin({a.imag:.8g}t))")
            else:
                parts.append(f"exp({a.real:.8g}t)*[{p}]")
        return "RealExpPoly(" + (" + ".join(parts) or "0") + ")"


def _horner_real(coeffs, t):
    acc = arb(0)
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def _contains_zero(expr, prec):
    z = expr.enclose(prec)
    return z.imag.contains(0)


def canonical_real_form(f: ExpPoly) -> RealExpPoly:
    """Pair conjugate exponents into exp(at)(p cos bt + q sin bt) terms."""
    by_exp = {t.exponent: t for t in f.terms}
    out = []
    for t in f.terms:
        alpha = t.exponent
        if alpha.is_real():
            for c in t.coeffs:
                if not _imag_may_vanish(c):
                    raise RealnessViolation(f"coefficient of real exponent {alpha} is not real")
            out.append(RealTerm(alpha, tuple(_real_part(c) for c in t.coeffs)))
            continue
        conj = alpha.conjugate()
        partner = by_exp.get(conj)
        if partner is None:
            raise RealnessViolation(f"exponent {alpha} has no conjugate partner")
        if alpha.enclose(DEFAULT_PRECISION).imag < 0:
            continue  # handled with its upper-half-plane partner
        n = max(len(t.coeffs), len(partner.coeffs))
        p, q = [], []
        for r in range(n):
            c = t.coeffs[r] if r < len(t.coeffs) else ZERO
            d = partner.coeffs[r] if r < len(partner.coeffs) else ZERO
            if not _conjugates_may_agree(c, d):
                raise RealnessViolation(f"coefficients at {alpha} and its conjugate are not conjugate")
            # beta e^{alpha t} + conj(beta) e^{conj(alpha) t} = 2 Re(beta) cos - 2 Im(beta) sin
            p.append(simplify_mul(Const(2), _real_part(c)))
            q.append(simplify_mul(Const(-2), _imag_part(c)))
        out.append(RealTerm(alpha, _trim(p), _trim(q)))
    return RealExpPoly(out, f)


def _real_part(c):
    v = constant_value(c)
    if v is not None:
        return Const(v.real)
    return Re(c)


def _imag_part(c):
    v = constant_value(c)
    if v is not None:
        return Const(v.imag)
    return Im(c)


def _imag_may_vanish(c):
    v = constant_value(c)
    if v is not None:
        return v.is_real()
    return c.enclose(DEFAULT_PRECISION).imag.contains(0)


def _conjugates_may_agree(c, d):
    vc, vd = constant_value(c), constant_value(d)
    if vc is not None and vd is not None:
        return vc.conjugate() == vd
    return c.enclose(DEFAULT_PRECISION).conjugate().overlaps(d.enclose(DEFAULT_PRECISION))


# ------------------------------------------------------------------ atomic propositions

class Polynomial:
    """Rational-coefficient polynomial over named signals."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        acc = {}
        for mono, c in (terms or {}).items():
            c = to_fraction(c)
            if c:
                mono = tuple(sorted((v, e) for v, e in mono if e))
                acc[mono] = acc.get(mono, Fraction(0)) + c
        self.terms = {m: c for m, c in sorted(acc.items()) if c}

    @classmethod
    def const(cls, c):
        return cls({(): c})

    @classmethod
    def var(cls, name):
        return cls({((name, 1),): 1})

    def variables(self):
        return sorted({v for mono in self.terms for v, _ in mono})

    def degree(self):
        return max((sum(e for _, e in m) for m in self.terms), default=0)

    def constant_term(self):
        return self.terms.get((), Fraction(0))

    def is_constant(self):
        return all(m == () for m in self.terms)

    def __add__(self, o):
        o = o if isinstance(o, Polynomial) else Polynomial.const(o)
        acc = dict(self.terms)
        for m, c in o.terms.items():
            acc[m] = acc.get(m, Fraction(0)) + c
        return Polynomial(acc)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({m: -c for m, c in self.terms.items()})

    def __sub__(self, o):
        return self + (-(o if isinstance(o, Polynomial) else Polynomial.const(o)))

    def __rsub__(self, o):
        return Polynomial.const(o) - self

    def __mul__(self, o):
        o = o if isinstance(o, Polynomial) else Polynomial.const(o)
        acc = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                powers = dict(m1)
                for v, e in m2:
                    powers[v] = powers.get(v, 0) + e
                key = tuple(sorted(powers.items()))
                acc[key] = acc.get(key, Fraction(0)) + c1 * c2
        return Polynomial(acc)

    __rmul__ = __mul__

    def __pow__(self, n):
        out = Polynomial.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, o):
        o = o if isinstance(o, Polynomial) else Polynomial.const(o)
        return self.terms == o.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def evaluate(self, values):
        total = 0
        for mono, c in self.terms.items():
            term = c
            for v, e in mono:
                term = term * values[v] ** e
            total = total + term
        return total

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono, c in self.terms.items():
            factors = [v if e == 1 else f"{v}^{e}" for v, e in mono]
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            elif c == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append(f"{c}*" + "*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


@dataclass(frozen=True)
class Bound:
    """A rational interval with optional infinite ends and closedness flags."""

    lo: Fraction | None = None
    hi: Fraction | None = None
    lo_closed: bool = False
    hi_closed: bool = False

    def __post_init__(self):
        if self.lo is not None:
            object.__setattr__(self, "lo", to_fraction(self.lo))
        if self.hi is not None:
            object.__setattr__(self, "hi", to_fraction(self.hi))
        if self.lo is None:
            object.__setattr__(self, "lo_closed", False)
        if self.hi is None:
            object.__setattr__(self, "hi_closed", False)

    def is_everything(self):
        return self.lo is None and self.hi is None

    def is_empty(self):
        if self.lo is None or self.hi is None:
            return False
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    def contains(self, x):
        if self.lo is not None and (x < self.lo or (x == self.lo and not self.lo_closed)):
            return False
        if self.hi is not None and (x > self.hi or (x == self.hi and not self.hi_closed)):
            return False
        return True

    def __str__(self):
        lo = "-inf" if self.lo is None else str(self.lo)
        hi = "inf" if self.hi is None else str(self.hi)
        return f"{'[' if self.lo_closed else '('}{lo}, {hi}{']' if self.hi_closed else ')'}"


@dataclass
class AtomicFunction:
    """phi(t) for a proposition p(x(t)) in I, with its factors and boundary flags.

    ``factors`` lists (g, side) where g = p - inf I (side "lo") and/or
    g = p - sup I (side "hi"); phi is their product.  The closedness of each
    side lives in ``bound`` because phi alone forgets it.
    """

    phi: RealExpPoly
    factors: list
    bound: Bound
    poly: Polynomial
    value: RealExpPoly = None
    notes: list = field(default_factory=list)


def _support_size(signal_supports, poly: Polynomial):
    """Upper bound on the number of exponent/power slots of poly(signals)."""

    def mul(s1, s2):
        out = {}
        for e1, m1 in s1.items():
            for e2, m2 in s2.items():
                key = tuple(sorted(e1 + e2))
                out[key] = max(out.get(key, 0), m1 + m2 - 1)
        return out

    total = {}
    for mono, _ in poly.terms.items():
        s = {(): 1}
        for v, e in mono:
            for _ in range(e):
                s = mul(s, signal_supports[v])
        for k, m in s.items():
            total[k] = max(total.get(k, 0), m)
    return total


def compose(poly: Polynomial, signals) -> ExpPoly:
    """poly applied to signal ExpPolys, exactly when all signals carry sources."""
    for v in poly.variables():
        if v not in signals:
            raise UnknownSignal(f"unknown signal {v!r}")
    sigs = {v: _complex_of(signals[v]) for v in poly.variables()}
    if all(s.source is not None for s in sigs.values()):
        supports = {}
        for v, s in sigs.items():
            supports[v] = {(repr(t.exponent),): len(t.coeffs) for t in s.terms}
        bound = sum(_support_size(supports, poly).values())
        n = 2 * bound + 2
        seqs = {v: s.source.terms(n) for v, s in sigs.items()}
        acc = [fmpq(0)] * n
        for mono, c in poly.terms.items():
            cur = [fmpq(1)] + [fmpq(0)] * (n - 1)
            for v, e in mono:
                for _ in range(e):
                    cur = leibniz(cur, seqs[v])
            cq = _fq(c)
            acc = [a + cq * x for a, x in zip(acc, cur)]
        return exppoly_from_sequence(acc)
    out = ExpPoly.constant(0)
    for mono, c in poly.terms.items():
        term = ExpPoly.constant(c)
        for v, e in mono:
            for _ in range(e):
                term = term * sigs[v]
        out = out + term
    return out.pruned(DEFAULT_PRECISION * 2)


def _complex_of(s):
    if isinstance(s, RealExpPoly):
        return s.complex_form
    return s


def atomic_exppoly(poly: Polynomial, bound: Bound, signals) -> AtomicFunction:
    """phi = (p - inf I)(p - sup I), dropping a factor for an infinite end."""
    parts = []
    if bound.lo is not None:
        parts.append((poly - bound.lo, "lo"))
    if bound.hi is not None:
        parts.append((poly - bound.hi, "hi"))
    product = Polynomial.const(1)
    for g, _ in parts:
        product = product * g
    value = compose(poly, signals)
    factors = [(canonical_real_form(compose(g, signals)), side) for g, side in parts]
    if len(factors) == 1:
        phi = factors[0][0]
    else:
        phi = canonical_real_form(compose(product, signals))
    notes = list(value.audit)
    for g, _ in factors:
        notes += [n for n in g.complex_form.audit if n not in notes]
    return AtomicFunction(phi, factors, bound, poly, canonical_real_form(value), notes)
