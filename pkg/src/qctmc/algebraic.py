"""Exact algebraic numbers as (irreducible polynomial, canonical root index).

Roots of each irreducible polynomial are labelled once per process: real roots
ascending, then conjugate pairs ordered by real part and |imaginary part|,
the upper half-plane member first.  Balls are refined on demand and matched
to their labels by overlap, so a label always names the same root.
"""
from __future__ import annotations

import threading
from fractions import Fraction

from flint import acb, arb, fmpq, fmpq_mat, fmpq_poly, fmpz_poly

from .errors import PrecisionExhausted
from .scalars import DEFAULT_PRECISION, max_precision, to_fraction, workprec


def poly_key(f: fmpq_poly):
    """Integer coefficient tuple of the primitive, positive-leading multiple of f."""
    num = fmpz_poly(f.numer())
    c = num.content()
    coeffs = [int(x) // int(c) for x in num.coeffs()]
    if coeffs[-1] < 0:
        coeffs = [-x for x in coeffs]
    return tuple(coeffs)


def poly_from_key(key) -> fmpq_poly:
    f = fmpq_poly(list(key))
    return f / f.leading_coefficient()


def factor_poly(f: fmpq_poly):
    """[(primitive key, multiplicity)] of the irreducible factors of f."""
    if f.degree() < 1:
        return []
    _, facs = f.factor()
    return sorted(((poly_key(g), m) for g, m in facs), key=lambda km: (len(km[0]), km[0]))


class _RootTable:
    """Labelled root balls of one irreducible polynomial."""

    def __init__(self, key):
        self.key = key
        self.poly = poly_from_key(key)
        self.degree = len(key) - 1
        self.lock = threading.Lock()
        self.prec = 0
        self.balls = self._label(self._roots(DEFAULT_PRECISION))
        self.prec = DEFAULT_PRECISION

    def _roots(self, prec):
        with workprec(prec):
            roots = [r for r, _ in self.poly.complex_roots()]
        if len(roots) != self.degree:
            raise PrecisionExhausted("root finder returned too few roots")
        return roots

    def _label(self, roots):
        real = [r for r in roots if r.imag.is_zero()]
        upper = [r for r in roots if not r.imag.is_zero() and r.imag > 0]
        lower = [r for r in roots if not r.imag.is_zero() and r.imag < 0]
        if len(real) + len(upper) + len(lower) != self.degree or len(upper) != len(lower):
            return self._label(self._roots(2 * max(self.prec, DEFAULT_PRECISION)))
        real.sort(key=lambda r: float(r.real.mid()))
        upper.sort(key=lambda r: (float(r.real.mid()), float(r.imag.mid())))
        out = list(real)
        for u in upper:
            partner = [w for w in lower if w.overlaps(u.conjugate())]
            if len(partner) != 1:
                raise PrecisionExhausted("could not pair conjugate roots")
            out += [u, partner[0]]
        return out

    def ball(self, index, prec):
        with self.lock:
            if prec > self.prec:
                self._refine(prec)
            return self.balls[index]

    def _refine(self, prec):
        p = max(prec, 2 * self.prec)
        while True:
            new = self._roots(p)
            matched = []
            for old in self.balls:
                hits = [r for r in new if r.overlaps(old)]
                if len(hits) != 1:
                    break
                matched.append(hits[0])
            else:
                self.balls, self.prec = matched, p
                return
            p *= 2
            if p > 4 * max_precision():
                raise PrecisionExhausted("could not match refined roots to their labels")


_tables: dict = {}
_tables_lock = threading.Lock()


def root_table(key) -> _RootTable:
    with _tables_lock:
        t = _tables.get(key)
        if t is None:
            t = _tables[key] = _RootTable(key)
        return t


class AlgebraicNumber:
    """An exact algebraic number; equality is exact and structural."""

    __slots__ = ("key", "index", "_rational")

    def __init__(self, key, index=0):
        self.key = tuple(int(c) for c in key)
        self.index = int(index)
        if len(self.key) == 2:
            self._rational = Fraction(-self.key[0], self.key[1])
        else:
            self._rational = None
        if not 0 <= self.index < len(self.key) - 1:
            raise ValueError("root index out of range")

    @classmethod
    def rational(cls, q):
        q = to_fraction(q)
        return cls((-q.numerator, q.denominator), 0)

    @classmethod
    def roots_of(cls, f: fmpq_poly):
        """[(root, multiplicity)] of all complex roots of f, in canonical order."""
        out = []
        for key, m in factor_poly(f):
            out += [(cls(key, i), m) for i in range(len(key) - 1)]
        return out

    # ---------------------------------------------------------------- queries
    @property
    def degree(self):
        return len(self.key) - 1

    @property
    def poly(self):
        return poly_from_key(self.key)

    def is_rational(self):
        return self._rational is not None

    def as_fraction(self):
        if self._rational is None:
            raise ValueError(f"{self} is irrational")
        return self._rational

    def is_real(self):
        if self._rational is not None:
            return True
        return root_table(self.key).balls[self.index].imag.is_zero()

    def is_zero(self):
        return self._rational == 0

    def enclose(self, prec=DEFAULT_PRECISION):
        if self._rational is not None:
            q = self._rational
            with workprec(prec):
                return acb(arb(fmpq(q.numerator, q.denominator)))
        return root_table(self.key).ball(self.index, prec)

    def __complex__(self):
        return complex(self.enclose(80).mid())

    # ---------------------------------------------------------------- identity
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self._rational is not None and self._rational == other
        if not isinstance(other, AlgebraicNumber):
            return NotImplemented
        return self.key == other.key and self.index == other.index

    def __hash__(self):
        if self._rational is not None:
            return hash(self._rational)
        return hash((self.key, self.index))

    def sort_key(self):
        """Deterministic display order: by real part, then imaginary part."""
        z = complex(self)
        return (round(z.real, 12), round(z.imag, 12), self.key, self.index)

    # ---------------------------------------------------------------- arithmetic
    def conjugate(self):
        if self.is_real():
            return self
        t = root_table(self.key)
        j = self.index
        first_complex = sum(1 for b in t.balls if b.imag.is_zero())
        partner = j + 1 if (j - first_complex) % 2 == 0 else j - 1
        return AlgebraicNumber(self.key, partner)

    def __neg__(self):
        if self._rational is not None:
            return AlgebraicNumber.rational(-self._rational)
        c = list(self.key)
        g = [x if i % 2 == 0 else -x for i, x in enumerate(c)]
        return _locate(fmpq_poly(g), lambda p: -self.enclose(p))

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = AlgebraicNumber.rational(other)
        if not isinstance(other, AlgebraicNumber):
            return NotImplemented
        if self._rational is not None and other._rational is not None:
            return AlgebraicNumber.rational(self._rational + other._rational)
        if other._rational is not None:
            return self._shift(other._rational)
        if self._rational is not None:
            return other._shift(self._rational)
        f = _sum_annihilator(self.poly, other.poly)
        return _locate(f, lambda p: self.enclose(p) + other.enclose(p))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, q):
        """q * self for a rational q."""
        q = to_fraction(q)
        if q == 0:
            return AlgebraicNumber.rational(0)
        if self._rational is not None:
            return AlgebraicNumber.rational(q * self._rational)
        # roots of f(x / q)
        n = self.degree
        g = [fmpq(c) * fmpq(q.denominator, q.numerator) ** i for i, c in enumerate(self.key)]
        g = [c * fmpq(q.numerator) ** n for c in g]
        return _locate(fmpq_poly(g), lambda p: self.enclose(p) * acb(arb(fmpq(q.numerator, q.denominator))))

    def _shift(self, q):
        # roots of f(x - q)
        x = fmpq_poly([fmpq(-q.numerator, q.denominator), 1])
        f = self.poly
        g = fmpq_poly([0])
        for c in reversed(f.coeffs()):
            g = g * x + c
        qq = fmpq(q.numerator, q.denominator)
        return _locate(g, lambda p: self.enclose(p) + acb(arb(qq)))

    def __str__(self):
        if self._rational is not None:
            return str(self._rational)
        z = complex(self)
        return f"root#{self.index}({_poly_str(self.key)}) ~ {z.real:.10g}{z.imag:+.10g}i" if z.imag else \
            f"root#{self.index}({_poly_str(self.key)}) ~ {z.real:.10g}"

    def __repr__(self):
        return f"AlgebraicNumber({self.key}, {self.index})"


def _poly_str(key):
    return str(fmpq_poly(list(key)))


def _companion(f: fmpq_poly):
    f = f / f.leading_coefficient()
    n = f.degree()
    c = f.coeffs()
    m = fmpq_mat(n, n)
    for i in range(1, n):
        m[i, i - 1] = 1
    for i in range(n):
        m[i, n - 1] = -c[i]
    return m


def _sum_annihilator(f, g):
    """Polynomial whose roots include every a + b with f(a) = g(b) = 0."""
    a, b = _companion(f), _companion(g)
    n, m = a.nrows(), b.nrows()
    k = fmpq_mat(n * m, n * m)
    for i in range(n):
        for j in range(n):
            if a[i, j] != 0:
                for r in range(m):
                    k[i * m + r, j * m + r] += a[i, j]
    for i in range(n):
        for r in range(m):
            for s in range(m):
                if b[r, s] != 0:
                    k[i * m + r, i * m + s] += b[r, s]
    return k.charpoly()


def _locate(f: fmpq_poly, ball_of):
    """The root of f that the value ``ball_of(prec)`` encloses."""
    candidates = AlgebraicNumber.roots_of(f)
    p = DEFAULT_PRECISION
    while True:
        with workprec(p):
            z = ball_of(p)
        hits = [r for r, _ in candidates if r.enclose(p).overlaps(z)]
        if len(hits) == 1:
            return hits[0]
        if not hits:
            raise PrecisionExhausted("value is not a root of its annihilator")
        candidates = [(r, 1) for r in hits]
        p *= 2
        if p > max_precision():
            # distinct roots of a squarefree product are always separable;
            # overlapping labels therefore denote the same number
            distinct = {(r.key, r.index) for r in hits}
            if len(distinct) == 1:
                return hits[0]
            raise PrecisionExhausted("could not identify an algebraic root")
