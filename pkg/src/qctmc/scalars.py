"""Exact scalars, ball enclosures and re-evaluable recipes.

Exact values are ``Fraction``, ``ComplexRational`` and ``Surd`` (a Q(i)-linear
combination of square roots of squarefree integers).  Everything irrational is
evaluated through arb/acb balls from python-flint, which round outward.
"""
from __future__ import annotations

import enum
import math
import re
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from flint import acb, arb, ctx, fmpq, fmpz

from .errors import PrecisionExhausted

DEFAULT_PRECISION = 64
MAX_PRECISION = 4096

_settings = {"max_precision": MAX_PRECISION}


def max_precision():
    return _settings["max_precision"]


def set_max_precision(bits):
    """Change the global precision cap; returns the previous value."""
    if bits < DEFAULT_PRECISION:
        raise ValueError(f"precision cap must be at least {DEFAULT_PRECISION} bits")
    old = _settings["max_precision"]
    _settings["max_precision"] = int(bits)
    return old


@contextmanager
def workprec(bits):
    old = ctx.prec
    ctx.prec = int(bits)
    try:
        yield
    finally:
        ctx.prec = old


def precisions(start=DEFAULT_PRECISION, cap=None):
    """The escalation schedule: start, 2*start, ... up to and including the cap."""
    cap = max_precision() if cap is None else cap
    p = start
    while p < cap:
        yield p
        p *= 2
    yield cap


class Sign(enum.IntEnum):
    NEGATIVE = -1
    UNDETERMINED = 0
    POSITIVE = 1

    def __str__(self):
        return self.name.capitalize()


# ---------------------------------------------------------------- conversions

def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, fmpq):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, fmpz):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, arb):
        if not x.is_exact():
            raise ValueError("ball is not a point")
        man, exp = x.man_exp()
        man, exp = int(man), int(exp)
        return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2**-exp)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def to_fmpq(x) -> fmpq:
    x = to_fraction(x)
    return fmpq(x.numerator, x.denominator)


def arb_of(x):
    """Ball around a rational, rounded outward at the current precision."""
    if isinstance(x, arb):
        return x
    x = to_fraction(x)
    if x.denominator == 1:
        return arb(x.numerator)
    return arb(fmpq(x.numerator, x.denominator))


def arb_bounds(x: arb):
    """Exact dyadic (lo, hi) of a finite ball."""
    if not x.is_finite():
        raise PrecisionExhausted("ball has infinite radius")
    m = to_fraction(x.mid())
    r = to_fraction(x.rad())
    return m - r, m + r


def arb_from_bounds(lo, hi):
    lo, hi = to_fraction(lo), to_fraction(hi)
    if lo > hi:
        raise ValueError("lo > hi")
    return arb_of(lo).union(arb_of(hi))


def arb_width(x: arb) -> Fraction:
    return 2 * to_fraction(x.rad())


# ---------------------------------------------------------------- exact types

@dataclass(frozen=True)
class ComplexRational:
    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", to_fraction(self.re))
        object.__setattr__(self, "im", to_fraction(self.im))

    @classmethod
    def coerce(cls, x):
        if isinstance(x, ComplexRational):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(to_fraction(x))

    def __add__(self, o):
        o = _crat_or_none(o)
        if o is None:
            return NotImplemented
        return ComplexRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return ComplexRational(-self.re, -self.im)

    def __sub__(self, o):
        o = _crat_or_none(o)
        if o is None:
            return NotImplemented
        return ComplexRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        o = _crat_or_none(o)
        if o is None:
            return NotImplemented
        return ComplexRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = _crat_or_none(o)
        if o is None:
            return NotImplemented
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero")
        return self * ComplexRational(o.re / n, -o.im / n)

    def __rtruediv__(self, o):
        return ComplexRational.coerce(o) / self

    def conjugate(self):
        return ComplexRational(self.re, -self.im)

    def is_zero(self):
        return self.re == 0 and self.im == 0

    def is_real(self):
        return self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, o):
        o = _crat_or_none(o)
        return o is not None and self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash(self.re) if self.im == 0 else hash((self.re, self.im))

    def enclose(self, prec=DEFAULT_PRECISION):
        with workprec(prec):
            return acb(arb_of(self.re), arb_of(self.im))

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}*i"
        return f"{self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}*i"

    __repr__ = __str__


def _crat_or_none(o):
    if isinstance(o, ComplexRational):
        return o
    if isinstance(o, (int, Fraction)):
        return ComplexRational(Fraction(o))
    return None


def squarefree_split(n: int):
    """n = s^2 * r with r squarefree; returns (s, r)."""
    if n <= 0:
        raise ValueError("expected a positive integer")
    s, r, p = 1, 1, 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
            s *= p
        if n % p == 0:
            n //= p
            r *= p
        p += 1 if p == 2 else 2
    return s, r * n


class Surd:
    """Exact value sum_n c_n * sqrt(n), c_n complex rational, n squarefree."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=None):
        acc = {}
        for n, c in (terms or {}).items():
            c = ComplexRational.coerce(c)
            if c:
                acc[n] = acc.get(n, ComplexRational(0)) + c
        self._terms = tuple(sorted((n, c) for n, c in acc.items() if c))
        self._hash = None

    @classmethod
    def coerce(cls, x):
        if isinstance(x, Surd):
            return x
        return cls({1: ComplexRational.coerce(x)})

    @classmethod
    def sqrt(cls, q):
        """Exact square root of a nonnegative rational."""
        q = to_fraction(q)
        if q < 0:
            raise ValueError("square root of a negative rational")
        if q == 0:
            return cls()
        s, r = squarefree_split(q.numerator * q.denominator)
        return cls({r: Fraction(s, q.denominator)})

    @property
    def terms(self):
        return self._terms

    def radicands(self):
        return {n for n, _ in self._terms}

    def is_zero(self):
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def is_rational(self):
        return all(n == 1 for n, _ in self._terms)

    def is_real(self):
        return all(c.im == 0 for _, c in self._terms)

    def as_complex_rational(self):
        if not self.is_rational():
            raise ValueError(f"{self} is irrational")
        return dict(self._terms).get(1, ComplexRational(0))

    def as_fraction(self):
        c = self.as_complex_rational()
        if c.im != 0:
            raise ValueError(f"{self} is not real")
        return c.re

    def __add__(self, o):
        try:
            o = Surd.coerce(o)
        except TypeError:
            return NotImplemented
        acc = dict(self._terms)
        for n, c in o._terms:
            acc[n] = acc.get(n, ComplexRational(0)) + c
        return Surd(acc)

    __radd__ = __add__

    def __neg__(self):
        return Surd({n: -c for n, c in self._terms})

    def __sub__(self, o):
        return self + (-Surd.coerce(o))

    def __rsub__(self, o):
        return Surd.coerce(o) - self

    def __mul__(self, o):
        try:
            o = Surd.coerce(o)
        except TypeError:
            return NotImplemented
        acc = {}
        for n, c in self._terms:
            for m, d in o._terms:
                g = math.gcd(n, m)
                k = (n // g) * (m // g)
                acc[k] = acc.get(k, ComplexRational(0)) + c * d * g
        return Surd(acc)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = Surd.coerce(o)
        if not o.is_rational():
            raise ValueError("division by an irrational surd is not supported")
        inv = 1 / o.as_complex_rational()
        return Surd({n: c * inv for n, c in self._terms})

    def conjugate(self):
        return Surd({n: c.conjugate() for n, c in self._terms})

    @property
    def real(self):
        return Surd({n: c.re for n, c in self._terms})

    @property
    def imag(self):
        return Surd({n: c.im for n, c in self._terms})

    def __eq__(self, o):
        try:
            o = Surd.coerce(o)
        except TypeError:
            return NotImplemented
        return self._terms == o._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    def enclose(self, prec=DEFAULT_PRECISION):
        with workprec(prec + 8):
            z = acb(0)
            for n, c in self._terms:
                root = arb(1) if n == 1 else arb(n).sqrt()
                z += acb(arb_of(c.re), arb_of(c.im)) * root
        return z

    def __complex__(self):
        return complex(self.enclose(64).mid())

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for n, c in self._terms:
            for comp, unit in ((c.re, ""), (c.im, "i")):
                if comp == 0:
                    continue
                factors = [str(abs(comp))] if abs(comp) != 1 or (n == 1 and not unit) else []
                if unit:
                    factors.append("i")
                if n != 1:
                    factors.append(f"sqrt({n})")
                parts.append(("-" if comp < 0 else "+") + "*".join(factors))
        s = " ".join(parts)
        return s[1:] if s.startswith("+") else s

    def __repr__(self):
        return f"Surd({self})"


_SURD_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|(sqrt)\s*\(\s*(\d+(?:/\d+)?)\s*\)|([-+*/()]))")


def parse_surd(text) -> Surd:
    """Parse expressions like ``1/2``, ``-sqrt(2)/2``, ``1/2 + 1/2*sqrt(3)``."""
    if isinstance(text, (int, Fraction)):
        return Surd.coerce(text)
    s = str(text).strip()
    tokens, pos = [], 0
    while pos < len(s):
        mt = _SURD_TOKEN.match(s, pos)
        if not mt or mt.end() == pos:
            if s[pos:].strip() == "":
                break
            raise ValueError(f"bad surd expression {text!r} at {pos}")
        pos = mt.end()
        if mt.group(1):
            tokens.append(("num", Surd.coerce(Fraction(mt.group(1)))))
        elif mt.group(2):
            tokens.append(("num", Surd.sqrt(Fraction(mt.group(3)))))
        else:
            tokens.append(("op", mt.group(4)))
    tokens.append(("end", None))
    i = 0

    def peek():
        return tokens[i]

    def take():
        nonlocal i
        i += 1
        return tokens[i - 1]

    def expr():
        v = term()
        while peek() in (("op", "+"), ("op", "-")):
            op = take()[1]
            v = v + term() if op == "+" else v - term()
        return v

    def term():
        v = unary()
        while peek() in (("op", "*"), ("op", "/")):
            op = take()[1]
            v = v * unary() if op == "*" else v / unary()
        return v

    def unary():
        if peek() == ("op", "-"):
            take()
            return -unary()
        if peek() == ("op", "+"):
            take()
            return unary()
        kind, val = take()
        if kind == "num":
            return val
        if (kind, val) == ("op", "("):
            v = expr()
            if take() != ("op", ")"):
                raise ValueError(f"unbalanced parentheses in {text!r}")
            return v
        raise ValueError(f"bad surd expression {text!r}")

    v = expr()
    if peek()[0] != "end":
        raise ValueError(f"trailing input in surd expression {text!r}")
    return v


# ---------------------------------------------------------------- enclosures

class RealEnclosure:
    """An arb ball with exact rational bounds and an optional recipe."""

    __slots__ = ("ball", "precision", "recipe", "__dict__")

    def __init__(self, ball, precision=DEFAULT_PRECISION, recipe=None):
        if isinstance(ball, acb):
            ball = ball.real
        self.ball = ball if isinstance(ball, arb) else arb_of(ball)
        self.precision = precision
        self.recipe = recipe

    @classmethod
    def from_bounds(cls, lo, hi, precision=DEFAULT_PRECISION):
        with workprec(precision):
            return cls(arb_from_bounds(lo, hi), precision)

    @classmethod
    def exact(cls, value, precision=DEFAULT_PRECISION):
        value = to_fraction(value)
        with workprec(precision):
            return cls(arb_of(value), precision, Const(value))

    @cached_property
    def lo(self) -> Fraction:
        return arb_bounds(self.ball)[0]

    @cached_property
    def hi(self) -> Fraction:
        return arb_bounds(self.ball)[1]

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x):
        if isinstance(x, RealEnclosure):
            return self.lo <= x.lo and x.hi <= self.hi
        x = to_fraction(x)
        return self.lo <= x <= self.hi

    def overlaps(self, other):
        return not (self.hi < other.lo or other.hi < self.lo)

    def sign(self):
        if self.lo > 0:
            return Sign.POSITIVE
        if self.hi < 0:
            return Sign.NEGATIVE
        return Sign.UNDETERMINED

    def _binop(self, other, f):
        if isinstance(other, RealEnclosure):
            prec = min(self.precision, other.precision)
            ob = other.ball
        else:
            prec = self.precision
            with workprec(prec):
                ob = arb_of(other)
        with workprec(prec):
            return RealEnclosure(f(self.ball, ob), prec)

    def __add__(self, o):
        return self._binop(o, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, o):
        return self._binop(o, lambda a, b: a - b)

    def __rsub__(self, o):
        return self._binop(o, lambda a, b: b - a)

    def __mul__(self, o):
        return self._binop(o, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, o):
        return self._binop(o, lambda a, b: a / b)

    def __neg__(self):
        return RealEnclosure(-self.ball, self.precision)

    def __float__(self):
        return float(self.mid)

    def __repr__(self):
        return f"RealEnclosure([{float(self.lo):.17g}, {float(self.hi):.17g}], {self.precision} bits)"


class ComplexEnclosure:
    """A rectangular complex ball (acb) with real and imaginary RealEnclosures."""

    __slots__ = ("ball", "precision", "recipe")

    def __init__(self, ball, precision=DEFAULT_PRECISION, recipe=None):
        if not isinstance(ball, acb):
            ball = acb(ball)
        self.ball = ball
        self.precision = precision
        self.recipe = recipe

    @classmethod
    def from_parts(cls, re: RealEnclosure, im: RealEnclosure | None = None):
        im_ball = arb(0) if im is None else im.ball
        prec = re.precision if im is None else min(re.precision, im.precision)
        return cls(acb(re.ball, im_ball), prec)

    @classmethod
    def exact(cls, value, precision=DEFAULT_PRECISION):
        value = Surd.coerce(value)
        return cls(value.enclose(precision), precision, Const(value))

    @property
    def re(self):
        return RealEnclosure(self.ball.real, self.precision)

    @property
    def im(self):
        return RealEnclosure(self.ball.imag, self.precision)

    def contains(self, z):
        if isinstance(z, ComplexEnclosure):
            return self.re.contains(z.re) and self.im.contains(z.im)
        z = ComplexRational.coerce(z)
        return self.re.contains(z.re) and self.im.contains(z.im)

    def overlaps(self, other):
        return self.re.overlaps(other.re) and self.im.overlaps(other.im)

    def conjugate(self):
        return ComplexEnclosure(self.ball.conjugate(), self.precision)

    def _binop(self, other, f):
        if isinstance(other, ComplexEnclosure):
            prec = min(self.precision, other.precision)
            ob = other.ball
        else:
            prec = self.precision
            ob = Surd.coerce(other).enclose(prec) if not isinstance(other, acb) else other
        with workprec(prec):
            return ComplexEnclosure(f(self.ball, ob), prec)

    def __add__(self, o):
        return self._binop(o, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, o):
        return self._binop(o, lambda a, b: a - b)

    def __rsub__(self, o):
        return self._binop(o, lambda a, b: b - a)

    def __mul__(self, o):
        return self._binop(o, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, o):
        return self._binop(o, lambda a, b: a / b)

    def __neg__(self):
        return ComplexEnclosure(-self.ball, self.precision)

    def __complex__(self):
        return complex(self.ball.mid())

    def __repr__(self):
        return f"ComplexEnclosure({self.ball}, {self.precision} bits)"


# ---------------------------------------------------------------- recipes

class Expr:
    """Re-evaluable expression; ``enclose(prec)`` returns an acb ball."""

    def enclose(self, prec):
        raise NotImplementedError

    def __add__(self, o):
        return Add(self, as_expr(o))

    def __radd__(self, o):
        return Add(as_expr(o), self)

    def __sub__(self, o):
        return Add(self, Neg(as_expr(o)))

    def __rsub__(self, o):
        return Add(as_expr(o), Neg(self))

    def __mul__(self, o):
        return Mul(self, as_expr(o))

    def __rmul__(self, o):
        return Mul(as_expr(o), self)

    def __truediv__(self, o):
        return Div(self, as_expr(o))

    def __rtruediv__(self, o):
        return Div(as_expr(o), self)

    def __neg__(self):
        return Neg(self)


def as_expr(x):
    if isinstance(x, Expr):
        return x
    if hasattr(x, "enclose") and not isinstance(x, (Surd, ComplexRational)):
        return Wrapped(x)
    return Const(x)


class Const(Expr):
    def __init__(self, value):
        self.value = value if isinstance(value, Surd) else Surd.coerce(value)

    def enclose(self, prec):
        return self.value.enclose(prec)

    def __repr__(self):
        return f"Const({self.value})"


class Wrapped(Expr):
    """Adapter for any object with an ``enclose(prec)`` method."""

    def __init__(self, obj):
        self.obj = obj

    def enclose(self, prec):
        z = self.obj.enclose(prec)
        return z if isinstance(z, acb) else acb(z)


class _Pi(Expr):
    def enclose(self, prec):
        with workprec(prec):
            return acb(arb.pi())

    def __repr__(self):
        return "Pi"


PI = _Pi()


class _Nary(Expr):
    def __init__(self, *args):
        self.args = args

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(map(repr, self.args))})"


class Add(_Nary):
    def enclose(self, prec):
        a, b = (x.enclose(prec) for x in self.args)
        with workprec(prec):
            return a + b


class Neg(_Nary):
    def enclose(self, prec):
        return -self.args[0].enclose(prec)


class Mul(_Nary):
    def enclose(self, prec):
        a, b = (x.enclose(prec) for x in self.args)
        with workprec(prec):
            return a * b


class Div(_Nary):
    def enclose(self, prec):
        a, b = (x.enclose(prec) for x in self.args)
        with workprec(prec):
            return a / b


class Exp(_Nary):
    def enclose(self, prec):
        z = self.args[0].enclose(prec)
        with workprec(prec):
            return z.exp()


class Cos(_Nary):
    def enclose(self, prec):
        z = self.args[0].enclose(prec)
        with workprec(prec):
            return z.cos()


class Sin(_Nary):
    def enclose(self, prec):
        z = self.args[0].enclose(prec)
        with workprec(prec):
            return z.sin()


class Sqrt(_Nary):
    """Principal square root; the argument must enclose a nonnegative real."""

    def enclose(self, prec):
        z = self.args[0].enclose(prec)
        with workprec(prec):
            return acb(z.real.sqrt())


def _enclosure_of(x, prec):
    """acb ball of a refinable value at working precision ``prec``."""
    if isinstance(x, (RealEnclosure, ComplexEnclosure)):
        if x.recipe is None:
            return x.ball if isinstance(x.ball, acb) else acb(x.ball)
        return _enclosure_of(x.recipe, prec)
    if isinstance(x, (int, Fraction)):
        with workprec(prec):
            return acb(arb_of(x))
    if hasattr(x, "enclose"):
        z = x.enclose(prec)
        return z if isinstance(z, acb) else acb(z)
    raise TypeError(f"{type(x).__name__} carries no refinement recipe")


def _recipe_of(x):
    if isinstance(x, (RealEnclosure, ComplexEnclosure)):
        return x.recipe
    if isinstance(x, (int, Fraction)):
        return Const(x)
    return x


def refine(x, precision):
    """Re-evaluate ``x`` until every component is at most 2**-precision wide."""
    cap = max_precision()
    if precision > cap:
        raise PrecisionExhausted(f"requested {precision} bits exceeds the cap of {cap}")
    if hasattr(x, "refine_to") and not isinstance(x, (RealEnclosure, ComplexEnclosure)):
        return x.refine_to(Fraction(1, 2**precision))
    recipe = _recipe_of(x)
    if recipe is None:
        raise PrecisionExhausted("value carries no recipe and cannot be refined")
    real = isinstance(x, RealEnclosure)
    target = Fraction(1, 2**precision)
    for wp in precisions(max(DEFAULT_PRECISION, precision + 10), cap):
        z = _enclosure_of(recipe, wp)
        if not z.is_finite():
            continue
        re_w = arb_width(z.real)
        im_w = arb_width(z.imag)
        if re_w <= target and (real or im_w <= target):
            if real:
                return RealEnclosure(z.real, wp, recipe)
            return ComplexEnclosure(z, wp, recipe)
    raise PrecisionExhausted(f"could not reach width 2^-{precision} below {cap} bits")


def sign_of(x, max_precision=None):
    """Certified sign of a real value; UNDETERMINED when no precision decides it."""
    cap = _settings["max_precision"] if max_precision is None else max_precision
    if isinstance(x, (int, Fraction)):
        return Sign((x > 0) - (x < 0)) if x != 0 else Sign.UNDETERMINED
    if isinstance(x, RealEnclosure) and x.recipe is None:
        return x.sign()
    recipe = _recipe_of(x)
    for wp in precisions(DEFAULT_PRECISION, cap):
        z = _enclosure_of(recipe, wp)
        if not z.imag.contains(0):
            raise ValueError("sign of a non-real value")
        re_ = z.real
        if re_ > 0:
            return Sign.POSITIVE
        if re_ < 0:
            return Sign.NEGATIVE
    return Sign.UNDETERMINED


def enclose_exp_trig(z: ComplexEnclosure) -> ComplexEnclosure:
    """Box containing e^w for every w in z, as e^re * (cos im + i sin im)."""
    if not isinstance(z, ComplexEnclosure):
        z = ComplexEnclosure.exact(z)
    if not z.ball.is_finite():
        raise PrecisionExhausted("exponent enclosure is not finite")
    prec = z.precision
    with workprec(prec):
        r = z.ball.real.exp()
        s, c = z.ball.imag.sin_cos()
        w = acb(r * c, r * s)
    if not w.is_finite():
        raise PrecisionExhausted("exponential overflowed")
    recipe = Exp(z.recipe) if z.recipe is not None else None
    return ComplexEnclosure(w, prec, recipe)


class Re(_Nary):
    def enclose(self, prec):
        return acb(self.args[0].enclose(prec).real)


class Im(_Nary):
    def enclose(self, prec):
        return acb(self.args[0].enclose(prec).imag)


def constant_value(x):
    """The exact Surd behind a recipe, or None when it is not a constant."""
    if isinstance(x, Const):
        return x.value
    if isinstance(x, (Surd, int, Fraction, ComplexRational)):
        return Surd.coerce(x)
    return None


def simplify_add(a, b):
    ca, cb = constant_value(a), constant_value(b)
    if ca is not None and cb is not None:
        return Const(ca + cb)
    if ca is not None and ca.is_zero():
        return as_expr(b)
    if cb is not None and cb.is_zero():
        return as_expr(a)
    return Add(as_expr(a), as_expr(b))


def simplify_mul(a, b):
    ca, cb = constant_value(a), constant_value(b)
    if ca is not None and cb is not None:
        return Const(ca * cb)
    if (ca is not None and ca.is_zero()) or (cb is not None and cb.is_zero()):
        return Const(0)
    if ca is not None and ca == Surd.coerce(1):
        return as_expr(b)
    if cb is not None and cb == Surd.coerce(1):
        return as_expr(a)
    return Mul(as_expr(a), as_expr(b))


def simplify_neg(a):
    ca = constant_value(a)
    return Const(-ca) if ca is not None else Neg(as_expr(a))
