"""Formula trees: atomic propositions, negation, conjunction and bounded until."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..exppoly import Bound, Polynomial

EVERYTHING = Bound()
NOTHING = Bound(Fraction(0), Fraction(0), False, False)


class Formula:
    def children(self):
        return ()

    def mnt(self) -> Fraction:
        return mnt(self)

    def size(self) -> int:
        return size(self)


@dataclass(frozen=True)
class Atomic(Formula):
    """p(x) in bound; ``text`` is the source form used for display."""

    poly: Polynomial
    bound: Bound
    text: str = ""

    def __str__(self):
        return self.text or f"{self.poly} in {self.bound}"

    @property
    def is_true(self):
        return self.bound.is_everything()

    @property
    def is_false(self):
        return self.bound.is_empty()


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)

    def __str__(self):
        return f"!{_wrap(self.arg)}"


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)

    def __str__(self):
        return f"({_operand(self.left)} & {_operand(self.right)})"


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula
    lo: Fraction
    hi: Fraction

    def children(self):
        return (self.left, self.right)

    def __str__(self):
        return f"({_operand(self.left)} U[{self.lo},{self.hi}] {_operand(self.right)})"


def _wrap(f):
    return str(f) if isinstance(f, (And, Until, Not)) or f.text in ("true", "false") else f"({f})"


def _operand(f):
    return _wrap(f) if isinstance(f, Atomic) else str(f)


TRUE = Atomic(Polynomial.const(0), EVERYTHING, "true")
FALSE = Atomic(Polynomial.const(0), NOTHING, "false")


def negate(f: Formula) -> Formula:
    """Negation with double negations removed."""
    return f.arg if isinstance(f, Not) else Not(f)


def disjunction(a, b):
    return negate(And(negate(a), negate(b)))


def implication(a, b):
    return negate(And(a, negate(b)))


def eventually(f, lo, hi):
    return Until(TRUE, f, lo, hi)


def always(f, lo, hi):
    return negate(eventually(negate(f), lo, hi))


def release(a, b, lo, hi):
    return negate(Until(negate(a), negate(b), lo, hi))


def mnt(f: Formula) -> Fraction:
    """Length of the time window a formula needs to be decided at t = 0."""
    if isinstance(f, Atomic):
        return Fraction(0)
    if isinstance(f, Not):
        return mnt(f.arg)
    if isinstance(f, And):
        return max(mnt(f.left), mnt(f.right))
    if isinstance(f, Until):
        return f.hi + max(mnt(f.left), mnt(f.right))
    raise TypeError(f"not a formula: {f!r}")


def size(f: Formula) -> int:
    return 1 + sum(size(c) for c in f.children())


def leaves(f: Formula):
    if isinstance(f, Atomic):
        return [f]
    return [a for c in f.children() for a in leaves(c)]


def internal_nodes(f: Formula) -> int:
    return size(f) - len(leaves(f))


def signal_names(f: Formula):
    return sorted({v for a in leaves(f) for v in a.poly.variables()})
