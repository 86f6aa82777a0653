"""Recursive-descent parser for the formula grammar.

Precedence from loosest to tightest: ``->`` (right associative), ``|``,
``&``, binary ``U[a,b]`` / ``R[a,b]`` (right associative), then the prefix
operators ``!``, ``F[a,b]``, ``G[a,b]``.
"""
from __future__ import annotations

import re
from fractions import Fraction

from ..errors import FormulaSyntaxError, MalformedInterval
from ..exppoly import Bound, Polynomial
from .ast import (
    FALSE,
    TRUE,
    And,
    Atomic,
    Formula,
    Until,
    always,
    disjunction,
    eventually,
    implication,
    negate,
    release,
)

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(<=|>=|->|[<>=!&|()\[\],+\-*/^]))")
_TEMPORAL = {"U", "F", "G", "R"}
_CMP = {"<", "<=", ">", ">=", "="}


def tokenize(text):
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            pos += len(text[pos:]) - len(text[pos:].lstrip())
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start(m.lastindex)
        kind = ("int", "ident", "op")[m.lastindex - 1]
        out.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    # ---------------------------------------------------------------- helpers
    @property
    def tok(self):
        return self.toks[self.i]

    def peek(self, k=1):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, value):
        return self.tok[0] != "end" and self.tok[1] == value

    def error(self, message, tok=None):
        tok = tok or self.tok
        return FormulaSyntaxError(message, tok[2], self.text)

    def expect(self, value):
        if not self.at(value):
            found = self.tok[1] or "end of input"
            raise self.error(f"expected {value!r}, found {found!r}")
        self.i += 1

    def at_temporal(self, names):
        return self.tok[0] == "ident" and self.tok[1] in names and self.peek()[1] == "["

    # ---------------------------------------------------------------- formulas
    def formula(self):
        left = self.disj()
        if self.at("->"):
            self.i += 1
            return implication(left, self.formula())
        return left

    def disj(self):
        left = self.conj()
        while self.at("|"):
            self.i += 1
            left = disjunction(left, self.conj())
        return left

    def conj(self):
        left = self.binary_temporal()
        while self.at("&"):
            self.i += 1
            left = And(left, self.binary_temporal())
        return left

    def binary_temporal(self):
        left = self.unary()
        if self.at_temporal({"U", "R"}):
            op = self.tok[1]
            self.i += 1
            lo, hi = self.time_interval()
            right = self.binary_temporal()
            if op == "U":
                return Until(left, right, lo, hi)
            return release(left, right, lo, hi)
        return left

    def unary(self):
        if self.at("!"):
            self.i += 1
            return negate(self.unary())
        if self.at_temporal({"F", "G"}):
            op = self.tok[1]
            self.i += 1
            lo, hi = self.time_interval()
            arg = self.unary()
            return eventually(arg, lo, hi) if op == "F" else always(arg, lo, hi)
        return self.primary()

    def primary(self):
        if self.tok[0] == "ident" and self.tok[1] in ("true", "false") and self.peek()[1] not in _CMP:
            self.i += 1
            return TRUE if self.toks[self.i - 1][1] == "true" else FALSE
        if self.at("("):
            save = self.i
            try:
                return self.atom()
            except FormulaSyntaxError as atom_err:
                self.i = save
                self.expect("(")
                try:
                    f = self.formula()
                    self.expect(")")
                except FormulaSyntaxError as err:
                    raise max(err, atom_err, key=lambda e: e.position or 0) from None
                return f
        return self.atom()

    def time_interval(self):
        start = self.tok
        if self.at("("):
            raise self.error("time bounds must be closed intervals [a,b]")
        self.expect("[")
        lo = self.rational()
        self.expect(",")
        hi = self.rational()
        if self.at(")"):
            raise self.error("time bounds must be closed intervals [a,b]")
        self.expect("]")
        if lo < 0:
            raise MalformedInterval(f"time bound [{lo},{hi}] starts below 0", start[2], self.text)
        if hi < lo:
            raise MalformedInterval(f"time bound [{lo},{hi}] has sup < inf", start[2], self.text)
        return lo, hi

    def rational(self):
        sign = 1
        if self.at("-"):
            sign = -1
            self.i += 1
        if self.tok[0] != "int":
            raise self.error("expected a rational number")
        num = int(self.tok[1])
        self.i += 1
        den = 1
        if self.at("/"):
            self.i += 1
            if self.tok[0] != "int" or int(self.tok[1]) == 0:
                raise self.error("expected a positive integer denominator")
            den = int(self.tok[1])
            self.i += 1
        return Fraction(sign * num, den)

    # ---------------------------------------------------------------- atoms
    def atom(self):
        start = self.tok[2]
        lhs = self.poly()
        if self.tok[0] == "ident" and self.tok[1] == "in":
            self.i += 1
            lo_tok = self.tok
            if not (self.at("[") or self.at("(")):
                raise self.error("expected '[' or '(' after 'in'")
            lo_closed = self.at("[")
            self.i += 1
            lo = self.rational()
            self.expect(",")
            hi = self.rational()
            if not (self.at("]") or self.at(")")):
                raise self.error("expected ']' or ')'")
            hi_closed = self.at("]")
            self.i += 1
            if hi < lo:
                raise MalformedInterval(f"interval has sup {hi} < inf {lo}", lo_tok[2], self.text)
            bound = Bound(lo, hi, lo_closed, hi_closed)
            return Atomic(lhs, bound, self._source(start))
        if self.tok[1] not in _CMP or self.tok[0] != "op":
            found = self.tok[1] or "end of input"
            raise self.error(f"expected a comparison, found {found!r}")
        op = self.tok[1]
        self.i += 1
        rhs = self.poly()
        diff = lhs - rhs
        c = diff.constant_term()
        poly = diff - c
        return Atomic(poly, _comparison_bound(op, -c), self._source(start))

    def _source(self, start):
        end = self.toks[self.i - 1]
        return self.text[start:end[2] + len(end[1])].strip()

    def poly(self):
        neg = False
        if self.at("-"):
            neg = True
            self.i += 1
        acc = self.term()
        if neg:
            acc = -acc
        while self.at("+") or self.at("-"):
            op = self.tok[1]
            self.i += 1
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self):
        acc = self.power()
        while True:
            if self.at("*"):
                self.i += 1
                acc = acc * self.power()
            elif self.at("/"):
                self.i += 1
                if self.tok[0] != "int" or int(self.tok[1]) == 0:
                    raise self.error("division is only by positive integers")
                acc = acc * Polynomial.const(Fraction(1, int(self.tok[1])))
                self.i += 1
            else:
                return acc

    def power(self):
        base = self.factor()
        if self.at("^"):
            self.i += 1
            if self.tok[0] != "int":
                raise self.error("expected an integer exponent")
            base = base ** int(self.tok[1])
            self.i += 1
        return base

    def factor(self):
        kind, value, _ = self.tok
        if kind == "int":
            self.i += 1
            return Polynomial.const(int(value))
        if kind == "ident" and value not in ("in", "true", "false") and not self.at_temporal(_TEMPORAL):
            self.i += 1
            return Polynomial.var(value)
        if self.at("-"):
            self.i += 1
            return -self.factor()
        if self.at("("):
            self.i += 1
            p = self.poly()
            self.expect(")")
            return p
        found = value or "end of input"
        raise self.error(f"expected a polynomial term, found {found!r}")


def _comparison_bound(op, c):
    if op == ">=":
        return Bound(lo=c, lo_closed=True)
    if op == ">":
        return Bound(lo=c)
    if op == "<=":
        return Bound(hi=c, hi_closed=True)
    if op == "<":
        return Bound(hi=c)
    return Bound(c, c, True, True)


def parse(text: str) -> Formula:
    """Parse a formula; derived operators are desugared on the way."""
    p = _Parser(text)
    if p.tok[0] == "end":
        raise FormulaSyntaxError("empty formula", 0, text)
    f = p.formula()
    if p.tok[0] != "end":
        raise p.error(f"unexpected {p.tok[1]!r}")
    return f
