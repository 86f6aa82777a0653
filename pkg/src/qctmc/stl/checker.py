"""Bottom-up evaluation of a formula into solution sets over [0, mnt(f)]."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import QctmcError
from ..isolation import IsolationStats, solve_atomic
from ..model import Qctmc, signal_table
from .ast import And, Atomic, Formula, Not, Until, leaves, mnt
from .intervals import IntervalSet, complement, intersect, until_set
from .parser import parse


@dataclass
class NodeResult:
    formula: Formula
    mnt: Fraction
    solution: IntervalSet
    horizon: Fraction  # node results are trusted on [0, horizon]

    @property
    def text(self):
        return str(self.formula)


@dataclass
class Counters:
    atomic_solves: int = 0
    interval_ops: int = 0
    isolation: IsolationStats = field(default_factory=IsolationStats)


@dataclass
class Verdict:
    satisfied: bool
    solution_set: IntervalSet
    validity_horizon: Fraction
    nodes: list = field(default_factory=list)
    counters: Counters = field(default_factory=Counters)

    def __bool__(self):
        return self.satisfied


class CheckError(QctmcError):
    """An error raised while evaluating one node, tagged with that node."""

    def __init__(self, node, cause):
        super().__init__(f"while evaluating {node}: {cause}")
        self.node = node
        self.cause = cause


def _signals_of(model):
    if isinstance(model, Qctmc):
        return signal_table(model)
    return model


def check(model, formula, parallel=False) -> Verdict:
    """Decide rho(0) |= formula and report every node's solution set.

    ``model`` is a Qctmc or any mapping from signal names to RealExpPoly.
    Leaves may be solved concurrently when ``parallel`` is set.
    """
    f = parse(formula) if isinstance(formula, str) else formula
    signals = _signals_of(model)
    big_b = mnt(f)
    counters = Counters()
    nodes = []
    shared_roots = {}
    calls = []

    def solve_leaf(atom):
        stats = IsolationStats()
        calls.append(atom)
        try:
            return solve_atomic(atom, signals, big_b, stats=stats, cache=shared_roots), stats
        except QctmcError as exc:
            raise CheckError(atom, exc) from exc

    leaf_list = leaves(f)
    if parallel and len(leaf_list) > 1:
        with ThreadPoolExecutor() as pool:
            solved = list(pool.map(solve_leaf, leaf_list))
    else:
        solved = [solve_leaf(a) for a in leaf_list]
    counters.atomic_solves = len(calls)
    leaf_sets = iter(solved)

    def visit(node):
        if isinstance(node, Atomic):
            s, stats = next(leaf_sets)
            counters.isolation.calls += stats.calls
            counters.isolation.max_depth = max(counters.isolation.max_depth, stats.max_depth)
            counters.isolation.final_precision = max(counters.isolation.final_precision, stats.final_precision)
        else:
            kids = [visit(c) for c in node.children()]
            counters.interval_ops += 1
            try:
                if isinstance(node, Not):
                    s = complement(kids[0])
                elif isinstance(node, And):
                    s = intersect(kids[0], kids[1])
                elif isinstance(node, Until):
                    s = until_set(kids[0], kids[1], node.lo, node.hi, big_b)
                else:
                    raise TypeError(f"not a formula node: {node!r}")
            except QctmcError as exc:
                raise CheckError(node, exc) from exc
        m = mnt(node)
        nodes.append(NodeResult(node, m, s, big_b - m))
        return s

    root = visit(f)
    return Verdict(root.contains(0), root, big_b, nodes, counters)
