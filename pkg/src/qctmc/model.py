"""Quantum CTMC models: validation, CTMC embedding and occupancy signals."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from flint import acb

from .errors import InvalidGenerator, ModelError, UnknownSignal
from .exppoly import ExpPoly, RealExpPoly, canonical_real_form
from .linops import (
    KrylovSystem,
    Matrix,
    devectorize,
    governing_matrix,
    validate_density,
    vectorize,
)
from .scalars import DEFAULT_PRECISION, ComplexEnclosure, Surd, to_fraction, workprec


@dataclass(eq=False)
class Qctmc:
    """Classical states S, quantum dimension d_q and operators on C^|S| (x) C^d_q."""

    classical_states: tuple
    hilbert_dim: int
    H: Matrix
    Ls: tuple
    rho0: Matrix
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.classical_states = tuple(str(s) for s in self.classical_states)
        self.Ls = tuple(self.Ls)

    @property
    def dim(self):
        return len(self.classical_states) * self.hilbert_dim

    def projector_indices(self, state):
        """Basis indices of |s><s| (x) I."""
        k = self.classical_states.index(state)
        return [k * self.hilbert_dim + a for a in range(self.hilbert_dim)]

    @property
    def governing(self):
        g = self._cache.get("governing")
        if g is None:
            g = self._cache["governing"] = governing_matrix(self.H, self.Ls)
        return g

    @property
    def krylov(self):
        k = self._cache.get("krylov")
        if k is None:
            k = self._cache["krylov"] = KrylovSystem(self.governing.matrix, vectorize(self.rho0))
        return k


@dataclass
class ModelReport:
    ok: bool
    violations: list

    def __bool__(self):
        return self.ok

    def raise_if_invalid(self):
        if not self.ok:
            raise ModelError(self.violations)


def validate_model(m: Qctmc, tolerance=Fraction(1, 2**30)) -> ModelReport:
    violations = []
    d = m.dim
    if not m.classical_states:
        violations.append("no classical states")
    if len(set(m.classical_states)) != len(m.classical_states):
        violations.append("duplicate classical state names")
    if m.hilbert_dim < 1:
        violations.append("Hilbert dimension must be positive")
    shapes_ok = True
    for name, op in [("H", m.H), ("rho0", m.rho0)] + [(f"L[{j}]", l) for j, l in enumerate(m.Ls)]:
        if op.shape != (d, d):
            violations.append(f"{name} has shape {op.shape}, expected {(d, d)}")
            shapes_ok = False
    if shapes_ok:
        if not m.H.is_hermitian():
            violations.append("H is not Hermitian")
        rep = validate_density(m.rho0, tolerance)
        violations += [f"rho0: {v}" for v in rep.violations]
    return ModelReport(not violations, violations)


def from_ctmc(states, q, initial=None) -> Qctmc:
    """QCTMC with d_q = 1 whose occupancies follow x(t) = x(0) exp(Q t).

    Jumps s -> t at rate Q[s][t] become Lindblad operators sqrt(Q[s][t]) |t><s|.
    ``initial`` is a state name or a probability vector; default is the first state.
    """
    states = [str(s) for s in states]
    n = len(states)
    q = [[to_fraction(x) for x in row] for row in q]
    if len(q) != n or any(len(r) != n for r in q):
        raise InvalidGenerator(f"rate matrix must be {n}x{n}")
    for s in range(n):
        for t in range(n):
            if s != t and q[s][t] < 0:
                raise InvalidGenerator(f"negative rate Q[{s}][{t}] = {q[s][t]}")
        if sum(q[s]) != 0:
            raise InvalidGenerator(f"row {s} of the rate matrix sums to {sum(q[s])}, not 0")
    if initial is None:
        initial = states[0]
    if isinstance(initial, str):
        if initial not in states:
            raise InvalidGenerator(f"unknown initial state {initial!r}")
        x0 = [Fraction(int(s == initial)) for s in states]
    else:
        x0 = [to_fraction(x) for x in initial]
        if len(x0) != n or any(x < 0 for x in x0) or sum(x0) != 1:
            raise InvalidGenerator("initial distribution must be a probability vector")
    ls = []
    for s in range(n):
        for t in range(n):
            if s != t and q[s][t] > 0:
                ls.append(Matrix.unit(t, s, n).scale(Surd.sqrt(q[s][t])))
    return Qctmc(tuple(states), 1, Matrix.zeros(n), tuple(ls), Matrix.diag(x0))


class SignalTable:
    """Occupancy signals x_s(t) = tr((|s><s| (x) I) rho(t)) in real closed form."""

    def __init__(self, signals: dict, complex_forms: dict):
        self.signals = dict(signals)
        self.complex_forms = dict(complex_forms)

    def resolve(self, name):
        """Accept a state name or the state name prefixed with 'x'."""
        if name in self.signals:
            return name
        if name.startswith("x") and name[1:] in self.signals:
            return name[1:]
        raise UnknownSignal(f"unknown signal {name!r}")

    def __getitem__(self, name) -> RealExpPoly:
        return self.signals[self.resolve(name)]

    def __contains__(self, name):
        try:
            self.resolve(name)
            return True
        except UnknownSignal:
            return False

    def __iter__(self):
        return iter(self.signals)

    def __len__(self):
        return len(self.signals)

    def items(self):
        return self.signals.items()

    def complex_form(self, name) -> ExpPoly:
        return self.complex_forms[self.resolve(name)]

    def lookup(self, names):
        """Map each identifier to its complex-form ExpPoly."""
        return {n: self.complex_form(n) for n in names}


def signal_table(m: Qctmc) -> SignalTable:
    hit = m._cache.get("signals")
    if hit is not None:
        return hit
    d = m.dim
    ks = m.krylov
    complex_forms, real_forms = {}, {}
    for s in m.classical_states:
        weights = {i * d + i: 1 for i in m.projector_indices(s)}
        f = ks.exppoly(weights)
        complex_forms[s] = f
        real_forms[s] = canonical_real_form(f)
    table = SignalTable(real_forms, complex_forms)
    m._cache["signals"] = table
    return table


def coordinate_forms(m: Qctmc):
    """Closed forms of every entry of vec(rho(t))."""
    hit = m._cache.get("coordinates")
    if hit is None:
        ks = m.krylov
        hit = m._cache["coordinates"] = [ks.exppoly({i: 1}) for i in range(m.dim ** 2)]
    return hit


def state_at(m: Qctmc, t, precision=DEFAULT_PRECISION) -> Matrix:
    """Enclosure of rho(t) = V2L(exp(M t) vec(rho0))."""
    t = to_fraction(t)
    if t < 0:
        raise ValueError("t must be nonnegative")
    vals = [ComplexEnclosure(f.evaluate(t, precision), precision) for f in coordinate_forms(m)]
    return devectorize(Matrix(len(vals), 1, vals))


def trace_enclosure(rho: Matrix, precision=DEFAULT_PRECISION):
    with workprec(precision):
        acc = acb(0)
        for i in range(rho.rows):
            x = rho[i, i]
            acc += x.ball if isinstance(x, ComplexEnclosure) else x.enclose(precision)
    return ComplexEnclosure(acc, precision)
