import math
import random
from fractions import Fraction

import mpmath
import pytest
from flint import fmpq, fmpq_poly
from hypothesis import given, settings
from hypothesis import strategies as st

from qctmc.algebraic import AlgebraicNumber
from qctmc.errors import DepthExceeded
from qctmc.exppoly import ExpPoly, atomic_exppoly, canonical_real_form
from qctmc.isolation import (
    IsolationStats,
    Kind,
    exponent_basis,
    find_roots,
    isolate,
    make_pairwise_disjoint,
    polynomialize,
    refine_root,
    solve_atomic,
    univariate_isolate,
)
from qctmc.model import from_ctmc, signal_table
from qctmc.roots import RootRef, compare_roots
from qctmc.stl import parse

from conftest import LAM1, LAM2, LAM3, REFERENCE_BRACKETS, encloses



def phi_of(oqw, text):
    a = parse(text)
    return atomic_exppoly(a.poly, a.bound, signal_table(oqw)).phi


def real(pairs):
    return canonical_real_form(ExpPoly.from_terms(pairs))


@pytest.fixture(scope="module")
def phis(request):
    oqw = request.getfixturevalue("oqw")
    return phi_of(oqw, "x01 + x10 > 1/5"), phi_of(oqw, "x11 >= x01 + x10")


# ---------------------------------------------------------------- exponent basis

def test_basis_integer_multiples():
    b = exponent_basis([-1, -2, -3])
    assert b.basis == (AlgebraicNumber.rational(-1),)
    assert b.combos == ((1,), (2,), (3,))


def test_basis_independent_pair(phis):
    exps = [a for a in phis[0].complex_form.exponents if not a.is_zero()]
    b = exponent_basis(exps)
    assert len(b.basis) == 2 and set(b.basis) == set(exps)
    assert sorted(b.combos) == [(0, 1), (1, 0)]


def test_basis_complex_pair_and_sum():
    z, zc = (lam for lam, _ in AlgebraicNumber.roots_of(fmpq_poly([2, 2, 1])))  # -1 +- i
    b = exponent_basis([z, zc, -2])
    assert set(b.basis) == {z, zc}
    assert b.combination(AlgebraicNumber.rational(-2)) == (1, 1)
    assert sorted(b.combination(x) for x in (z, zc)) == [(0, 1), (1, 0)]


def test_basis_mixed_signs():
    b = exponent_basis([Fraction(-1, 2), Fraction(-3, 2), 1, 3])
    vals = [x.as_fraction() for x in b.basis]
    assert vals == [Fraction(-1, 2), Fraction(1)]
    assert b.combination(AlgebraicNumber.rational(Fraction(-3, 2))) == (3, 0)


# ---------------------------------------------------------------- polynomialize

def test_polynomialize_phi1(phis):
    form = polynomialize(phis[0])
    assert not form.uses_t() and form.nvars == 2
    assert sorted(ns for _, ns in form.terms) == [(0, 0), (0, 1), (1, 0)]
    consts = {ns: complex(c.enclose(128).mid()).real for (_, ns), c in form.terms.items()}
    assert abs(consts[(0, 0)] + 0.2) < 1e-15
    assert sorted(round(v, 12) for k, v in consts.items() if k != (0, 0)) == [round(-math.sqrt(2) / 2, 12),
                                                                             round(math.sqrt(2) / 2, 12)]


def test_polynomialize_univariate_in_y():
    f = ExpPoly.from_terms([(0, [1]), (-2, [-1])])
    form = polynomialize(f, exponent_basis([-1]))
    got = {k: complex(c.enclose(64).mid()).real for k, c in form.terms.items()}
    assert got == {(0, (0,)): 1, (0, (2,)): -1}


def test_polynomialize_with_t():
    f = ExpPoly.from_terms([(1, [0, 1]), (0, [0, 0, 1])])
    form = polynomialize(f, exponent_basis([1]))
    assert form.uses_t()
    keys = {k for k, c in form.terms.items() if complex(c.enclose(64).mid()) != 0}
    assert keys == {(1, (1,)), (2, (0,))}


# ---------------------------------------------------------------- univariate

def test_univariate_sqrt2():
    ivs = univariate_isolate(fmpq_poly([-2, 0, 1]), (0, 2))
    assert len(ivs) == 1 and ivs[0].kind is Kind.SIGN_CHANGE
    assert ivs[0].lo ** 2 < 2 < ivs[0].hi ** 2


def test_univariate_exact_rational():
    ivs = univariate_isolate(fmpq_poly([fmpq(-1, 2), 1]), (0, 1))
    assert len(ivs) == 1 and ivs[0].kind is Kind.EXACT and ivs[0].lo == Fraction(1, 2)


def test_exponential_root_at_boundary():
    roots = find_roots(real([(0, [1]), (-2, [-1])]), (0, 3))
    assert len(roots) == 1 and roots[0].exact and roots[0].lo == 0


def test_exponential_polynomial_through_log_map():
    # (e^{-t} - 1/2)(e^{-t} - 1/4): roots ln 2 and ln 4
    f = real([(0, [Fraction(1, 8)]), (-1, [Fraction(-3, 4)]), (-2, [1])])
    roots = find_roots(f, (0, 3))
    assert len(roots) == 2
    assert encloses(roots[0], mpmath.log(2)) and encloses(roots[1], mpmath.log(4))


# ---------------------------------------------------------------- subdivision isolation

def test_isolate_positive_function_is_empty():
    assert isolate(real([(0, [1]), (-1, [1])]), (0, 1)) == []


def test_isolate_ln2():
    ivs = isolate(real([(-1, [1]), (0, [Fraction(-1, 2)])]), (0, 2))
    assert len(ivs) == 1 and ivs[0].lo < Fraction(693147, 10**6) < ivs[0].hi


def test_isolate_phi1(phis):
    stats = IsolationStats()
    ivs = isolate(phis[0], (0, 6), stats=stats)
    assert len(ivs) == 2
    refs = [RootRef("phi1", phis[0], iv) for iv in ivs]
    for r, lam, key in zip(refs, (LAM1, LAM2), ("lam1", "lam2")):
        assert encloses(r, lam)
        r = r.refine_to(Fraction(1, 2**40))
        assert encloses(r, lam)
        lo, hi = REFERENCE_BRACKETS[key]
        assert lo <= r.lo and r.hi <= hi
    assert stats.calls == 1 and stats.max_depth >= 1


def test_isolate_phi2(phis):
    ivs = isolate(phis[1], (Fraction(1, 1000), 6))
    assert len(ivs) == 1
    r = RootRef("phi2", phis[1], ivs[0]).refine_to(Fraction(1, 2**40))
    assert encloses(r, LAM3)
    lo, hi = REFERENCE_BRACKETS["lam3"]
    assert lo <= r.lo and r.hi <= hi


def test_isolate_precision_grows_with_depth(phis):
    stats = IsolationStats()
    isolate(phis[0], (0, 6), stats=stats)
    assert stats.final_precision == 64 + 2 * stats.max_depth


def test_double_root_hits_depth_cap():
    # (1 - 2 e^{-sqrt2 t})^2 touches zero at t = ln2 / sqrt2 without changing sign
    g, = [lam for lam, _ in AlgebraicNumber.roots_of(fmpq_poly([-2, 0, 1])) if complex(lam).real < 0]
    h = ExpPoly.from_terms([(0, [1]), (g, [-2])])
    with pytest.raises(DepthExceeded):
        isolate(canonical_real_form(h * h), (Fraction(0), Fraction(2)), depth_cap=20)


# ---------------------------------------------------------------- refinement and ordering

def test_refine_ln2():
    r = find_roots(real([(-1, [1]), (0, [Fraction(-1, 2)])]), (0, 2))[0]
    r2 = refine_root(r, Fraction(1, 2**30))
    assert r2.width <= Fraction(1, 2**30) and encloses(r2, mpmath.log(2))
    assert refine_root(r2, Fraction(1, 4)) is r2


def test_refine_lambda1(phis):
    r = find_roots(phis[0], (0, 6))[0]
    r = refine_root(r, Fraction(1, 2**20))
    assert r.width <= Fraction(1, 2**20) and encloses(r, LAM1)


def test_pairwise_disjoint_orders_the_three_roots(phis):
    l1, l2 = find_roots(phis[0], (0, 6), owner="phi1")
    l3, = find_roots(phis[1], (Fraction(1, 1000), 6), owner="phi2")
    out = make_pairwise_disjoint([l2, l3, l1])
    assert [r.owner for r in out] == ["phi1", "phi2", "phi1"]
    assert out[0].same_root(l1) and out[1].same_root(l3) and out[2].same_root(l2)
    assert out[0].hi < out[1].lo and out[1].hi < out[2].lo
    assert compare_roots(l3, l1, 1) == 1 and compare_roots(l3, l2) == -1 and compare_roots(l1, l3, -1) == -1


def test_pairwise_disjoint_single_and_exact():
    f = canonical_real_form(ExpPoly.from_terms([(0, [Fraction(-1, 2), 1])]))
    r, = find_roots(f, (0, 1))
    assert make_pairwise_disjoint([r])[0].same_root(r)
    g = canonical_real_form(ExpPoly.from_terms([(0, [Fraction(-1, 4), 1])]))
    s, = find_roots(g, (0, 1))
    out = make_pairwise_disjoint([r, s])
    assert [x.lo for x in out] == [Fraction(1, 4), Fraction(1, 2)] and all(x.exact for x in out)


# ---------------------------------------------------------------- soundness on random inputs

exponent = st.fractions(min_value=-3, max_value=3, max_denominator=4)
coeff = st.fractions(min_value=-2, max_value=2, max_denominator=4).filter(lambda c: c != 0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(exponent, coeff), min_size=2, max_size=3, unique_by=lambda p: p[0]),
       st.sampled_from([Fraction(1, 3), Fraction(1, 7), Fraction(2, 9)]))
def test_isolation_sound_on_random_sums(terms, shift):
    # a shifted window keeps the ends off exact rational roots
    f = real([(a, [c]) for a, c in terms])
    lo, hi = shift, 4 + shift

    def fv(t):
        return sum(float(c) * math.exp(float(a) * t) for a, c in terms)

    try:
        roots = find_roots(f, (lo, hi))
    except DepthExceeded:
        return
    step = 1e-3
    grid = [float(lo) + k * step for k in range(int(4 / step) + 1)]
    vals = [fv(t) for t in grid]
    for r in roots:
        assert lo <= r.lo <= r.hi <= hi
        if not r.exact:
            assert fv(float(r.lo)) * fv(float(r.hi)) < 0
    inside = lambda t: any(float(r.lo) - step <= t <= float(r.hi) + step for r in roots)
    for t0, t1, v0, v1 in zip(grid, grid[1:], vals, vals[1:]):
        if v0 * v1 < 0:
            assert inside(t0) or inside(t1)


# ---------------------------------------------------------------- atomic solution sets

def test_solve_phi1(oqw):
    s = solve_atomic(parse("x01 + x10 > 1/5"), signal_table(oqw), 6)
    assert len(s) == 1
    iv = s.intervals[0]
    assert iv.lo.open and iv.hi.open
    assert encloses(iv.lo.base, LAM1) and encloses(iv.hi.base, LAM2)


def test_solve_phi2(oqw):
    s = solve_atomic(parse("x11 >= x01 + x10"), signal_table(oqw), 6)
    assert len(s) == 2
    first, second = s.intervals
    assert first.lo.value == 0 and first.hi.value == 0 and not first.lo.open
    assert encloses(second.lo.base, LAM3) and not second.lo.open
    assert second.hi.value == 6 and not second.hi.open


def test_solve_true(oqw):
    s = solve_atomic(parse("true"), signal_table(oqw), 3)
    assert len(s) == 1 and s.intervals[0].lo.value == 0 and s.intervals[0].hi.value == 3


def test_solve_constant_false(oqw):
    assert solve_atomic(parse("1 > 2"), signal_table(oqw), 3).is_empty()


def test_solve_equality(oqw):
    s = solve_atomic(parse("x11 = x01 + x10"), signal_table(oqw), 6)
    assert len(s) == 2
    assert s.intervals[0].lo.value == 0
    assert encloses(s.intervals[1].lo.base, LAM3) and s.intervals[1].lo.base is s.intervals[1].hi.base


@pytest.mark.parametrize("seed", range(8))
def test_solve_random_two_state_chain_on_grid(seed):
    rng = random.Random(seed)
    a, b = Fraction(rng.randint(1, 8), 4), Fraction(rng.randint(1, 8), 4)
    m = from_ctmc(["u", "v"], [[-a, a], [b, -b]])
    lo, hi = sorted(Fraction(rng.randint(1, 99), 100) for _ in range(2))
    atom = parse(f"xu in [{lo}, {hi})")
    s = solve_atomic(atom, signal_table(m), 4)
    r, ss = float(a + b), float(b / (a + b))
    for k in range(4001):
        t = k / 1000
        v = ss + (1 - ss) * math.exp(-r * t)
        if min(abs(v - float(lo)), abs(v - float(hi))) < 1e-9:
            continue
        assert s.contains(Fraction(t)) == (float(lo) <= v < float(hi)), (t, v)
