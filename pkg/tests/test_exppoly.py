import math
from fractions import Fraction

import pytest
from flint import fmpq_poly
from hypothesis import given, settings
from hypothesis import strategies as st

from qctmc.algebraic import AlgebraicNumber
from qctmc.errors import RealnessViolation, UnknownSignal
from qctmc.exppoly import (
    Bound,
    ExpPoly,
    Polynomial,
    atomic_exppoly,
    berlekamp_massey,
    canonical_real_form,
    exppoly_from_sequence,
)
from qctmc.model import signal_table
from qctmc.scalars import ComplexRational, Surd
from qctmc.stl import parse

R2 = math.sqrt(2)
RATES = (-(2 + R2) / 2, -(2 - R2) / 2)


def value(f, t, prec=128):
    z = f.evaluate(Fraction(t), prec)
    return complex(z.mid()) if hasattr(z, "imag") else float(z.mid)


def real_value(f, t, prec=128):
    return float(f.evaluate(Fraction(t), prec).mid)


def atom_of(text):
    a = parse(text)
    return a.poly, a.bound


def test_multiply_exponentials():
    e = ExpPoly.exponential(1)
    f = e * e
    assert [t.exponent for t in f.terms] == [AlgebraicNumber.rational(2)]


def test_multiply_difference_of_squares():
    e = ExpPoly.exponential(-1)
    f = (1 + e) * (1 - e)
    got = {t.exponent.as_fraction(): complex(t.coeffs[0].enclose(64).mid()) for t in f.terms}
    assert got == {Fraction(-2): -1, Fraction(0): 1}


def test_square_of_x00(oqw):
    x = signal_table(oqw).complex_form("00")
    f = x * x
    exps = sorted(complex(a).real for a in f.exponents)
    assert len(exps) == 3
    assert all(abs(a - b) < 1e-15 for a, b in zip(exps, [-(2 + R2), -2, -(2 - R2)]))
    for t in (0, Fraction(1, 2), 2):
        tt = float(t)
        want = 0.25 * math.exp(-(2 + R2) * tt) + 0.5 * math.exp(-2 * tt) + 0.25 * math.exp(-(2 - R2) * tt)
        assert abs(value(f, t) - want) < 1e-15


def test_derivative_examples():
    f = ExpPoly.exponential(2, (0, 1))  # t e^{2t}
    d = f.derivative()
    assert len(d.terms) == 1 and d.terms[0].exponent == 2
    assert [complex(c.enclose(64).mid()) for c in d.terms[0].coeffs] == [1, 2]
    assert ExpPoly.constant(5).derivative().is_zero()


def test_derivative_of_phi1_matches_finite_difference(oqw):
    poly, bound = atom_of("x01 + x10 > 1/5")
    phi = atomic_exppoly(poly, bound, signal_table(oqw)).phi
    h = Fraction(1, 2**20)
    fd = (phi.evaluate(h, 256).mid - phi.evaluate(-h, 256).mid) / (2 * h)
    d0 = phi.derivative.evaluate(0, 256)
    # phi'(0) = sqrt(2)/2 * ((2 + sqrt2)/2 - (2 - sqrt2)/2) = 1
    assert d0.contains(1)
    assert abs(fd - d0.mid) < Fraction(1, 2**30)


def test_canonical_real_form_pairs_conjugates():
    a = AlgebraicNumber.roots_of(fmpq_poly([5, 6, 2]))  # roots -3/2 +- i/2
    f = ExpPoly.from_terms([(lam, [Fraction(1, 2)]) for lam, _ in a])
    g = canonical_real_form(f)
    assert len(g.terms) == 1 and g.terms[0].oscillating
    for t in (0, 1, Fraction(7, 2)):
        tt = float(t)
        assert abs(real_value(g, t) - math.exp(-1.5 * tt) * math.cos(tt / 2)) < 1e-15


def test_canonical_real_form_x01(oqw):
    g = signal_table(oqw)["01"]
    osc = [t for t in g.terms if t.oscillating]
    assert len(osc) == 2 and len(g.terms) == 4
    by_rate = {round(complex(t.alpha).real, 12): t for t in osc}
    for rate, (p, q) in {-1.5: (0.25, 0.25), -0.5: (-0.25, 0.25)}.items():
        t = by_rate[rate]
        assert abs(complex(t.alpha).imag - 0.5) < 1e-15
        assert abs(float(t.p[0].enclose(128).real.mid()) - p) < 1e-15
        assert abs(float(t.q[0].enclose(128).real.mid()) - q) < 1e-15
    real_rates = sorted(complex(t.alpha).real for t in g.terms if not t.oscillating)
    assert all(abs(a - b) < 1e-15 for a, b in zip(real_rates, RATES))


def test_canonical_real_form_unpaired():
    f = ExpPoly.exponential(AlgebraicNumber.roots_of(fmpq_poly([1, 0, 1]))[1][0])
    with pytest.raises(RealnessViolation):
        canonical_real_form(f)


def test_canonical_real_form_complex_coefficient_on_real_exponent():
    f = ExpPoly.from_terms([(-1, [Surd.coerce(ComplexRational(0, 1))])])
    with pytest.raises(RealnessViolation):
        canonical_real_form(f)


def test_evaluate_phi_at_zero(oqw):
    sig = signal_table(oqw)
    phi1 = atomic_exppoly(*atom_of("x01 + x10 > 1/5"), sig).phi
    phi2 = atomic_exppoly(*atom_of("x11 >= x01 + x10"), sig).phi
    assert phi1.evaluate(0).contains(Fraction(-1, 5))
    assert phi2.evaluate(0).contains(0)


def test_evaluate_range_of_decay():
    g = canonical_real_form(ExpPoly.exponential(-1))
    r = g.evaluate((0, 1), 64)
    assert r.lo <= Fraction(36787944117144, 10**14) and r.hi >= 1
    assert float(r.width) <= 1 - math.exp(-1) + 2**-20


def test_atomic_phi1_closed_form(oqw):
    af = atomic_exppoly(*atom_of("x01 + x10 > 1/5"), signal_table(oqw))
    assert len(af.factors) == 1 and af.factors[0][1] == "lo"
    phi = af.phi
    assert sorted(round(complex(a).real, 12) for a in phi.exponents) == sorted(round(r, 12) for r in RATES + (0,))
    for t in (0, Fraction(1, 3), 2, 5):
        tt = float(t)
        want = -0.2 - R2 / 2 * math.exp(RATES[0] * tt) + R2 / 2 * math.exp(RATES[1] * tt)
        assert abs(real_value(phi, t) - want) < 1e-15


def test_atomic_phi2_closed_form(oqw):
    phi = atomic_exppoly(*atom_of("x11 >= x01 + x10"), signal_table(oqw)).phi
    for t in (0, Fraction(1, 3), 2, 5):
        tt = float(t)
        want = 1 + (R2 - 0.5) * math.exp(RATES[0] * tt) - (R2 + 0.5) * math.exp(RATES[1] * tt)
        assert abs(real_value(phi, t) - want) < 1e-15


def test_atomic_everything_has_no_factors(oqw):
    af = atomic_exppoly(Polynomial.var("x00"), Bound(), signal_table(oqw))
    assert af.factors == []


def test_atomic_two_sided_bound_is_product(oqw):
    sig = signal_table(oqw)
    af = atomic_exppoly(Polynomial.var("x00"), Bound(Fraction(1, 4), Fraction(3, 4), True, False), sig)
    assert [s for _, s in af.factors] == ["lo", "hi"]
    for t in (0, 1, 3):
        x = real_value(sig["00"], t)
        assert abs(real_value(af.phi, t) - (x - 0.25) * (x - 0.75)) < 1e-15


def test_unknown_signal(oqw):
    with pytest.raises(UnknownSignal):
        atomic_exppoly(Polynomial.var("x99"), Bound(0), signal_table(oqw))


def test_berlekamp_massey_examples():
    fib = [0, 1]
    while len(fib) < 12:
        fib.append(fib[-1] + fib[-2])
    assert berlekamp_massey(fib) == fmpq_poly([-1, -1, 1])
    assert berlekamp_massey([3 * 2**j for j in range(8)]) == fmpq_poly([-2, 1])
    assert berlekamp_massey([Fraction(j) for j in range(8)]) == fmpq_poly([1, -2, 1])


def test_sequence_roundtrip_with_repeated_root():
    # f = (1 + 2t) e^{-t}: f^(j)(0) = (-1)^j (1 - 2j)
    seq = [(-1) ** j * (1 - 2 * j) for j in range(8)]
    f = exppoly_from_sequence(seq)
    assert len(f.terms) == 1 and f.terms[0].exponent == -1 and f.terms[0].degree == 1
    for t in (0, 1, 3):
        assert abs(value(f, t).real - (1 + 2 * t) * math.exp(-t)) < 1e-14


def test_source_sequences_compose(oqw):
    x = signal_table(oqw).complex_form("11")
    f = x * x - x
    assert f.source is not None
    h = f.derivative()
    assert h.source.terms(3)[0] == f.source.terms(3)[1]


small = st.fractions(min_value=-3, max_value=3, max_denominator=4)
term_list = st.lists(st.tuples(small, small), min_size=1, max_size=3)


def build(pairs):
    return ExpPoly.from_terms([(a, [c]) for a, c in pairs])


def direct(pairs, t):
    return sum(float(c) * math.exp(float(a) * t) for a, c in pairs)


@settings(max_examples=60, deadline=None)
@given(term_list, term_list, st.fractions(min_value=0, max_value=2, max_denominator=8))
def test_algebra_agrees_pointwise(p, q, t):
    f, g = build(p), build(q)
    tt = float(t)
    a, b = direct(p, tt), direct(q, tt)
    assert abs(value(f + g, t).real - (a + b)) < 1e-9
    assert abs(value(f * g, t).real - a * b) < 1e-9
    assert abs(value(f.scale(Fraction(-3, 2)), t).real + 1.5 * a) < 1e-9


@settings(max_examples=60, deadline=None)
@given(term_list, st.fractions(min_value=0, max_value=3, max_denominator=8),
       st.fractions(min_value=0, max_value=2, max_denominator=8))
def test_range_enclosure_is_sound(p, lo, w):
    g = canonical_real_form(build(p))
    hi = lo + w
    r = g.evaluate((lo, hi), 64, pieces=4)
    for k in range(11):
        t = lo + w * Fraction(k, 10)
        v = g.evaluate(t, 64)
        assert r.lo <= v.hi and v.lo <= r.hi
