import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.linalg import expm

from conftest import lindblad_numeric, oqw_operators
from qctmc.errors import DimensionMismatch
from qctmc.linops import (
    Matrix,
    devectorize,
    eigendata,
    exp_action_exppoly,
    governing_matrix,
    tensor,
    validate_density,
    vectorize,
)
from qctmc.scalars import ComplexRational, RealEnclosure, Surd

I = ComplexRational(0, 1)


def real_part(z):
    return RealEnclosure(z.real)


def rand_rational_matrix(rng, n, m=None, den=4, span=3):
    m = n if m is None else m
    return Matrix.from_rows([[Fraction(rng.randint(-span * den, span * den), den) for _ in range(m)]
                             for _ in range(n)])


def rand_complex_matrix(rng, n):
    return Matrix.from_rows([[Surd.coerce(ComplexRational(Fraction(rng.randint(-8, 8), 4),
                                                          Fraction(rng.randint(-8, 8), 4)))
                              for _ in range(n)] for _ in range(n)])


def test_tensor_identities():
    assert tensor(Matrix.identity(2), Matrix.identity(2)) == Matrix.identity(4)


def test_tensor_nilpotent():
    n = Matrix.from_rows([[0, 1], [0, 0]])
    t = tensor(n, Matrix.identity(2))
    ones = {(i, j) for i in range(4) for j in range(4) if t[i, j] == Surd.coerce(1)}
    assert ones == {(0, 2), (1, 3)}
    assert all(t[i, j].is_zero() for i in range(4) for j in range(4) if (i, j) not in ones)


def test_tensor_hadamard():
    h = Matrix.from_rows([[1, 1], [1, -1]]).scale(Surd.sqrt(2) * Fraction(1, 2))
    t = tensor(h, h.conjugate())
    got = t.to_numpy()
    hn = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert np.allclose(got, np.kron(hn, hn))
    assert all(x in (Surd.coerce(Fraction(1, 2)), Surd.coerce(Fraction(-1, 2))) for x in t.entries)


def test_vectorize_unit():
    v = vectorize(Matrix.unit(0, 1, 2))
    assert v.shape == (4, 1)
    assert [x == Surd.coerce(1) for x in v.entries] == [False, True, False, False]


def test_devectorize_roundtrip():
    rng = random.Random(1)
    rho = rand_rational_matrix(rng, 3)
    assert devectorize(vectorize(rho)) == rho
    with pytest.raises(DimensionMismatch):
        devectorize(Matrix.zeros(5, 1))


def test_vectorize_sandwich_identity():
    rng = random.Random(2)
    for _ in range(200):
        a, b, c = (rand_complex_matrix(rng, 2) for _ in range(3))
        assert vectorize(a @ b @ c) == tensor(a, c.T) @ vectorize(b)


def test_governing_zero():
    g = governing_matrix(Matrix.zeros(2), [])
    assert g.matrix == Matrix.zeros(4)


def test_governing_diagonal_hamiltonian():
    g = governing_matrix(Matrix.diag([Surd.coerce(1), Surd.coerce(-1)]), [])
    expect = Matrix.diag([Surd(), Surd.coerce(I * -2), Surd.coerce(I * 2), Surd()])
    assert g.matrix == expect


def test_governing_oqw_matches_numeric(oqw):
    g = governing_matrix(oqw.H, oqw.Ls)
    assert g.dim == 64
    h, ls = oqw_operators()
    assert np.allclose(g.matrix.to_numpy(), lindblad_numeric(h, ls), atol=1e-14)


def test_governing_shape_errors():
    with pytest.raises(DimensionMismatch):
        governing_matrix(Matrix.zeros(2), [Matrix.zeros(3)])


def test_eigendata_zero():
    ev = eigendata(Matrix.zeros(4))
    assert [(e.value.is_zero(), e.multiplicity) for e in ev] == [(True, 4)]


def test_eigendata_diagonal():
    ev = eigendata(Matrix.diag([Surd(), Surd.coerce(I * -2), Surd.coerce(I * 2), Surd()]))
    got = sorted((complex(e.value).imag, complex(e.value).real, e.multiplicity) for e in ev)
    assert [(round(b, 12), round(a, 12), k) for b, a, k in got] == [(-2, 0, 1), (0, 0, 2), (2, 0, 1)]


def test_eigendata_oqw_contains_signal_exponents(oqw):
    ev = eigendata(oqw.governing)
    assert sum(e.multiplicity for e in ev) == 64
    r2 = 2 ** 0.5
    wanted = [-(2 + r2) / 2, -(2 - r2) / 2, complex(-1.5, 0.5), complex(-1.5, -0.5),
              complex(-0.5, 0.5), complex(-0.5, -0.5)]
    # independent oracle: numpy eigenvalues of the float matrix
    h, ls = oqw_operators()
    numeric = np.linalg.eigvals(lindblad_numeric(h, ls))
    for w in wanted:
        assert min(abs(complex(e.value) - w) for e in ev) < 1e-12
        assert min(abs(numeric - w)) < 1e-6
    for e in ev:
        assert e.enclosure.ball.overlaps(e.value.enclose(128))


def test_exp_action_zero():
    v = Matrix.from_rows([[Fraction(1, 3)], [2]])
    fs = exp_action_exppoly(Matrix.zeros(2), v)
    for f, x in zip(fs, [Fraction(1, 3), 2]):
        assert [t.exponent.is_zero() for t in f.terms] == [True]
        assert real_part(f.evaluate(Fraction(7, 3))).contains(x)


def test_exp_action_nilpotent():
    fs = exp_action_exppoly(Matrix.from_rows([[0, 1], [0, 0]]), Matrix.from_rows([[3], [5]]))
    first, second = fs
    assert len(first.terms) == 1 and first.terms[0].exponent.is_zero() and first.terms[0].degree == 1
    assert len(second.terms) == 1 and second.terms[0].degree == 0
    t = Fraction(5, 2)
    assert real_part(first.evaluate(t)).contains(3 + 5 * t)
    assert real_part(second.evaluate(t)).contains(5)


@pytest.mark.parametrize("n,seed", [(3, s) for s in range(6)] + [(4, s) for s in range(6)])
def test_exp_action_random_vs_expm(n, seed):
    rng = random.Random(100 + seed)
    m = rand_rational_matrix(rng, n)
    v = rand_rational_matrix(rng, n, 1)
    fs = exp_action_exppoly(m, v)
    mn = m.to_numpy().real
    vn = v.to_numpy().real[:, 0]
    for t in (Fraction(0), Fraction(1, 3), Fraction(1)):
        ref = expm(mn * float(t)) @ vn
        got = np.array([complex(f.evaluate(t, 128).mid()) for f in fs])
        assert np.allclose(got, ref, rtol=1e-9, atol=1e-9)


def test_exp_action_preserves_trace(oqw):
    fs = exp_action_exppoly(oqw.governing, vectorize(oqw.rho0))
    d = oqw.dim
    for t in (Fraction(0), Fraction(1, 2), Fraction(3)):
        tr = sum(complex(fs[i * d + i].evaluate(t, 128).mid()) for i in range(d))
        assert abs(tr - 1) < 1e-15


def test_validate_density_examples():
    assert validate_density(Matrix.identity(2).scale(Fraction(1, 2))).ok
    assert validate_density(Matrix.unit(0, 0, 2)).ok
    rep = validate_density(Matrix.diag([Surd.coerce(2), Surd.coerce(-1)]))
    assert not rep.ok
    assert any("negativ" in v for v in rep.violations)
    assert not any("trace" in v for v in rep.violations)


def test_validate_density_rejects_non_hermitian():
    rep = validate_density(Matrix.from_rows([[Fraction(1, 2), 1], [0, Fraction(1, 2)]]))
    assert not rep.ok and "not Hermitian" in rep.violations


def test_validate_density_trace():
    rep = validate_density(Matrix.identity(2))
    assert not rep.ok and any("trace" in v for v in rep.violations)
