"""Dense matrices over exact surds or enclosures, vectorization, the governing
matrix of the vectorized Lindblad equation, and exp(M t) v in closed form.

Closed forms are computed exactly: the matrix is rewritten as a rational
matrix acting on coordinates over a basis of Q(i, sqrt(p), ...), Krylov
vectors are formed in exact arithmetic, and every requested coordinate's
derivative sequence is turned into an exponential polynomial through its
exact minimal polynomial.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from flint import acb, acb_mat, arb, fmpq, fmpq_mat, fmpq_poly

from .algebraic import AlgebraicNumber
from .errors import ClusterAmbiguity, DimensionMismatch
from .exppoly import ExpPoly, exppoly_from_sequence
from .scalars import (
    DEFAULT_PRECISION,
    ComplexEnclosure,
    ComplexRational,
    Const,
    Surd,
    max_precision,
    precisions,
    to_fraction,
    workprec,
)


# ------------------------------------------------------------------ matrices

def _coerce_entry(x):
    if isinstance(x, (Surd, ComplexEnclosure)):
        return x
    if isinstance(x, acb):
        return ComplexEnclosure(x)
    return Surd.coerce(x)


class Matrix:
    """Dense row-major matrix of Surd (exact) or ComplexEnclosure entries."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows, cols, entries):
        entries = tuple(_coerce_entry(x) for x in entries)
        if len(entries) != rows * cols:
            raise DimensionMismatch(f"{rows}x{cols} matrix needs {rows * cols} entries, got {len(entries)}")
        self.rows, self.cols, self.entries = rows, cols, entries

    @classmethod
    def from_rows(cls, rows):
        rows = [list(r) for r in rows]
        if not rows:
            raise DimensionMismatch("empty matrix")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise DimensionMismatch("ragged rows")
        return cls(len(rows), n, [x for r in rows for x in r])

    @classmethod
    def zeros(cls, rows, cols=None):
        cols = rows if cols is None else cols
        return cls(rows, cols, [Surd()] * (rows * cols))

    @classmethod
    def identity(cls, n):
        return cls(n, n, [Surd.coerce(1) if i == j else Surd() for i in range(n) for j in range(n)])

    @classmethod
    def unit(cls, i, j, n, m=None):
        """|i><j| in an n x m space."""
        m = n if m is None else m
        return cls(n, m, [Surd.coerce(1) if (r, c) == (i, j) else Surd() for r in range(n) for c in range(m)])

    @classmethod
    def diag(cls, values):
        n = len(values)
        return cls(n, n, [values[i] if i == j else Surd() for i in range(n) for j in range(n)])

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i):
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def is_square(self):
        return self.rows == self.cols

    def is_exact(self):
        return all(isinstance(x, Surd) for x in self.entries)

    def is_rational(self):
        return self.is_exact() and all(x.is_rational() and x.is_real() for x in self.entries)

    # ---------------------------------------------------------------- algebra
    def _same_shape(self, other):
        if self.shape != other.shape:
            raise DimensionMismatch(f"shapes {self.shape} and {other.shape} differ")

    def __add__(self, other):
        self._same_shape(other)
        return Matrix(self.rows, self.cols, [a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other):
        self._same_shape(other)
        return Matrix(self.rows, self.cols, [a - b for a, b in zip(self.entries, other.entries)])

    def __neg__(self):
        return Matrix(self.rows, self.cols, [-a for a in self.entries])

    def scale(self, c):
        c = _coerce_entry(c)
        return Matrix(self.rows, self.cols, [c * a for a in self.entries])

    def __mul__(self, c):
        if isinstance(c, Matrix):
            return self @ c
        return self.scale(c)

    def __rmul__(self, c):
        return self.scale(c)

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        out = []
        for i in range(self.rows):
            r = self.row(i)
            for j in range(other.cols):
                acc = Surd()
                for k in range(self.cols):
                    a, b = r[k], other.entries[k * other.cols + j]
                    if isinstance(a, Surd) and a.is_zero() or isinstance(b, Surd) and b.is_zero():
                        continue
                    acc = acc + a * b
                out.append(acc)
        return Matrix(self.rows, other.cols, out)

    def transpose(self):
        return Matrix(self.cols, self.rows, [self[j, i] for i in range(self.cols) for j in range(self.rows)])

    @property
    def T(self):
        return self.transpose()

    def conjugate(self):
        return Matrix(self.rows, self.cols, [a.conjugate() for a in self.entries])

    def adjoint(self):
        return self.transpose().conjugate()

    def trace(self):
        if not self.is_square():
            raise DimensionMismatch("trace of a non-square matrix")
        acc = Surd()
        for i in range(self.rows):
            acc = acc + self[i, i]
        return acc

    def is_hermitian(self):
        """Exact check for surd entries; overlap check for enclosures."""
        if not self.is_square():
            return False
        for i in range(self.rows):
            for j in range(i, self.cols):
                a, b = self[i, j], self[j, i].conjugate()
                if isinstance(a, Surd) and isinstance(b, Surd):
                    if a != b:
                        return False
                else:
                    za = a if isinstance(a, ComplexEnclosure) else ComplexEnclosure.exact(a)
                    zb = b if isinstance(b, ComplexEnclosure) else ComplexEnclosure.exact(b)
                    if not za.overlaps(zb):
                        return False
        return True

    def __eq__(self, other):
        return isinstance(other, Matrix) and self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def to_numpy(self):
        return np.array([complex(x) for x in self.entries], dtype=complex).reshape(self.rows, self.cols)

    def enclose(self, prec=DEFAULT_PRECISION):
        """acb_mat enclosure of the matrix."""
        m = acb_mat(self.rows, self.cols)
        for i in range(self.rows):
            for j in range(self.cols):
                x = self[i, j]
                m[i, j] = x.ball if isinstance(x, ComplexEnclosure) else x.enclose(prec)
        return m

    def to_fmpq_mat(self):
        if not self.is_rational():
            raise ValueError("matrix is not rational")
        return fmpq_mat(self.rows, self.cols, [_fq(x.as_fraction()) for x in self.entries])

    def __repr__(self):
        body = "; ".join(", ".join(str(x) for x in self.row(i)) for i in range(self.rows))
        return f"Matrix({self.rows}x{self.cols}: {body})"


def _fq(q):
    q = to_fraction(q)
    return fmpq(q.numerator, q.denominator)


def tensor(a: Matrix, b: Matrix) -> Matrix:
    """Kronecker product; row index (i1, i2) maps to i1 * b.rows + i2."""
    out = []
    for i1 in range(a.rows):
        for i2 in range(b.rows):
            for j1 in range(a.cols):
                x = a[i1, j1]
                for j2 in range(b.cols):
                    out.append(x * b[i2, j2])
    return Matrix(a.rows * b.rows, a.cols * b.cols, out)


def vectorize(g: Matrix) -> Matrix:
    """Row-major stacking of a square matrix into a d^2 x 1 column."""
    if not g.is_square():
        raise DimensionMismatch("vectorize needs a square matrix")
    return Matrix(g.rows * g.cols, 1, g.entries)


def devectorize(v: Matrix) -> Matrix:
    if v.cols != 1:
        raise DimensionMismatch("devectorize needs a column")
    d = math.isqrt(v.rows)
    if d * d != v.rows:
        raise DimensionMismatch(f"length {v.rows} is not a perfect square")
    return Matrix(d, d, v.entries)


# ------------------------------------------------------------------ governing matrix

@dataclass(frozen=True)
class GoverningMatrix:
    dim: int
    matrix: Matrix

    def __post_init__(self):
        if self.matrix.shape != (self.dim, self.dim):
            raise DimensionMismatch("governing matrix must be dim x dim")


def governing_matrix(h: Matrix, ls) -> GoverningMatrix:
    """M with vec(rho') = M vec(rho) for rho' = -i[H, rho] + sum_j D[L_j](rho)."""
    d = h.rows
    if not h.is_square():
        raise DimensionMismatch("H must be square")
    for l in ls:
        if l.shape != (d, d):
            raise DimensionMismatch(f"Lindblad operator of shape {l.shape} on a {d}-dimensional space")
    eye = Matrix.identity(d)
    i_unit = Surd.coerce(ComplexRational(0, 1))
    m = tensor(h, eye).scale(-i_unit) + tensor(eye, h.T).scale(i_unit)
    half = Surd.coerce(Fraction(1, 2))
    for l in ls:
        ldl = l.adjoint() @ l
        m = m + tensor(l, l.conjugate()) - tensor(ldl, eye).scale(half) - tensor(eye, ldl.T).scale(half)
    return GoverningMatrix(d * d, m)


# ------------------------------------------------------------------ exact Krylov machinery

class _Realification:
    """Q-linear form of an exact matrix over the field Q(i, sqrt(p1), ...).

    Each complex coordinate becomes nb rational coordinates, one per basis
    element i^a * sqrt(n) of the field.
    """

    def __init__(self, m: Matrix, vectors):
        entries = list(m.entries) + [x for v in vectors for x in v.entries]
        primes = sorted({p for x in entries for n in x.radicands() for p in _prime_factors(n)})
        complex_ = any(not x.is_real() for x in entries)
        radicals = sorted(math.prod(c) for k in range(len(primes) + 1) for c in itertools.combinations(primes, k))
        self.basis = [(a, n) for a in ((0, 1) if complex_ else (0,)) for n in radicals]
        self.index = {b: k for k, b in enumerate(self.basis)}
        self.nb = len(self.basis)
        self.dim = m.rows
        self.values = [Surd({n: ComplexRational(0, 1) if a else 1}) for a, n in self.basis]
        nb = self.nb
        r = fmpq_mat(m.rows * nb, m.cols * nb)
        for i in range(m.rows):
            for j in range(m.cols):
                x = m[i, j]
                if x.is_zero():
                    continue
                for k, val in enumerate(self.values):
                    for kk, c in self._coords(x * val):
                        r[i * nb + kk, j * nb + k] += c
        self.matrix = r

    def _coords(self, s: Surd):
        out = []
        for n, c in s.terms:
            if c.re:
                out.append((self.index[(0, n)], _fq(c.re)))
            if c.im:
                out.append((self.index[(1, n)], _fq(c.im)))
        return out

    def vector(self, v: Matrix):
        out = fmpq_mat(v.rows * self.nb, 1)
        for i, x in enumerate(v.entries):
            for k, c in self._coords(x):
                out[i * self.nb + k, 0] += c
        return out


def _prime_factors(n):
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


class KrylovSystem:
    """Exact Krylov data of (M, v) for forming derivative sequences M^j v."""

    def __init__(self, m: Matrix, v: Matrix):
        if not m.is_exact() or not v.is_exact():
            raise TypeError("closed forms need exact matrices")
        if m.rows != m.cols or m.cols != v.rows or v.cols != 1:
            raise DimensionMismatch("M must be square and v a matching column")
        self.real = _Realification(m, [v])
        r = self.real.matrix
        cols = [self.real.vector(v)]
        self.minpoly = None
        n = r.nrows()
        while self.minpoly is None:
            target = min(n + 1, max(8, 2 * len(cols)))
            while len(cols) < target:
                cols.append(r * cols[-1])
            k = _matrix_from_columns(cols).rank()
            if k < len(cols):
                self.minpoly = self._dependency(cols, k)
            elif len(cols) == n + 1:
                raise AssertionError("Krylov columns cannot all be independent")
        self.degree = self.minpoly.degree()
        self.columns = cols[: self.degree + 1]

    @staticmethod
    def _dependency(cols, k):
        basis = _matrix_from_columns(cols[:k])
        gram = basis.transpose() * basis
        rhs = basis.transpose() * cols[k]
        c = gram.solve(rhs)
        return fmpq_poly([-c[i, 0] for i in range(k)] + [1])

    def sequence(self, weights, component=0):
        """w . (R^j v) for j < degree + 1, w given as {coordinate: rational}."""
        nb = self.real.nb
        out = []
        for col in self.columns:
            s = fmpq(0)
            for i, w in weights.items():
                s += _fq(w) * col[i * nb + component, 0]
            out.append(s)
        return out

    def exppoly(self, weights) -> ExpPoly:
        """Closed form of sum_i w_i (exp(M t) v)_i."""
        total = None
        for k, val in enumerate(self.real.values):
            seq = self.sequence(weights, k)
            if all(x == 0 for x in seq):
                continue
            f = exppoly_from_sequence(_extend(seq, self.minpoly, 2 * self.degree + 2))
            part = f if val == Surd.coerce(1) else f.scale(Const(val))
            total = part if total is None else total + part
        if total is None:
            return exppoly_from_sequence([0])
        if self.real.nb > 1:
            total = total.pruned(2 * DEFAULT_PRECISION)
        return total


def _extend(seq, mu, n):
    seq = list(seq)
    k = mu.degree()
    rec = [-c for c in mu.coeffs()[:k]]
    while len(seq) < n:
        j = len(seq)
        seq.append(sum((rec[i] * seq[j - k + i] for i in range(k)), fmpq(0)))
    return seq


def _matrix_from_columns(cols):
    n = cols[0].nrows()
    out = fmpq_mat(n, len(cols))
    for j, c in enumerate(cols):
        for i in range(n):
            x = c[i, 0]
            if x != 0:
                out[i, j] = x
    return out


def exp_action_exppoly(m, v: Matrix):
    """ExpPoly closed forms of every coordinate of exp(M t) v."""
    mat = m.matrix if isinstance(m, GoverningMatrix) else m
    ks = KrylovSystem(mat, v)
    return [ks.exppoly({i: 1}) for i in range(mat.rows)]


# ------------------------------------------------------------------ eigenvalues

@dataclass(frozen=True)
class Eigenvalue:
    value: AlgebraicNumber
    multiplicity: int
    enclosure: ComplexEnclosure = field(compare=False)


def eigendata(m, precision=DEFAULT_PRECISION):
    """Distinct eigenvalues with algebraic multiplicities, as disjoint enclosures."""
    mat = m.matrix if isinstance(m, GoverningMatrix) else m
    if not mat.is_square():
        raise DimensionMismatch("eigenvalues of a non-square matrix")
    if mat.is_rational():
        pairs = AlgebraicNumber.roots_of(mat.to_fmpq_mat().charpoly())
    elif mat.is_exact():
        pairs = _surd_eigen(mat)
    else:
        raise TypeError("eigendata needs an exact matrix")
    for p in precisions(precision, max(precision, max_precision())):
        balls = [lam.enclose(p) for lam, _ in pairs]
        if all(not balls[i].overlaps(balls[j]) for i in range(len(balls)) for j in range(i)):
            return [Eigenvalue(lam, mult, ComplexEnclosure(b, p, lam)) for (lam, mult), b in zip(pairs, balls)]
    raise ClusterAmbiguity("eigenvalue enclosures still overlap at the precision cap")


def _charpoly_surd(m: Matrix):
    """Characteristic polynomial coefficients (Surd, ascending) by Faddeev-LeVerrier."""
    n = m.rows
    coeffs = [Surd()] * (n + 1)
    coeffs[n] = Surd.coerce(1)
    mk = Matrix.zeros(n)
    eye = Matrix.identity(n)
    for k in range(1, n + 1):
        mk = m @ (mk + eye.scale(coeffs[n - k + 1]))
        coeffs[n - k] = -(mk.trace()) / k
    return coeffs


def _galois_images(coeffs):
    primes = sorted({p for c in coeffs for n in c.radicands() for p in _prime_factors(n)})
    complex_ = any(not c.is_real() for c in coeffs)
    images = []
    for signs in itertools.product((1, -1), repeat=len(primes)):
        for conj in ((False, True) if complex_ else (False,)):
            sign_of = dict(zip(primes, signs))
            img = []
            for c in coeffs:
                terms = {}
                for n, z in c.terms:
                    s = math.prod(sign_of[p] for p in _prime_factors(n)) if n > 1 else 1
                    terms[n] = (z.conjugate() if conj else z) * s
                img.append(Surd(terms))
            images.append(img)
    return images


def _surd_poly_mul(a, b):
    out = [Surd()] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def _surd_eigen(m: Matrix):
    chi = _charpoly_surd(m)
    norm = [Surd.coerce(1)]
    for img in _galois_images(chi):
        norm = _surd_poly_mul(norm, img)
    norm_q = fmpq_poly([_fq(c.as_fraction()) for c in norm])
    candidates = [lam for lam, _ in AlgebraicNumber.roots_of(norm_q)]
    n = m.rows
    derivs = [chi]
    for _ in range(n):
        p = derivs[-1]
        derivs.append([p[i] * i for i in range(1, len(p))])
    for prec in precisions(DEFAULT_PRECISION, max_precision()):
        mults = {}
        for lam in candidates:
            z = lam.enclose(prec)
            with workprec(prec):
                for k, poly in enumerate(derivs):
                    val = acb(0)
                    for c in reversed(poly):
                        val = val * z + c.enclose(prec)
                    if not val.contains(0):
                        break
            if k:
                mults[lam] = k
        if sum(mults.values()) == n:
            return [(lam, mults[lam]) for lam in candidates if lam in mults]
    raise ClusterAmbiguity("could not certify eigenvalue multiplicities")


# ------------------------------------------------------------------ densities

@dataclass
class DensityReport:
    ok: bool
    violations: list
    min_eigenvalue: float | None = None

    def __bool__(self):
        return self.ok


def validate_density(rho: Matrix, tolerance=Fraction(1, 2**30)) -> DensityReport:
    """Hermiticity, unit trace and minimum eigenvalue >= -tolerance."""
    violations = []
    if not rho.is_square():
        return DensityReport(False, ["not square"])
    if not rho.is_hermitian():
        violations.append("not Hermitian")
    tr = rho.trace()
    if isinstance(tr, Surd):
        if tr != Surd.coerce(1):
            violations.append(f"trace = {tr}, not 1")
    elif not tr.contains(1):
        violations.append(f"trace enclosure {tr} does not contain 1")
    approx = float(np.linalg.eigvalsh((rho.to_numpy() + rho.to_numpy().conj().T) / 2).min())
    if "not Hermitian" not in violations:
        if not _shifted_positive(rho, to_fraction(tolerance)):
            violations.append(f"negativity: minimum eigenvalue {approx:.6g} < -{float(tolerance):.3g}")
    return DensityReport(not violations, violations, approx)


def _shifted_positive(rho: Matrix, tol):
    """Certify rho + tol*I positive definite by an LDL* factorization in balls."""
    n = rho.rows
    for prec in precisions(DEFAULT_PRECISION, max_precision()):
        with workprec(prec):
            a = rho.enclose(prec)
            a = a + acb_mat(n, n, [acb(arb(fmpq(tol.numerator, tol.denominator))) if i == j else acb(0)
                                   for i in range(n) for j in range(n)])
            undecided = False
            ok = True
            for k in range(n):
                piv = a[k, k].real
                if piv > 0:
                    pass
                elif piv < 0 or piv == 0:
                    ok = False
                    break
                else:
                    undecided = True
                    break
                for i in range(k + 1, n):
                    f = a[i, k] / a[k, k]
                    for j in range(k + 1, n):
                        a[i, j] = a[i, j] - f * a[k, j]
            if not undecided:
                return ok
    return False
