"""Symplectic bases of polarized ideal lattices and the resulting period matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .approx import ApproxComplex, ErrorBound, add, div, mul, round_to, sub
from .cm_enumerate import PPAVTriple
from .cmfield import CMFieldSpec, FieldElement, embed, get_field
from .lattice import det, unimodular_row_solve

OMEGA = ((0, 0, 1, 0), (0, 0, 0, 1), (-1, 0, 0, 0), (0, -1, 0, 0))


class PrecisionRetry(ArithmeticError):
    """The requested precision is too low to certify a property; retry with more bits."""


def polarization_matrix(t: PPAVTriple) -> list[list[int]]:
    """A_ij = Tr(xi b_i conj(b_j)) on the stored ideal basis; antisymmetric with det 1."""
    B = t.basis
    A = []
    for x in B:
        row = []
        for y in B:
            v = (t.xi * x * y.conj()).trace()
            if v.denominator != 1:
                raise ArithmeticError("polarization is not integral on the ideal")
            row.append(int(v))
        A.append(row)
    if any(A[i][j] != -A[j][i] for i in range(4) for j in range(4)):
        raise ArithmeticError("polarization matrix is not antisymmetric")
    if det(A) != 1:
        raise ArithmeticError(f"polarization has determinant {det(A)}, not 1")
    return A


def _form(A, x, y) -> int:
    return sum(x[i] * A[i][j] * y[j] for i in range(4) for j in range(4))


def symplectic_transform(A) -> list[list[int]]:
    """Integral M with M^t A M = Omega, built one hyperbolic pair at a time."""
    n = len(A)
    g = n // 2
    es: list[list[int]] = []
    vs: list[list[int]] = []
    for _ in range(g):
        # 1. lowest-index unit vector independent of the vectors found so far
        e_prime = None
        for k in range(n):
            cand = [int(i == k) for i in range(n)]
            if _rank(es + vs + [cand]) == len(es) + len(vs) + 1:
                e_prime = cand
                break
        # 2. make it orthogonal to the previous pairs and primitive
        e = list(e_prime)
        for ej, vj in zip(es, vs):
            c1 = _form(A, ej, e_prime)
            c2 = _form(A, vj, e_prime)
            e = [x - c1 * v + c2 * w for x, v, w in zip(e, vj, ej)]
        k = math.gcd(*e)
        e = [x // k for x in e]
        # 3. v' with e^t A v' = 1
        row = [sum(e[i] * A[i][j] for i in range(n)) for j in range(n)]
        if math.gcd(*row) != 1:
            raise ArithmeticError("e^t A v = 1 has no integral solution")
        v_prime = unimodular_row_solve(row)
        # 4. orthogonalize v'
        v = list(v_prime)
        for ej, vj in zip(es, vs):
            c1 = _form(A, ej, v_prime)
            c2 = _form(A, vj, v_prime)
            v = [x - c1 * a + c2 * b for x, a, b in zip(v, vj, ej)]
        es.append(e)
        vs.append(v)
    cols = es + vs
    M = [[cols[j][i] for j in range(n)] for i in range(n)]
    if not is_symplectic_for(M, A):
        raise ArithmeticError("symplectic basis construction failed")
    return M


def _rank(vectors) -> int:
    if not vectors:
        return 0
    from fractions import Fraction

    rows = [[Fraction(x) for x in v] for v in vectors]
    r = 0
    ncols = len(rows[0])
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c] / rows[r][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
    return r


def is_symplectic_for(M, A) -> bool:
    n = len(M)
    MtAM = [[sum(M[k][i] * A[k][l] * M[l][j] for k in range(n) for l in range(n)) for j in range(n)]
            for i in range(n)]
    return all(MtAM[i][j] == OMEGA[i][j] for i in range(n) for j in range(n))


# ---------------------------------------------------------------------------
# Period matrices


@dataclass(frozen=True)
class SiegelPoint:
    """Z = [[z1, z3], [z3, z2]] with certified entries."""

    z1: ApproxComplex
    z2: ApproxComplex
    z3: ApproxComplex

    @property
    def precision(self) -> int:
        return min(self.z1.precision, self.z2.precision, self.z3.precision)

    @property
    def error(self) -> ErrorBound:
        return max(self.z1.err, self.z2.err, self.z3.err)

    def entries(self):
        return self.z1, self.z2, self.z3

    def as_complex(self) -> tuple[complex, complex, complex]:
        return complex(self.z1), complex(self.z2), complex(self.z3)

    def imag_parts(self):
        return self.z1.imag, self.z2.imag, self.z3.imag

    @staticmethod
    def from_complex(z1, z2, z3, n: int = 53) -> SiegelPoint:
        return SiegelPoint(*(ApproxComplex.from_complex(complex(z), n) for z in (z1, z2, z3)))

    def rounded(self, n: int) -> SiegelPoint:
        return SiegelPoint(*(round_to(z, n) for z in self.entries()))


def imag_positive_definite(Z: SiegelPoint) -> bool:
    """Certified test that Im Z is positive definite."""
    e = Z.error.as_fraction()
    y1, y2, y3 = Z.imag_parts()
    if y1 - e <= 0:
        return False
    # det lower bound with each entry moved by e against us
    lo = (y1 - e) * (y2 - e) - (abs(y3) + e) ** 2
    return lo > 0


def _embedded_columns(fld, elements, ids, n):
    return [[embed(fld, x, j, n) for x in elements] for j in ids]


def _inverse_times(Om_v, Om_e, n):
    """Om_v^-1 Om_e for 2x2 matrices of ApproxComplex (rows = embeddings)."""
    a, b = Om_v[0]
    c, d = Om_v[1]
    dt = sub(mul(a, d, n), mul(b, c, n), n)
    # inverse = [[d, -b], [-c, a]] / dt
    out = [[None, None], [None, None]]
    for i in range(2):
        for j in range(2):
            e0, e1 = Om_e[0][j], Om_e[1][j]
            if i == 0:
                num = sub(mul(d, e0, n), mul(b, e1, n), n)
            else:
                num = sub(mul(a, e1, n), mul(c, e0, n), n)
            out[i][j] = div(num, dt, n)
    return out


def basis_from_transform(t: PPAVTriple, M) -> tuple[list[FieldElement], list[FieldElement]]:
    """Field elements e_1, e_2, v_1, v_2 given by the columns of M on the ideal basis."""
    zero = FieldElement.from_int(t.field.spec, 0)
    cols = []
    for j in range(4):
        x = zero
        for k in range(4):
            if M[k][j]:
                x = x + t.basis[k] * M[k][j]
        cols.append(x)
    return cols[:2], cols[2:]


def period_matrix(t: PPAVTriple, M, n: int) -> SiegelPoint:
    """Period matrix of the symplectic basis given by M, certified to absolute error 2^-n.

    Z = Omega_v^-1 Omega_e evaluated under the complex conjugates of the
    embeddings in the CM type; with E(x, y) = Tr(xi x conj(y)) this is the
    orientation that lands in the Siegel upper half space.
    """
    fld = t.field
    es, vs = basis_from_transform(t, M)
    ids = [(j + 2) % 4 for j in t.cm_type.embedding_ids]
    w = n + 32
    for _attempt in range(12):
        Om_e = _embedded_columns(fld, es, ids, w)
        Om_v = _embedded_columns(fld, vs, ids, w)
        try:
            Zm = _inverse_times(Om_v, Om_e, w)
        except ZeroDivisionError:
            w *= 2
            continue
        z1, z3a, z3b, z2 = Zm[0][0], Zm[0][1], Zm[1][0], Zm[1][1]
        err = max(z1.err, z2.err, z3a.err)
        if err <= ErrorBound.pow2(-n - 2):
            Z = SiegelPoint(round_to(z1, n), round_to(z2, n), round_to(z3a, n))
            if not imag_positive_definite(Z):
                raise PrecisionRetry("could not certify Im Z > 0 at this precision")
            sym = sub(z3a, z3b, w)
            if sym.abs_upper() > ErrorBound.pow2(-n + 4):
                raise ArithmeticError("period matrix is not symmetric")
            return Z
        w += max(err.bits() + n + 8 - w, 32)
    raise PrecisionRetry("period matrix precision did not converge")


def symmetry_residual(t: PPAVTriple, M, n: int) -> ApproxComplex:
    """z12 - z21 of the unsymmetrized period matrix at precision n."""
    fld = t.field
    es, vs = basis_from_transform(t, M)
    ids = [(j + 2) % 4 for j in t.cm_type.embedding_ids]
    Zm = _inverse_times(_embedded_columns(fld, vs, ids, n + 32), _embedded_columns(fld, es, ids, n + 32), n + 32)
    return sub(Zm[0][1], Zm[1][0], n)


# ---------------------------------------------------------------------------
# Cross-check constructor from a relative quadratic representation


def omega_k0(spec: CMFieldSpec) -> FieldElement:
    """omega with O_K0 = Z[omega]: (r + sqrt(delta0)) / 2, r = delta0 mod 2."""
    r = spec.delta0 % 2
    return (FieldElement.sqrt_delta0(spec) + r) / 2


def relative_module(spec: CMFieldSpec, z: FieldElement):
    """z O_K0 + O_K0 as a Z-module; raises ValueError if it is not an O_K-module."""
    fld = get_field(spec)
    w = omega_k0(spec)
    one = fld.one()
    mod = fld.module([z, z * w, one, w])
    for x in mod.basis():
        for b in fld.basis_elements:
            if not mod.contains(x * b):
                raise ValueError("z O_K0 + O_K0 is not an O_K-module")
    return mod


def xi_from_z(spec: CMFieldSpec, z: FieldElement) -> FieldElement:
    """(z - conj(z))^-1 sqrt(delta0)^-1."""
    return ((z - z.conj()) * FieldElement.sqrt_delta0(spec)).inverse()


def period_matrix_from_z(z: FieldElement, spec: CMFieldSpec, n: int) -> SiegelPoint:
    """Z_z = (phi1 + phi2)(z / sqrt(delta0) [[w^2, w], [w, 1]]).

    phi1 is the embedding with sqrt(delta0) > 0 and Im phi1(z) > 0, phi2 the
    one with sqrt(delta0) < 0 and Im phi2(z) < 0.
    """
    fld = get_field(spec)
    relative_module(spec, z)
    if not (z - z.conj()).is_totally_imaginary():
        raise ValueError("z must not lie in the real subfield")
    s1, s2 = (z - z.conj()).imaginary_signs()  # signs of Im z under ids 0 and 1
    # id 1 (and 3) have sqrt(delta0) > 0, ids 0 (and 2) have sqrt(delta0) < 0
    plus = 1 if s2 > 0 else 3
    minus = 2 if s1 > 0 else 0
    w = omega_k0(spec)
    q = z / FieldElement.sqrt_delta0(spec)
    entries = [q * w * w, q, q * w]
    prec = n + 16
    vals = []
    for x in entries:
        a = embed(fld, x, plus, prec)
        b = embed(fld, x, minus, prec)
        vals.append(round_to(add(a, b, prec), n))
    return SiegelPoint(*vals)


def det_imag(Z: SiegelPoint) -> float:
    y1, y2, y3 = Z.imag_parts()
    return float(y1 * y2 - y3 * y3)


def imag_z_measure(z: FieldElement) -> float:
    """I(z) = prod over embeddings up to conjugation of |Im phi(z)|."""
    half = (z - z.conj()) / 2
    return math.sqrt(abs(float(half.norm())))
