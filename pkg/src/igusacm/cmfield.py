"""Exact arithmetic in quartic CM fields K = Q(sqrt(-a + b sqrt(delta0))).

Elements are stored in the power basis 1, alpha, alpha^2, alpha^3 with
alpha^4 + 2a alpha^2 + (a^2 - b^2 delta0) = 0.  Fractional ideals are
stored as a Hermite normal form over a Z-basis of the maximal order
together with a denominator.

Embedding labels: phi1(alpha) = i sqrt(a + b sqrt(delta0)) and
phi2(alpha) = i sqrt(a - b sqrt(delta0)); index 0, 1, 2, 3 stands for
phi1, phi2, conj(phi1), conj(phi2).  Under phi1 the real quadratic
subfield sees sqrt(delta0) -> -sqrt(delta0), under phi2 it sees +sqrt(delta0).
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import sympy

from .approx import ApproxComplex, ErrorBound, check_precision, round_to
from .lattice import det, hnf_columns, kernel_mod_p, mat_inverse, short_vectors


class InvalidFieldError(ValueError):
    """The input does not describe a primitive quartic CM field."""


class ResourceError(RuntimeError):
    """A desk-scale budget (Minkowski bound, enumeration size) was exceeded."""


class InconclusiveError(RuntimeError):
    """A search could not decide its question within its budget."""


def is_square(n: int) -> bool:
    return n >= 0 and gmpy2.is_square(n)


def is_fundamental_discriminant(D: int) -> bool:
    if D == 1 or D == 0:
        return False
    if D % 4 == 1:
        return _squarefree(abs(D))
    if D % 4 == 0:
        m = D // 4
        if m % 4 in (2, 3):
            return _squarefree(abs(m))
    return False


def _squarefree(n: int) -> bool:
    return all(e == 1 for e in sympy.factorint(n).values())


# ---------------------------------------------------------------------------
# Field specification


@dataclass(frozen=True)
class CMFieldSpec:
    delta0: int
    a: int
    b: int

    @property
    def d(self) -> int:
        """Constant term a^2 - b^2 delta0 of the minimal polynomial."""
        return self.a * self.a - self.b * self.b * self.delta0

    def minpoly(self) -> tuple[int, int, int, int, int]:
        """Coefficients of x^4 + 2a x^2 + d, highest degree first."""
        return (1, 0, 2 * self.a, 0, self.d)

    def validate(self) -> None:
        D0, a, b = self.delta0, self.a, self.b
        if D0 <= 1 or not is_fundamental_discriminant(D0):
            raise InvalidFieldError(f"delta0={D0} is not a positive fundamental discriminant")
        if a <= 0 or b <= 0:
            raise InvalidFieldError("a and b must be positive integers")
        # -a + b sqrt(D0) < 0 and -a - b sqrt(D0) < 0
        if a * a <= b * b * D0:
            raise InvalidFieldError("not a CM field: -a + b*sqrt(delta0) is not totally negative")
        if is_square(self.d):
            raise InvalidFieldError("non-primitive: a^2 - b^2*delta0 is a square")

    def galois_type(self) -> str:
        return galois_type(self)


def galois_type(spec: CMFieldSpec) -> str:
    """'cyclic' when d * delta0 is a square, otherwise 'non_galois'."""
    if is_square(spec.d):
        raise InvalidFieldError("non-primitive: a^2 - b^2*delta0 is a square")
    return "cyclic" if is_square(spec.d * spec.delta0) else "non_galois"


# ---------------------------------------------------------------------------
# Field elements


class FieldElement:
    """Element c0 + c1 alpha + c2 alpha^2 + c3 alpha^3 of K."""

    __slots__ = ("spec", "c")

    def __init__(self, spec: CMFieldSpec, coords):
        self.spec = spec
        self.c = tuple(Fraction(x) for x in coords)

    @staticmethod
    def from_int(spec, n) -> FieldElement:
        return FieldElement(spec, (n, 0, 0, 0))

    @staticmethod
    def alpha(spec) -> FieldElement:
        return FieldElement(spec, (0, 1, 0, 0))

    @staticmethod
    def sqrt_delta0(spec) -> FieldElement:
        # delta = (alpha^2 + a) / b
        return FieldElement(spec, (Fraction(spec.a, spec.b), 0, Fraction(1, spec.b), 0))

    def _coerce(self, other) -> FieldElement:
        if isinstance(other, FieldElement):
            return other
        return FieldElement(self.spec, (other, 0, 0, 0))

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElement(self.spec, (x + y for x, y in zip(self.c, o.c)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return FieldElement(self.spec, (x - y for x, y in zip(self.c, o.c)))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return FieldElement(self.spec, (-x for x in self.c))

    def __mul__(self, other):
        if not isinstance(other, FieldElement):
            q = Fraction(other)
            return FieldElement(self.spec, (x * q for x in self.c))
        a0, a1, a2, a3 = self.c
        b0, b1, b2, b3 = other.c
        p = [a0 * b0, a0 * b1 + a1 * b0, a0 * b2 + a1 * b1 + a2 * b0,
             a0 * b3 + a1 * b2 + a2 * b1 + a3 * b0, a1 * b3 + a2 * b2 + a3 * b1,
             a2 * b3 + a3 * b2, a3 * b3]
        A, d = self.spec.a, self.spec.d
        # x^4 = -2a x^2 - d, x^5 = -2a x^3 - d x, x^6 = (4a^2 - d) x^2 + 2ad
        c0 = p[0] - d * p[4] + 2 * A * d * p[6]
        c1 = p[1] - d * p[5]
        c2 = p[2] - 2 * A * p[4] + (4 * A * A - d) * p[6]
        c3 = p[3] - 2 * A * p[5]
        return FieldElement(self.spec, (c0, c1, c2, c3))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, FieldElement):
            q = Fraction(other)
            return FieldElement(self.spec, (x / q for x in self.c))
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = FieldElement.from_int(self.spec, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, FieldElement):
            other = self._coerce(other)
        return self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __repr__(self):
        return f"FieldElement({', '.join(str(x) for x in self.c)})"

    def is_zero(self) -> bool:
        return not any(self.c)

    def conj(self) -> FieldElement:
        """Complex conjugation alpha -> -alpha."""
        c0, c1, c2, c3 = self.c
        return FieldElement(self.spec, (c0, -c1, c2, -c3))

    def trace(self) -> Fraction:
        return 4 * self.c[0] - 4 * self.spec.a * self.c[2]

    def relative_norm(self) -> FieldElement:
        """x * conj(x), an element of the real subfield."""
        return self * self.conj()

    def norm(self) -> Fraction:
        n = self.relative_norm()
        u, v = n.c[0], n.c[2]
        # N_{K0/Q}(u + v alpha^2) with alpha^2 a root of y^2 + 2a y + d
        return u * u - 2 * self.spec.a * u * v + self.spec.d * v * v

    def inverse(self) -> FieldElement:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        xb = self.conj()
        n = self * xb  # u + v alpha^2 in K0
        u, v = n.c[0], n.c[2]
        # (u + v y)^(-1) = (u + v y') / N with y' = -2a - y
        N = u * u - 2 * self.spec.a * u * v + self.spec.d * v * v
        n_conj = FieldElement(self.spec, ((u - 2 * self.spec.a * v) / N, 0, -v / N, 0))
        return xb * n_conj

    def mult_matrix(self) -> list[list[Fraction]]:
        """Matrix of multiplication by self in the power basis (columns = images)."""
        cols = [(self * FieldElement(self.spec, [int(i == j) for j in range(4)])).c for i in range(4)]
        return [[cols[j][i] for j in range(4)] for i in range(4)]

    def charpoly(self) -> list[Fraction]:
        """Characteristic polynomial over Q, highest degree first."""
        M = sympy.Matrix(self.mult_matrix())
        x = sympy.Symbol("x")
        poly = M.charpoly(x)
        return [Fraction(int(sympy.fraction(c)[0]), int(sympy.fraction(c)[1])) for c in poly.all_coeffs()]

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.charpoly())

    def in_real_subfield(self) -> bool:
        return self.c[1] == 0 and self.c[3] == 0

    def real_parts(self) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
        """For x in K0 return (u1, v1), (u2, v2) with phi_j(x) = u_j + v_j sqrt(delta0)."""
        if not self.in_real_subfield():
            raise ValueError("element is not in the real subfield")
        u = self.c[0] - self.spec.a * self.c[2]
        v = self.spec.b * self.c[2]
        return (u, -v), (u, v)

    def real_signs(self) -> tuple[int, int]:
        """Exact signs of the two real embeddings of an element of K0."""
        return tuple(_sign_quadratic(u, v, self.spec.delta0) for u, v in self.real_parts())

    def is_totally_imaginary(self) -> bool:
        return self.c[0] == 0 and self.c[2] == 0 and not self.is_zero()

    def imaginary_signs(self) -> tuple[int, int]:
        """Signs of Im phi1(x), Im phi2(x) for a totally imaginary x."""
        if not self.is_totally_imaginary():
            raise ValueError("element is not totally imaginary")
        # x = alpha (c1 + c3 alpha^2); Im phi_j(x) = rho_j * phi_j(c1 + c3 alpha^2)
        inner = FieldElement(self.spec, (self.c[1], 0, self.c[3], 0))
        return inner.real_signs()

    def bit_size(self) -> int:
        return max(max(abs(c.numerator).bit_length(), c.denominator.bit_length()) for c in self.c)


def _sign_quadratic(u: Fraction, v: Fraction, D: int) -> int:
    """Sign of u + v sqrt(D) for rational u, v."""
    if v == 0:
        return (u > 0) - (u < 0)
    if u == 0:
        return (v > 0) - (v < 0)
    if (u > 0) == (v > 0):
        return 1 if u > 0 else -1
    # opposite signs: compare u^2 with v^2 D
    if u * u > v * v * D:
        return 1 if u > 0 else -1
    if u * u < v * v * D:
        return 1 if v > 0 else -1
    return 0


# ---------------------------------------------------------------------------
# Orders and ideals


@dataclass
class IntegralBasis:
    """Z-basis of the maximal order; row k holds power-basis coordinates of w_k."""

    basis: list[list[Fraction]]
    discriminant: int


class CMField:
    """Container for the derived data of one field; computed lazily and cached."""

    def __init__(self, spec: CMFieldSpec):
        spec.validate()
        self.spec = spec
        self._cache: dict = {}

    # -- elements ---------------------------------------------------------
    def element(self, coords) -> FieldElement:
        return FieldElement(self.spec, coords)

    def one(self) -> FieldElement:
        return FieldElement.from_int(self.spec, 1)

    # -- maximal order ----------------------------------------------------
    @property
    def integral_basis(self) -> IntegralBasis:
        if "ob" not in self._cache:
            self._cache["ob"] = _maximal_order(self.spec)
        return self._cache["ob"]

    @property
    def basis_elements(self) -> list[FieldElement]:
        if "ob_el" not in self._cache:
            self._cache["ob_el"] = [FieldElement(self.spec, r) for r in self.integral_basis.basis]
        return self._cache["ob_el"]

    @property
    def _to_order(self):
        if "ob_inv" not in self._cache:
            self._cache["ob_inv"] = mat_inverse(self.integral_basis.basis)
        return self._cache["ob_inv"]

    @property
    def disc(self) -> int:
        return self.integral_basis.discriminant

    @property
    def delta1(self) -> int:
        return self.disc // (self.spec.delta0 ** 2)

    def order_coords(self, x: FieldElement) -> list[Fraction]:
        """Coordinates of x with respect to the integral basis."""
        inv = self._to_order
        return [sum(x.c[i] * inv[i][j] for i in range(4)) for j in range(4)]

    def from_order_coords(self, v) -> FieldElement:
        B = self.integral_basis.basis
        return FieldElement(self.spec, [sum(Fraction(v[k]) * B[k][i] for k in range(4)) for i in range(4)])

    def is_in_order(self, x: FieldElement) -> bool:
        return all(c.denominator == 1 for c in self.order_coords(x))

    # -- ideals -----------------------------------------------------------
    def ideal(self, generators) -> IdealHNF:
        """Fractional ideal generated (as O_K-module) by the given elements."""
        cols = []
        for g in generators:
            g = g if isinstance(g, FieldElement) else FieldElement.from_int(self.spec, g)
            for w in self.basis_elements:
                cols.append(self.order_coords(g * w))
        return IdealHNF.from_rational_columns(self, cols)

    def module(self, elements) -> IdealHNF:
        """Z-module spanned by the given elements (must have rank 4)."""
        return IdealHNF.from_rational_columns(self, [self.order_coords(g) for g in elements])

    def unit_ideal(self) -> IdealHNF:
        return IdealHNF(self, tuple(tuple(int(i == j) for j in range(4)) for i in range(4)), 1)

    def codifferent(self) -> IdealHNF:
        if "codiff" not in self._cache:
            self._cache["codiff"] = self.unit_ideal().dual()
        return self._cache["codiff"]

    def different(self) -> IdealHNF:
        if "diff" not in self._cache:
            cd = self.codifferent()
            self._cache["diff"] = (cd * cd).dual()
        return self._cache["diff"]

    # -- trace form -------------------------------------------------------
    def t2(self, x: FieldElement, y: FieldElement) -> Fraction:
        """Hermitian trace form Tr(x conj(y)) (real for the pairs we need)."""
        return (x * y.conj()).trace()

    # -- units ------------------------------------------------------------
    def fundamental_unit(self) -> UnitData:
        if "units" not in self._cache:
            self._cache["units"] = _unit_data(self)
        return self._cache["units"]

    def roots_of_unity(self) -> list[FieldElement]:
        return self.fundamental_unit().roots_of_unity

    # -- class group ------------------------------------------------------
    def minkowski_bound(self) -> float:
        return 3.0 / (2.0 * math.pi ** 2) * math.sqrt(self.disc)

    def class_group(self, max_bound: int = 5000) -> ClassGroupData:
        if "cl" not in self._cache:
            self._cache["cl"] = _class_group(self, max_bound)
        return self._cache["cl"]

    def is_principal(self, ideal: IdealHNF, max_vectors: int = 200000) -> FieldElement | None:
        return is_principal(ideal, max_vectors)

    def prime_ideals_above(self, p: int) -> list[IdealHNF]:
        key = ("primes", p)
        if key not in self._cache:
            self._cache[key] = _primes_above(self, p)
        return self._cache[key]

    # -- numerics ---------------------------------------------------------
    def embed(self, x: FieldElement, j: int, n: int) -> ApproxComplex:
        return embed(self, x, j, n)


@functools.lru_cache(maxsize=64)
def get_field(spec: CMFieldSpec) -> CMField:
    return CMField(spec)


def _as_field(obj) -> CMField:
    if isinstance(obj, CMField):
        return obj
    return get_field(obj)


class IdealHNF:
    """Fractional ideal (1/denom) * H Z^4 in coordinates of the integral basis.

    ``hnf`` is stored as a tuple of rows of an upper-triangular matrix whose
    columns generate the ideal.
    """

    __slots__ = ("field", "hnf", "denom")

    def __init__(self, fld: CMField, hnf, denom: int):
        self.field = fld
        self.hnf = tuple(tuple(int(x) for x in row) for row in hnf)
        self.denom = int(denom)

    @staticmethod
    def from_rational_columns(fld: CMField, cols) -> IdealHNF:
        den = 1
        for c in cols:
            for x in c:
                den = den * Fraction(x).denominator // math.gcd(den, Fraction(x).denominator)
        icols = [[int(Fraction(x) * den) for x in c] for c in cols]
        H = hnf_columns(icols, 4)
        g = den
        for row in H:
            for x in row:
                g = math.gcd(g, x)
        H = [[x // g for x in row] for row in H]
        return IdealHNF(fld, H, den // g)

    # -- basics -------------------------------------------------------------
    def __eq__(self, other):
        return isinstance(other, IdealHNF) and self.hnf == other.hnf and self.denom == other.denom

    def __hash__(self):
        return hash((self.hnf, self.denom))

    def __repr__(self):
        return f"IdealHNF(norm={self.norm()}, hnf={self.hnf}, denom={self.denom})"

    def columns(self) -> list[list[Fraction]]:
        return [[Fraction(self.hnf[i][j], self.denom) for i in range(4)] for j in range(4)]

    def basis(self) -> list[FieldElement]:
        return [self.field.from_order_coords(c) for c in self.columns()]

    def is_integral(self) -> bool:
        return self.denom == 1

    def norm(self) -> Fraction:
        d = 1
        for i in range(4):
            d *= self.hnf[i][i]
        return Fraction(d, self.denom ** 4)

    def contains(self, x: FieldElement) -> bool:
        v = [c * self.denom for c in self.field.order_coords(x)]
        # back substitution in the upper triangular system H y = v
        for i in range(3, -1, -1):
            s = v[i] - sum(self.hnf[i][j] * y_j for j, y_j in _later(i, v))
            if s.denominator != 1 or s.numerator % self.hnf[i][i]:
                return False
            v[i] = Fraction(s.numerator // self.hnf[i][i])
        return True

    def __mul__(self, other) -> IdealHNF:
        if isinstance(other, FieldElement):
            return self.field.module([other * b for b in self.basis()])
        if isinstance(other, (int, Fraction)):
            return self.field.module([b * other for b in self.basis()])
        A, B = self.basis(), other.basis()
        return self.field.module([x * y for x in A for y in B])

    __rmul__ = __mul__

    def conj(self) -> IdealHNF:
        return self.field.module([b.conj() for b in self.basis()])

    def dual(self) -> IdealHNF:
        """Trace dual {x : Tr(x I) in Z}."""
        B = self.basis()
        T = [[(x * y).trace() for y in B] for x in B]
        Ti = mat_inverse(T)
        dual = []
        for i in range(4):
            e = FieldElement(self.field.spec, (0, 0, 0, 0))
            for j in range(4):
                e = e + B[j] * Ti[j][i]
            dual.append(e)
        return self.field.module(dual)

    def inverse(self) -> IdealHNF:
        if self.norm() == 0:
            raise ValueError("zero ideal has no inverse")
        return (self * self.field.codifferent()).dual()

    def __truediv__(self, other: IdealHNF) -> IdealHNF:
        return self * other.inverse()

    def scaled_integral(self) -> tuple[IdealHNF, int]:
        """(denom * I, denom) with denom * I integral."""
        return IdealHNF(self.field, self.hnf, 1), self.denom


def _later(i, v):
    # helper for back substitution: entries j > i already solved and stored in v
    return [(j, v[j]) for j in range(i + 1, 4)]


def ideal_mul(x: IdealHNF, y: IdealHNF) -> IdealHNF:
    return x * y


def ideal_inverse(x: IdealHNF) -> IdealHNF:
    return x.inverse()


def ideal_norm(x: IdealHNF) -> Fraction:
    return x.norm()


def conj_ideal(x: IdealHNF) -> IdealHNF:
    return x.conj()


def maximal_order(spec: CMFieldSpec) -> IntegralBasis:
    return _as_field(spec).integral_basis


def different(spec) -> IdealHNF:
    return _as_field(spec).different()


# ---------------------------------------------------------------------------
# Maximal order by successive p-enlargement


def _order_mult_table(spec, W):
    """Structure constants c[i][j] (as integer vectors) of the order with basis rows W."""
    els = [FieldElement(spec, r) for r in W]
    inv = mat_inverse(W)
    table = []
    for i in range(4):
        row = []
        for j in range(4):
            prod = els[i] * els[j]
            coords = [sum(prod.c[k] * inv[k][m] for k in range(4)) for m in range(4)]
            if any(c.denominator != 1 for c in coords):
                raise ArithmeticError("basis does not span a ring")
            row.append([int(c) for c in coords])
        table.append(row)
    return table


def _mul_mod(table, x, y, p):
    out = [0, 0, 0, 0]
    for i in range(4):
        if x[i] == 0:
            continue
        for j in range(4):
            if y[j] == 0:
                continue
            c = x[i] * y[j]
            t = table[i][j]
            for k in range(4):
                out[k] += c * t[k]
    return [v % p for v in out]


def _pow_mod(table, x, e, p):
    result = [1, 0, 0, 0]  # the first basis element is 1 for every order we build
    base = [v % p for v in x]
    while e:
        if e & 1:
            result = _mul_mod(table, result, base, p)
        base = _mul_mod(table, base, base, p)
        e >>= 1
    return result


def _normalize_order_basis(W):
    """Canonical basis: HNF of the power-basis coordinates, w_0 = 1."""
    den = 1
    for row in W:
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
    cols = [[int(x * den) for x in row] for row in W]
    H = hnf_columns(cols, 4)
    return [[Fraction(H[i][k], den) for i in range(4)] for k in range(4)]


def _maximal_order(spec: CMFieldSpec) -> IntegralBasis:
    disc_power = 256 * spec.d * spec.b ** 4 * spec.delta0 ** 2
    W = [[Fraction(int(i == j)) for j in range(4)] for i in range(4)]
    for p, e in sorted(sympy.factorint(abs(disc_power)).items()):
        if e < 2:
            continue
        while True:
            W_new = _enlarge_at(spec, W, p)
            if W_new is None:
                break
            W = W_new
    W = _normalize_order_basis(W)
    index = 1 / abs(det(W))
    disc = Fraction(disc_power) / (index * index)
    if disc.denominator != 1:
        raise ArithmeticError("inconsistent discriminant")
    return IntegralBasis(W, int(disc))


def _enlarge_at(spec, W, p):
    """One Round-2 step at p; returns a strictly larger order or None if p-maximal."""
    W = _normalize_order_basis(W)
    table = _order_mult_table(spec, W)
    q = p
    while q < 4:
        q *= p
    # radical of O/pO is the kernel of x -> x^q
    frob = [_pow_mod(table, [int(i == j) for j in range(4)], q, p) for i in range(4)]
    rows = [[frob[j][i] for j in range(4)] for i in range(4)]
    ker = kernel_mod_p(rows, 4, p)
    gens = [list(v) for v in ker] + [[p * int(i == j) for j in range(4)] for i in range(4)]
    Hrad = hnf_columns(gens, 4)
    rad_basis = [[Hrad[i][j] for i in range(4)] for j in range(4)]  # order coords of radical basis
    Rinv = mat_inverse([[Fraction(rad_basis[j][i]) for j in range(4)] for i in range(4)])
    # U/pO = {x : x * rad subset p * rad}
    eqs = []
    for beta in rad_basis:
        # coordinates of w_i * beta in the radical basis, as linear forms in x
        images = []
        for i in range(4):
            prod = _mul_exact(table, [int(k == i) for k in range(4)], beta)
            rc = [sum(Rinv[r][c] * prod[c] for c in range(4)) for r in range(4)]
            images.append([int(v) for v in rc])
        for r in range(4):
            eqs.append([images[i][r] for i in range(4)])
    U = kernel_mod_p(eqs, 4, p)
    if not U:
        return None
    gens = [list(v) for v in U] + [[p * int(i == j) for j in range(4)] for i in range(4)]
    Hu = hnf_columns(gens, 4)
    new_rows = []
    for j in range(4):
        coords = [Fraction(Hu[i][j], p) for i in range(4)]
        new_rows.append([sum(coords[k] * W[k][m] for k in range(4)) for m in range(4)])
    if abs(det(new_rows)) == abs(det(W)):
        return None
    return new_rows


def _mul_exact(table, x, y):
    out = [0, 0, 0, 0]
    for i in range(4):
        for j in range(4):
            c = x[i] * y[j]
            if c:
                for k in range(4):
                    out[k] += c * table[i][j][k]
    return out


# ---------------------------------------------------------------------------
# Prime ideals


def _primes_above(fld: CMField, p: int) -> list[IdealHNF]:
    theta = _good_generator(fld, p)
    if theta is not None:
        f = theta.charpoly()
        x = sympy.Symbol("x")
        poly = sympy.Poly([int(c) for c in f], x, modulus=p)
        out = []
        for g, _e in poly.factor_list()[1]:
            coeffs = [int(c) for c in g.all_coeffs()]
            val = FieldElement.from_int(fld.spec, 0)
            for c in coeffs:
                val = val * theta + c
            out.append(fld.ideal([FieldElement.from_int(fld.spec, p), val]))
        return out
    if p > 3:
        raise ArithmeticError(f"no p-regular generator found for p={p}")
    return _primes_above_bruteforce(fld, p)


def _good_generator(fld: CMField, p: int):
    """An integral theta generating K with p not dividing [O_K : Z[theta]]."""
    W = fld.basis_elements
    cands = [FieldElement.alpha(fld.spec)] + W[1:]
    for coeffs in itertools.product(range(-2, 3), repeat=3):
        cands.append(W[1] * coeffs[0] + W[2] * coeffs[1] + W[3] * coeffs[2])
    for th in cands:
        powers = [FieldElement.from_int(fld.spec, 1)]
        for _ in range(3):
            powers.append(powers[-1] * th)
        M = [fld.order_coords(x) for x in powers]
        idx = det(M)
        if idx != 0 and int(idx) % p != 0:
            return th
    return None


def _primes_above_bruteforce(fld: CMField, p: int) -> list[IdealHNF]:
    found = []
    for coords in itertools.product(range(p), repeat=4):
        x = fld.from_order_coords(coords)
        I = fld.ideal([FieldElement.from_int(fld.spec, p), x])
        if I.norm() == 1 or I in found:
            continue
        if _is_prime_quotient(fld, I, p):
            found.append(I)
    return found


def _is_prime_quotient(fld, I, p) -> bool:
    H = I.hnf
    reps = []
    for ks in itertools.product(*[range(H[i][i]) for i in range(4)]):
        reps.append(fld.from_order_coords(ks))
    nonzero = [r for r in reps if not I.contains(r)]
    for x in nonzero:
        for y in nonzero:
            if I.contains(x * y):
                return False
    return True


# ---------------------------------------------------------------------------
# Units of the real subfield and roots of unity


@dataclass
class UnitData:
    epsilon0: FieldElement
    norm_sign: int
    mu_order: int
    roots_of_unity: list[FieldElement] = field(default_factory=list)
    delta0: int = 0

    def real_value(self) -> float:
        """Value of the fundamental unit under the embedding with sqrt(delta0) > 0."""
        u, v = self.epsilon0.real_parts()[1]
        return float(u) + float(v) * math.sqrt(self.delta0)


def fundamental_unit_k0(delta0: int) -> tuple[Fraction, Fraction, int]:
    """Fundamental unit of Q(sqrt(delta0)) as (u, v, norm) with eps = u + v sqrt(delta0) > 1.

    Expands omega = (r + sqrt(delta0)) / 2 as a continued fraction and stops at
    the first convergent h/k for which h - k omega is a unit.
    """
    D = delta0
    r = D % 2
    s = math.isqrt(D)
    P, Q = r, 2
    h_prev, h = 0, 1
    k_prev, k = 1, 0
    while True:
        a = (P + s) // Q
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        num = (2 * h - r * k) ** 2 - D * k * k
        if abs(num) == 4:
            return Fraction(2 * h - k * r, 2), Fraction(k, 2), num // 4
        P = a * Q - P
        Q = (D - P * P) // Q


def _unit_data(fld: CMField) -> UnitData:
    spec = fld.spec
    u, v, nsign = fundamental_unit_k0(spec.delta0)
    delta = FieldElement.sqrt_delta0(spec)
    eps = delta * v + u
    roots = _roots_of_unity(fld)
    return UnitData(eps, nsign, len(roots), roots, spec.delta0)


def _roots_of_unity(fld: CMField) -> list[FieldElement]:
    """Elements of O_K with T2 = 4; these are exactly the roots of unity."""
    W = fld.basis_elements
    G = [[fld.t2(x, y) for y in W] for x in W]
    out = []
    for vec, q in short_vectors(G, 4):
        if q == 4:
            x = FieldElement.from_int(fld.spec, 0)
            for c, w in zip(vec, W):
                x = x + w * c
            out.extend([x, -x])
    return out


def fundamental_unit(spec) -> UnitData:
    return _as_field(spec).fundamental_unit()


# ---------------------------------------------------------------------------
# Principal ideal test


def t2_bound_for_generator(fld: CMField, norm: Fraction) -> Fraction:
    """Rational upper bound for 2 sqrt(N) (eps + 1/eps)."""
    eps = fld.fundamental_unit().real_value()
    val = 2.0 * math.sqrt(float(norm)) * (eps + 1.0 / eps)
    return Fraction(val * (1 + 1e-9)).limit_denominator(10 ** 12) + Fraction(1, 10 ** 6)


def is_principal(ideal: IdealHNF, max_vectors: int = 200000) -> FieldElement | None:
    """A generator of the ideal, or None when no generator exists.

    Any generator can be multiplied by a power of the fundamental unit so that
    its T2-norm is at most 2 sqrt(N)(eps + 1/eps); all lattice vectors below
    that bound are enumerated and tested for norm N.  Finding none certifies
    that the ideal is not principal.
    """
    fld = ideal.field
    J, den = ideal.scaled_integral()
    N = J.norm()
    B = J.basis()
    G = [[fld.t2(x, y) for y in B] for x in B]
    bound = t2_bound_for_generator(fld, N)
    try:
        vecs = short_vectors(G, bound, limit=max_vectors)
    except OverflowError as exc:
        raise InconclusiveError("principal ideal search exceeded its budget") from exc
    vecs.sort(key=lambda t: t[1])
    for vec, _q in vecs:
        x = FieldElement.from_int(fld.spec, 0)
        for c, w in zip(vec, B):
            if c:
                x = x + w * c
        if x.norm() == N:
            return x / den
    return None


# ---------------------------------------------------------------------------
# Class group


@dataclass
class ClassGroupData:
    representatives: list[IdealHNF]
    h: int
    h0: int
    h1: int
    group_structure: list[int]
    minkowski_bound: float


def _ideals_up_to(fld: CMField, bound: int) -> list[IdealHNF]:
    primes = []
    for p in sympy.primerange(2, bound + 1):
        for P in fld.prime_ideals_above(int(p)):
            if P.norm() <= bound:
                primes.append(P)
    primes.sort(key=lambda P: (P.norm(), P.hnf))
    out = [(fld.unit_ideal(), Fraction(1))]

    def rec(start, ideal, norm):
        for i in range(start, len(primes)):
            P = primes[i]
            nn = norm * P.norm()
            if nn > bound:
                continue
            new = ideal * P
            out.append((new, nn))
            rec(i, new, nn)

    rec(0, fld.unit_ideal(), Fraction(1))
    out.sort(key=lambda t: (t[1], t[0].hnf))
    uniq = []
    seen = set()
    for I, _n in out:
        if I not in seen:
            seen.add(I)
            uniq.append(I)
    return uniq


def _class_group(fld: CMField, max_bound: int) -> ClassGroupData:
    M = fld.minkowski_bound()
    bound = int(math.floor(M + 1e-9))
    if bound > max_bound:
        raise ResourceError(f"Minkowski bound {M:.0f} exceeds the desk-scale budget {max_bound}")
    reps: list[IdealHNF] = []
    inverses: list[IdealHNF] = []
    for I in _ideals_up_to(fld, max(bound, 1)):
        if any(is_principal(I * Ri) is not None for Ri in inverses):
            continue
        reps.append(I)
        inverses.append(I.inverse())
    h = len(reps)
    h0 = class_number_k0(fld.spec.delta0)
    if h % h0:
        raise ArithmeticError(f"h0={h0} does not divide h={h}")
    structure = _group_structure(reps, inverses)
    return ClassGroupData(reps, h, h0, h // h0, structure, M)


def _class_index(reps_inv, I) -> int:
    for k, Ri in enumerate(reps_inv):
        if is_principal(I * Ri) is not None:
            return k
    raise ArithmeticError("ideal not in any known class")


def _group_structure(reps, inverses) -> list[int]:
    h = len(reps)
    if h == 1:
        return []
    table = [[_class_index(inverses, reps[i] * reps[j]) for j in range(h)] for i in range(h)]
    ident = _class_index(inverses, reps[0].field.unit_ideal())

    def power(g, e):
        r = ident
        for _ in range(e):
            r = table[r][g]
        return r

    factors: list[int] = []
    for p, _ in sympy.factorint(h).items():
        counts = []
        k = 0
        while True:
            pk = p ** k
            cnt = sum(1 for g in range(h) if power(g, pk) == ident)
            counts.append(cnt)
            if k > 0 and counts[-1] == counts[-2]:
                break
            k += 1
        # number of cyclic factors of order >= p^k is log_p(N_k / N_{k-1})
        ranks = [round(math.log(counts[i] / counts[i - 1], p)) for i in range(1, len(counts))]
        exps = []
        for i in range(len(ranks)):
            nxt = ranks[i + 1] if i + 1 < len(ranks) else 0
            exps += [i + 1] * (ranks[i] - nxt)
        factors.append((p, sorted(exps, reverse=True)))
    # combine p-parts into invariant factors d1 | d2 | ...
    length = max(len(e) for _, e in factors)
    inv = [1] * length
    for p, exps in factors:
        for i, e in enumerate(exps):
            inv[i] *= p ** e
    return sorted(inv)


def class_group(spec, max_bound: int = 5000) -> ClassGroupData:
    return _as_field(spec).class_group(max_bound)


# ---------------------------------------------------------------------------
# Class number of the real quadratic subfield from cycles of reduced forms


def _is_below_sqrt(x: int, D: int) -> bool:
    """x < sqrt(D)."""
    return x < 0 or x * x < D


def reduced_forms(D: int) -> list[tuple[int, int, int]]:
    """Reduced indefinite forms (A, B, C) of discriminant D > 0.

    Reduced means 0 < B < sqrt(D) and sqrt(D) - B < 2|A| < sqrt(D) + B.
    """
    out = []
    for B in range(1, math.isqrt(D) + 1):
        if (B - D) % 2 or B * B >= D:
            continue
        m = (B * B - D) // 4  # A * C < 0
        for A in range(1, -m + 1):
            if m % A:
                continue
            low = 2 * A + B  # need sqrt(D) < 2A + B
            high = 2 * A - B  # need 2A - B < sqrt(D)
            if low * low > D and (high < 0 or high * high < D):
                out.extend([(A, B, m // A), (-A, B, -m // A)])
    return out


def _rho(form, D):
    """Right neighbour in the cycle of reduced forms."""
    _A, B, C = form
    c2 = 2 * abs(C)
    # B' = -B mod 2|C| chosen with sqrt(D) - 2|C| < B' < sqrt(D)
    Bp = (-B) % c2
    while (Bp + c2) ** 2 < D or Bp + c2 <= 0:
        Bp += c2
    while Bp > 0 and Bp * Bp > D:
        Bp -= c2
    return (C, Bp, (Bp * Bp - D) // (4 * C))


def narrow_class_number(D: int) -> int:
    forms = set(reduced_forms(D))
    seen = set()
    cycles = 0
    for f in sorted(forms):
        if f in seen:
            continue
        cycles += 1
        g = f
        while g not in seen:
            seen.add(g)
            g = _rho(g, D)
            if g not in forms:
                raise ArithmeticError("reduction left the set of reduced forms")
    return cycles


def class_number_k0(delta0: int) -> int:
    hplus = narrow_class_number(delta0)
    _, _, nsign = fundamental_unit_k0(delta0)
    return hplus if nsign == -1 else hplus // 2


# ---------------------------------------------------------------------------
# Complex embeddings


def _sqrt_parts(spec: CMFieldSpec, m: int, k: int) -> tuple[int, int]:
    """Fixed-point rho_k^2 and rho_k at scale 2^m (k = 0 for phi1, 1 for phi2).

    rho_k^2 is off by at most b units and rho_k by at most b 2^m / rho_k + 1.
    """
    sd = int(gmpy2.isqrt(spec.delta0 << (2 * m)))
    sign = 1 if k == 0 else -1
    r2 = (spec.a << m) + sign * spec.b * sd
    rho = int(gmpy2.isqrt(r2 << m))
    return r2, rho


def embed(fld, x: FieldElement, j: int, n: int) -> ApproxComplex:
    """phi_j(x) to absolute precision n (error <= 2^-n), j in {0, 1, 2, 3}."""
    fld = _as_field(fld)
    spec = fld.spec
    check_precision(n)
    den = 1
    for c in x.c:
        den = den * c.denominator // math.gcd(den, c.denominator)
    n0, n1, n2, n3 = (int(c * den) for c in x.c)
    k = j % 2
    m = n + 8 + max(abs(n0), abs(n1), abs(n2), abs(n3), 1).bit_length() + 2 * spec.a.bit_length()
    while True:
        r2, rho = _sqrt_parts(spec, m, k)
        one = 1 << m
        re = n0 * one - n2 * r2
        inner = n1 * one - n3 * r2
        im = (rho * inner) >> m
        # errors in units of 2^-m, before dividing by den
        e_in = abs(n3) * spec.b
        e_rho = (spec.b << m) // max(rho, 1) + 1
        err_re = abs(n2) * spec.b
        err_im = (e_rho * (abs(inner) + e_in) + rho * e_in) // one + 2
        total = ErrorBound.make(err_re + err_im + 1, -m) * Fraction(1, den)
        if total <= ErrorBound.pow2(-n - 2):
            break
        m += max(total.bits() + n + 4, 8)
    if j >= 2:
        im = -im
    q = ApproxComplex(gmpy2.mpz(_div_round_int(re, den)), gmpy2.mpz(_div_round_int(im, den)), m,
                      total + ErrorBound.pow2(-m))
    out = round_to(q, n)
    return out.with_error(ErrorBound.pow2(-n)) if out.err <= ErrorBound.pow2(-n) else out


def _div_round_int(a: int, b: int) -> int:
    q, r = divmod(a, b)
    return q + 1 if 2 * r >= b else q


def embeddings(spec, n: int) -> list[ApproxComplex]:
    """The four roots phi_j(alpha) of the minimal polynomial, j = 0..3."""
    fld = _as_field(spec)
    al = FieldElement.alpha(fld.spec)
    return [embed(fld, al, j, n) for j in range(4)]
