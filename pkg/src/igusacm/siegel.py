"""Reduction of points of the Siegel upper half space of degree 2.

Points are reduced into the fundamental domain F2 (or the larger set B used
by theta evaluation).  The search runs in MPC floating point with guard bits
while the transformation matrix is tracked exactly; the final point is then
recomputed from the input with certified arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2

from .approx import ApproxComplex, ErrorBound, add, div, mul, mul_int, round_to, sub, to_mpc
from .period import SiegelPoint

Sp4Matrix = tuple[tuple[int, int, int, int], ...]

OMEGA4 = ((0, 0, 1, 0), (0, 0, 0, 1), (-1, 0, 0, 0), (0, -1, 0, 0))
IDENTITY4 = ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1))

GUARD_BITS = 64
MAX_ITERATIONS = 10_000


class ReductionPrecisionError(ArithmeticError):
    """Working precision ran out before the reduction could be certified."""


class InconclusiveComparison(ArithmeticError):
    """An equality test |det N*(Z)| = 1 cannot be decided at this precision."""


# ---------------------------------------------------------------------------
# Integer matrix helpers


def _mat(rows) -> Sp4Matrix:
    return tuple(tuple(int(x) for x in r) for r in rows)


def mat_mul(A, B) -> Sp4Matrix:
    n = len(A)
    m = len(B[0])
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(m)) for i in range(n))


def transpose(A) -> Sp4Matrix:
    return tuple(tuple(r) for r in zip(*A))


def is_symplectic(M) -> bool:
    """M^t Omega M == Omega exactly."""
    return mat_mul(mat_mul(transpose(M), OMEGA4), M) == OMEGA4


def blocks(M):
    A = ((M[0][0], M[0][1]), (M[1][0], M[1][1]))
    B = ((M[0][2], M[0][3]), (M[1][2], M[1][3]))
    C = ((M[2][0], M[2][1]), (M[3][0], M[3][1]))
    D = ((M[2][2], M[2][3]), (M[3][2], M[3][3]))
    return A, B, C, D


def from_blocks(A, B, C, D) -> Sp4Matrix:
    return _mat([
        [A[0][0], A[0][1], B[0][0], B[0][1]],
        [A[1][0], A[1][1], B[1][0], B[1][1]],
        [C[0][0], C[0][1], D[0][0], D[0][1]],
        [C[1][0], C[1][1], D[1][0], D[1][1]],
    ])


def gl2_embedding(U) -> Sp4Matrix:
    """[[U, 0], [0, U^-t]], acting by Z -> U Z U^t."""
    (a, b), (c, d) = U
    dt = a * d - b * c
    if dt not in (1, -1):
        raise ValueError("U is not in GL2(Z)")
    # U^-t = (1/dt) [[d, -c], [-b, a]]
    Uit = ((d * dt, -c * dt), (-b * dt, a * dt))
    zero = ((0, 0), (0, 0))
    return from_blocks(U, zero, zero, Uit)


def translation(B) -> Sp4Matrix:
    """[[1, B], [0, 1]] for symmetric integral B, acting by Z -> Z + B."""
    one = ((1, 0), (0, 1))
    zero = ((0, 0), (0, 0))
    return from_blocks(one, B, zero, one)


def sp4_inverse(M) -> Sp4Matrix:
    """Inverse of a symplectic matrix: Omega^-1 M^t Omega."""
    return mat_mul(mat_mul(transpose(OMEGA4), transpose(M)), OMEGA4)


# ---------------------------------------------------------------------------
# The 38 matrices


def gottschling_set() -> list[Sp4Matrix]:
    """The 38 symplectic matrices whose action decides membership in F2."""
    out = []
    for e in (0, 1, -1):
        out.append(_mat([[0, 0, -1, 0], [0, 1, 0, 0], [1, 0, e, 0], [0, 0, 0, 1]]))
    for e in (0, 1, -1):
        out.append(_mat([[1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, e]]))
    for d in (0, 1, -1, 2, -2):
        out.append(_mat([[0, 0, -1, 0], [0, 1, 0, 0], [1, -1, d, 0], [0, 0, 1, 1]]))
    for e1, e2, e3 in itertools.product((0, 1, -1), repeat=3):
        out.append(_mat([[0, 0, -1, 0], [0, 0, 0, -1], [1, 0, e1, e3], [0, 1, e3, e2]]))
    for M in out:
        if not is_symplectic(M):
            raise AssertionError(f"{M} is not symplectic")
    return out


N0 = gottschling_set()[0]


# ---------------------------------------------------------------------------
# Real symmetric 2x2 reduction


@dataclass(frozen=True)
class ReducedY:
    y1: object
    y2: object
    y3: object
    U: tuple[tuple[int, int], tuple[int, int]]


def _act_y(U, y):
    (a, b), (c, d) = U
    y1, y2, y3 = y
    n1 = a * a * y1 + 2 * a * b * y3 + b * b * y2
    n2 = c * c * y1 + 2 * c * d * y3 + d * d * y2
    n3 = a * c * y1 + (a * d + b * c) * y3 + b * d * y2
    return n1, n2, n3


def _mul2(U, V):
    return ((U[0][0] * V[0][0] + U[0][1] * V[1][0], U[0][0] * V[0][1] + U[0][1] * V[1][1]),
            (U[1][0] * V[0][0] + U[1][1] * V[1][0], U[1][0] * V[0][1] + U[1][1] * V[1][1]))


def gauss_reduce(Y, gl2: bool = True) -> ReducedY:
    """Reduce a positive definite (y1, y2, y3) so that -y1 < 2y3 <= y1 <= y2.

    With gl2=True the sign of y3 is also normalized to 0 <= 2y3.  The returned
    U satisfies U Y U^t = Y_out.  Entries may be floats, Fractions or MPFR.
    """
    y1, y2, y3 = _as_triple(Y)
    if not (y1 > 0 and y1 * y2 - y3 * y3 > 0):
        raise ValueError("Y is not positive definite")
    U = ((1, 0), (0, 1))
    y = (y1, y2, y3)
    for _ in range(MAX_ITERATIONS):
        r = math.floor(-y[2] / y[0] + Fraction(1, 2) if isinstance(y[0], Fraction) else -y[2] / y[0] + 0.5)
        if r:
            T = ((1, 0), (int(r), 1))
            y = _act_y(T, y)
            U = _mul2(T, U)
        if y[0] > y[1]:
            S = ((0, 1), (-1, 0))
            y = _act_y(S, y)
            U = _mul2(S, U)
            continue
        break
    else:
        raise ArithmeticError("Gauss reduction did not terminate")
    if gl2 and y[2] < 0:
        F = ((1, 0), (0, -1))
        y = _act_y(F, y)
        U = _mul2(F, U)
    return ReducedY(y[0], y[1], y[2], U)


def _as_triple(Y):
    if len(Y) == 3:
        return tuple(Y)
    if Y[0][1] != Y[1][0]:
        raise ValueError("Y is not symmetric")
    return Y[0][0], Y[1][1], Y[0][1]


def minima(Y) -> tuple[object, object]:
    """Successive minima of the binary form Y."""
    r = gauss_reduce(Y)
    return r.y1, r.y2


# ---------------------------------------------------------------------------
# Floating-point points and the symplectic action


@dataclass
class _FPoint:
    z1: object
    z2: object
    z3: object

    def y(self):
        return self.z1.imag, self.z2.imag, self.z3.imag

    def det_im(self):
        y1, y2, y3 = self.y()
        return y1 * y2 - y3 * y3


def _det_cz_d(M, z) -> object:
    _, _, C, D = blocks(M)
    q11 = C[0][0] * z.z1 + C[0][1] * z.z3 + D[0][0]
    q12 = C[0][0] * z.z3 + C[0][1] * z.z2 + D[0][1]
    q21 = C[1][0] * z.z1 + C[1][1] * z.z3 + D[1][0]
    q22 = C[1][0] * z.z3 + C[1][1] * z.z2 + D[1][1]
    return q11 * q22 - q12 * q21


def _apply_fp(M, z: _FPoint) -> _FPoint:
    A, B, C, D = blocks(M)
    Z = ((z.z1, z.z3), (z.z3, z.z2))
    P = [[A[i][0] * Z[0][j] + A[i][1] * Z[1][j] + B[i][j] for j in range(2)] for i in range(2)]
    Q = [[C[i][0] * Z[0][j] + C[i][1] * Z[1][j] + D[i][j] for j in range(2)] for i in range(2)]
    dq = Q[0][0] * Q[1][1] - Q[0][1] * Q[1][0]
    adj = [[Q[1][1], -Q[0][1]], [-Q[1][0], Q[0][0]]]
    R = [[(P[i][0] * adj[0][j] + P[i][1] * adj[1][j]) / dq for j in range(2)] for i in range(2)]
    return _FPoint(R[0][0], R[1][1], (R[0][1] + R[1][0]) / 2)


def apply_sp4_complex(M, Z: tuple[complex, complex, complex]) -> tuple[complex, complex, complex]:
    """M(Z) in ordinary complex floating point (for tests and diagnostics)."""
    out = _apply_fp(M, _FPoint(*(complex(z) for z in Z)))
    return out.z1, out.z2, out.z3


def apply_sp4(M, Z: SiegelPoint, n: int | None = None) -> SiegelPoint:
    """(AZ + B)(CZ + D)^-1 with certified error propagation.

    Z's own error is carried through; the result is rounded to precision n
    (defaults to Z's precision).
    """
    if n is None:
        n = Z.precision
    w = n + 32 + _size_bits(M)
    A, B, C, D = blocks(M)
    zz = ((Z.z1, Z.z3), (Z.z3, Z.z2))

    def lin(X, Y, i, j):
        s = mul_int(zz[0][j], X[i][0])
        s = add(s, mul_int(zz[1][j], X[i][1]), w)
        return add(s, ApproxComplex.exact(Y[i][j]), w)

    P = [[lin(A, B, i, j) for j in range(2)] for i in range(2)]
    Q = [[lin(C, D, i, j) for j in range(2)] for i in range(2)]
    dq = sub(mul(Q[0][0], Q[1][1], w), mul(Q[0][1], Q[1][0], w), w)
    adj = [[Q[1][1], -Q[0][1]], [-Q[1][0], Q[0][0]]]

    def entry(i, j):
        num = add(mul(P[i][0], adj[0][j], w), mul(P[i][1], adj[1][j], w), w)
        return div(num, dq, w)

    z1 = round_to(entry(0, 0), n)
    z2 = round_to(entry(1, 1), n)
    z3 = round_to(entry(0, 1), n)
    return SiegelPoint(z1, z2, z3)


def det_cz_d(M, Z: SiegelPoint, n: int) -> ApproxComplex:
    """det(CZ + D) = det M*(Z), certified."""
    _, _, C, D = blocks(M)
    w = n + 16

    def q(i, j):
        s = add(mul_int(Z.z1 if j == 0 else Z.z3, C[i][0]), mul_int(Z.z3 if j == 0 else Z.z2, C[i][1]), w)
        return add(s, ApproxComplex.exact(D[i][j]), w)

    return round_to(sub(mul(q(0, 0), q(1, 1), w), mul(q(0, 1), q(1, 0), w), w), n)


def _size_bits(M) -> int:
    return max(abs(x) for r in M for x in r).bit_length()


def _to_fpoint(Z: SiegelPoint, w: int) -> _FPoint:
    return _FPoint(*(to_mpc(z, w) for z in Z.entries()))


# ---------------------------------------------------------------------------
# Domain tests


def _deadband(bits: int):
    """2^(-bits+8) as an exact mpfr; a float would vanish next to 1/2."""
    return gmpy2.mul_2exp(gmpy2.mpfr(1), -bits + 8)


def _s1_ok(x, tol) -> bool:
    return -0.5 - tol <= x < 0.5 + tol


def _strip_shifts(x: float, tol: float) -> list[int]:
    """Integers b with |x + b| <= 1/2 + tol."""
    b0 = math.floor(-x + 0.5)
    return [b for b in (b0 - 1, b0, b0 + 1) if abs(x + b) <= 0.5 + tol]


def _s2_ok(y, tol) -> bool:
    y1, y2, y3 = y
    return -tol <= 2 * y3 and 2 * y3 <= y1 + tol and y1 <= y2 + tol


def _in_domain_fp(z: _FPoint, mats, tol) -> bool:
    if not all(_s1_ok(x, tol) for x in (z.z1.real, z.z2.real, z.z3.real)):
        return False
    if not _s2_ok(z.y(), tol):
        return False
    return all(abs(_det_cz_d(N, z)) >= 1 - tol for N in mats)


def in_F2(Z: SiegelPoint, tol_bits: int | None = None) -> bool:
    """(S1), (S2) and |det(CZ+D)| >= 1 for the 38 matrices, up to a dead-band of 2^-n+8."""
    n = Z.precision if tol_bits is None else tol_bits
    tol = _deadband(n)
    with gmpy2.context(precision=Z.precision + GUARD_BITS):
        return _in_domain_fp(_to_fpoint(Z, Z.precision + GUARD_BITS), gottschling_set(), tol)


def in_B(Z: SiegelPoint, tol_bits: int | None = None) -> bool:
    """(S1), (S2) and y1 >= sqrt(3/4), up to a dead-band of 2^-n+6."""
    n = Z.precision if tol_bits is None else tol_bits
    tol = Fraction(1, 2 ** max(n - 6, 0))
    xs = [z.real for z in Z.entries()]
    ys = [z.imag for z in Z.entries()]
    if not all(-Fraction(1, 2) - tol <= x < Fraction(1, 2) + tol for x in xs):
        return False
    y1, y2, y3 = ys
    if not (-tol <= 2 * y3 <= y1 + tol and y1 <= y2 + tol):
        return False
    return (y1 + tol) ** 2 >= Fraction(3, 4)


# ---------------------------------------------------------------------------
# Reduction


@dataclass
class ReductionLog:
    steps: list[dict] = field(default_factory=list)

    def det_im_sequence(self) -> list[float]:
        return [s["det_im"] for s in self.steps]

    def is_monotone(self, rel_tol: float = 1e-12) -> bool:
        seq = self.det_im_sequence()
        return all(b >= a * (1 - rel_tol) for a, b in zip(seq, seq[1:]))


@dataclass
class ReductionResult:
    Z: SiegelPoint
    M: Sp4Matrix
    log: ReductionLog
    iterations: int

    def __iter__(self):
        yield self.Z
        yield self.M


def _reduce(Z0: SiegelPoint, mats, deadband_bits: int | None = None, guard: int = GUARD_BITS) -> ReductionResult:
    n = Z0.precision
    w = n + guard
    tol = _deadband(n if deadband_bits is None else deadband_bits)
    log = ReductionLog()
    M = IDENTITY4
    with gmpy2.context(precision=w):
        z = _to_fpoint(Z0, w)
        if not (z.z1.imag > 0 and z.det_im() > 0):
            raise ValueError("Z0 is not in the Siegel upper half space")
        log.steps.append({"step": "start", "det_im": float(z.det_im())})
        for it in range(MAX_ITERATIONS):
            # 1. reduce the imaginary part with GL2(Z)
            r = gauss_reduce(z.y())
            if r.U != ((1, 0), (0, 1)):
                G = gl2_embedding(r.U)
                z = _apply_fp(G, z)
                M = mat_mul(G, M)
            # 2. translate the real part into [-1/2, 1/2)
            b = [math.floor(-x + 0.5) for x in (z.z1.real, z.z2.real, z.z3.real)]
            if any(b):
                T = translation(((b[0], b[2]), (b[2], b[1])))
                z = _FPoint(z.z1 + b[0], z.z2 + b[1], z.z3 + b[2])
                M = mat_mul(T, M)
            # 3. apply the matrix with the smallest |det(CZ+D)| < 1
            best, best_val = None, None
            for N in mats:
                v = abs(_det_cz_d(N, z))
                if v < 1 - tol and (best_val is None or v < best_val):
                    best, best_val = N, v
            log.steps.append({"step": "gauss+translate", "det_im": float(z.det_im()),
                              "y": tuple(float(t) for t in z.y())})
            if best is None:
                break
            z = _apply_fp(best, z)
            M = mat_mul(best, M)
            if not (z.z1.imag > 0 and z.det_im() > 0):
                raise ReductionPrecisionError("lost positive definiteness; increase precision")
            log.steps.append({"step": "gottschling", "det_im": float(z.det_im()), "abs_det": float(best_val)})
        else:
            raise ReductionPrecisionError("reduction did not terminate")
    if not is_symplectic(M):
        raise AssertionError("accumulated matrix is not symplectic")
    return ReductionResult(apply_sp4(M, Z0, n), M, log, it)


def reduce_to_F2(Z0: SiegelPoint, deadband_bits: int | None = None) -> ReductionResult:
    """Reduce Z0 into F2; returns (Z, M) with Z = M(Z0) and M symplectic."""
    return _reduce(Z0, gottschling_set(), deadband_bits)


def reduce_to_B(Z0: SiegelPoint, deadband_bits: int | None = None) -> ReductionResult:
    """Like reduce_to_F2 but only the single matrix N0 is tested, landing in B."""
    return _reduce(Z0, [N0], deadband_bits)


def reduce_complex(Z, n: int = 53) -> ReductionResult:
    """Convenience wrapper for plain complex triples."""
    return reduce_to_F2(SiegelPoint.from_complex(*Z, n=n))


# ---------------------------------------------------------------------------
# Points of F2 equivalent to a given one


def _normalize_sign(U):
    flat = [x for r in U for x in r]
    first = next(x for x in flat if x)
    if first < 0:
        return tuple(tuple(-x for x in r) for r in U)
    return U


def stabilizer_group(y, tol) -> list:
    """Elements of GL2(Z)/{+-1} fixing a reduced Y, generated by the boundary symmetries."""
    y1, y2, y3 = y
    gens = []
    if abs(y1 - y2) <= tol:
        gens.append(((0, 1), (1, 0)))
    if abs(2 * y3 - y1) <= tol:
        gens.append(((1, -1), (0, -1)))
    if abs(y3) <= tol:
        gens.append(((1, 0), (0, -1)))
    group = {((1, 0), (0, 1))}
    frontier = list(group)
    while frontier:
        g = frontier.pop()
        for h in gens:
            k = _normalize_sign(_mul2(h, g))
            if k not in group:
                group.add(k)
                frontier.append(k)
    return sorted(group)


def boundary_orbit(Z: SiegelPoint, tol_bits: int | None = None) -> list[tuple[SiegelPoint, Sp4Matrix]]:
    """Points of F2 that are Sp4(Z)-equivalent to Z in F2, with the matrices reaching them.

    Equality tests use the dead-band 2^-n+8; a point within the band of the
    unit circle is counted as on it.
    """
    n = Z.precision if tol_bits is None else tol_bits
    tol = _deadband(n)
    w = Z.precision + GUARD_BITS
    gs = gottschling_set()
    cands: list[Sp4Matrix] = []
    with gmpy2.context(precision=w):
        z = _to_fpoint(Z, w)
        if not _in_domain_fp(z, gs, tol):
            raise ValueError("Z is not in F2")
        starts = [IDENTITY4]
        for N in gs:
            v = abs(_det_cz_d(N, z))
            if abs(v - 1) <= tol:
                starts.append(N)
        for S in starts:
            zs = _apply_fp(S, z)
            r = gauss_reduce(zs.y())
            G0 = gl2_embedding(r.U)
            base = mat_mul(G0, S)
            zb = _apply_fp(G0, zs)
            for U in stabilizer_group(zb.y(), tol):
                G = gl2_embedding(U)
                zu = _apply_fp(G, zb)
                # on Re = +-1/2 both integer shifts land in the closed strip
                shifts = [_strip_shifts(x, tol) for x in (zu.z1.real, zu.z2.real, zu.z3.real)]
                for b in itertools.product(*shifts):
                    T = translation(((b[0], b[2]), (b[2], b[1])))
                    zt = _FPoint(zu.z1 + b[0], zu.z2 + b[1], zu.z3 + b[2])
                    if _in_domain_fp(zt, gs, tol):
                        cands.append(mat_mul(T, mat_mul(G, base)))
        out: list[tuple[SiegelPoint, Sp4Matrix]] = []
        seen: list[tuple] = []
        for M in cands:
            zp = _apply_fp(M, z)
            key = (zp.z1, zp.z2, zp.z3)
            if any(all(abs(a - b) <= tol for a, b in zip(key, k)) for k in seen):
                continue
            seen.append(key)
            out.append((apply_sp4(M, Z), M))
    return out


def _approx_close(a: ApproxComplex, b: ApproxComplex, tol) -> bool:
    d = sub(a, b, max(a.precision, b.precision))
    return d.abs_upper().as_fraction() <= Fraction(tol)


def equivalent_in_F2(Z1: SiegelPoint, Z2: SiegelPoint, tol_bits: int | None = None) -> bool:
    """Whether two points of F2 lie in the same Sp4(Z)-orbit (compared via boundary_orbit)."""
    n = min(Z1.precision, Z2.precision) if tol_bits is None else tol_bits
    tol = Fraction(1, 2 ** max(n - 10, 0))
    return any(_approx_close(P.z1, Z2.z1, tol) and _approx_close(P.z2, Z2.z2, tol) and _approx_close(P.z3, Z2.z3, tol)
               for P, _ in boundary_orbit(Z1, tol_bits))
