"""Independent reference computations and random test data.

Nothing here calls the algorithms it is used to check: theta constants are
summed naively with mpmath, polynomials are expanded one factor at a time,
minima come from brute-force enumeration.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

import mpmath

from .approx import ApproxComplex
from .period import OMEGA, SiegelPoint

# ---------------------------------------------------------------------------
# Theta constants


def _mpf(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


def _mpc(z: ApproxComplex):
    return mpmath.mpc(_mpf(z.real), _mpf(z.imag))


def theta_naive(index: int, Z: SiegelPoint, radius: int, bits: int):
    """Sum of exp(pi i (n+c')^t Z (n+c') + 2 pi i (n+c')^t c'') over the box |n_i| <= radius.

    The characteristic index i encodes c' = ((i>>2)&1, (i>>3)&1)/2 and
    c'' = (i&1, (i>>1)&1)/2.
    """
    a1, a2 = Fraction((index >> 2) & 1, 2), Fraction((index >> 3) & 1, 2)
    b1, b2 = Fraction(index & 1, 2), Fraction((index >> 1) & 1, 2)
    with mpmath.workprec(bits):
        z1, z2, z3 = (_mpc(z) for z in Z.entries())
        ipi = mpmath.mpc(0, 1) * mpmath.pi
        ys = [n2 + a2 for n2 in range(-radius, radius + 1)]
        col = [mpmath.exp(ipi * (_mpf(y * y) * z2 + _mpf(2 * y * b2))) for y in ys]
        tot = mpmath.mpc(0)
        for n1 in range(-radius, radius + 1):
            x = n1 + a1
            row = mpmath.exp(ipi * (_mpf(x * x) * z1 + _mpf(2 * x * b1)))
            # cross term exp(2 pi i x y z3), stepped along the row
            step = mpmath.exp(2 * ipi * _mpf(x) * z3)
            cross = mpmath.exp(2 * ipi * _mpf(x * ys[0]) * z3)
            acc = mpmath.mpc(0)
            for c in col:
                acc += cross * c
                cross *= step
            tot += row * acc
        return tot


def approx_distance(a: ApproxComplex, b, bits: int) -> float:
    """log2 |a - b| for an ApproxComplex a and an mpmath number b (-inf when equal)."""
    with mpmath.workprec(bits):
        d = abs(_mpc(a) - b)
        return float(mpmath.log(d, 2)) if d else -math.inf


# ---------------------------------------------------------------------------
# Random points


def _frac(x: float, n: int) -> Fraction:
    return Fraction(round(x * 2 ** n), 2 ** n)


def random_point_in_B(rng: random.Random, n: int = 64) -> SiegelPoint:
    """Z with |Re z_i| <= 1/2, 0 <= 2 y3 <= y1 <= y2 and y1 >= sqrt(3)/2."""
    y1 = rng.uniform(0.8661, 2.5)
    y2 = y1 + rng.uniform(0, 2.5)
    y3 = rng.uniform(0, y1 / 2)
    xs = [rng.uniform(-0.5, 0.4999) for _ in range(3)]
    vals = []
    for x, y in zip(xs, (y1, y2, y3)):
        vals.append(ApproxComplex.from_fraction(_frac(x, n), _frac(y, n), n))
    return SiegelPoint(*vals)


def _det_cz_d_mp(M, z1, z2, z3):
    Z = mpmath.matrix([[z1, z3], [z3, z2]])
    C = mpmath.matrix([[M[2][0], M[2][1]], [M[3][0], M[3][1]]])
    D = mpmath.matrix([[M[2][2], M[2][3]], [M[3][2], M[3][3]]])
    return mpmath.det(C * Z + D)


def f2_margin(Z: SiegelPoint, mats) -> float:
    """Smallest slack among the inequalities cutting out F2 (negative outside)."""
    with mpmath.workprec(200):
        z1, z2, z3 = (_mpc(z) for z in Z.entries())
        y1, y2, y3 = z1.imag, z2.imag, z3.imag
        slack = [0.5 - abs(z.real) for z in (z1, z2, z3)]
        slack += [2 * y3, y1 - 2 * y3, y2 - y1]
        slack += [abs(_det_cz_d_mp(M, z1, z2, z3)) - 1 for M in mats]
        return float(min(slack))


def random_point_in_F2_interior(rng: random.Random, mats, n: int = 64, margin: float = 1e-3) -> SiegelPoint:
    """Rejection sampling from B until every defining inequality of F2 holds with slack."""
    while True:
        Z = random_point_in_B(rng, n)
        if f2_margin(Z, mats) > margin:
            return Z


# ---------------------------------------------------------------------------
# Integer matrices


def _elementary(rng: random.Random, size: int):
    E = [[int(i == j) for j in range(size)] for i in range(size)]
    i, j = rng.sample(range(size), 2)
    E[i][j] = rng.choice([-3, -2, -1, 1, 2, 3])
    return E


def _mul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def random_unimodular(rng: random.Random, size: int = 4, steps: int = 12):
    U = [[int(i == j) for j in range(size)] for i in range(size)]
    for _ in range(steps):
        U = _mul(U, _elementary(rng, size))
    perm = list(range(size))
    rng.shuffle(perm)
    return [[U[perm[i]][j] for j in range(size)] for i in range(size)]


def random_gl2_small(rng: random.Random, bound: int = 12):
    """A 2x2 unimodular integer matrix with entries at most ``bound`` in absolute value."""
    while True:
        a, c = rng.randint(-bound, bound), rng.randint(-bound, bound)
        if math.gcd(a, c) != 1:
            continue
        # a d - b c = 1; shift the particular solution to keep b, d small
        b, d = _bezout(a, c)
        k = round(b / a) if a else 0
        b, d = b - k * a, d - k * c
        if max(abs(b), abs(d)) <= bound:
            return [[a, b], [c, d]]


def _bezout(a: int, c: int) -> tuple[int, int]:
    """(b, d) with a d - b c = 1 for coprime a, c."""
    x0, x1, y0, y1, r0, r1 = 1, 0, 0, 1, a, c
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    # x0 a + y0 c = r0 = +-1
    return (-y0 * r0, x0 * r0)


def random_polarization_form(rng: random.Random):
    """U^t Omega U for a random unimodular U: antisymmetric with determinant 1."""
    U = random_unimodular(rng)
    Ut = [list(r) for r in zip(*U)]
    return _mul(_mul(Ut, [list(r) for r in OMEGA]), U)


def random_sp4_word(rng: random.Random, mats, length: int):
    """A product of up to ``length`` generators: Gottschling matrices, translations, GL2 conjugations."""
    def gl2():
        while True:
            a, b, c, d = (rng.randint(-2, 2) for _ in range(4))
            if a * d - b * c in (1, -1):
                break
        det = a * d - b * c
        inv_t = [[d * det, -c * det], [-b * det, a * det]]
        return [[a, b, 0, 0], [c, d, 0, 0], [0, 0, *inv_t[0]], [0, 0, *inv_t[1]]]

    def trans():
        b1, b2, b3 = (rng.randint(-2, 2) for _ in range(3))
        return [[1, 0, b1, b3], [0, 1, b3, b2], [0, 0, 1, 0], [0, 0, 0, 1]]

    W = [[int(i == j) for j in range(4)] for i in range(4)]
    for _ in range(rng.randint(1, length)):
        kind = rng.randrange(3)
        G = [list(r) for r in rng.choice(mats)] if kind == 0 else (trans() if kind == 1 else gl2())
        W = _mul(G, W)
    return W


def is_symplectic_exact(M) -> bool:
    Om = [list(r) for r in OMEGA]
    Mt = [list(r) for r in zip(*M)]
    return _mul(_mul(Mt, Om), M) == Om


# ---------------------------------------------------------------------------
# Quadratic forms


def brute_force_minima(y1, y2, y3) -> tuple[Fraction, Fraction]:
    """First and second successive minima of y1 x^2 + 2 y3 x y + y2 y^2 by enumeration.

    B is the value of some vector independent of the shortest one in a small
    box, so m2 <= B; every (x, y) with Q <= B is then listed row by row inside
    the ellipse.
    """
    y1, y2, y3 = Fraction(y1), Fraction(y2), Fraction(y3)
    det = y1 * y2 - y3 * y3

    def q(x, y):
        return y1 * x * x + 2 * y3 * x * y + y2 * y * y

    small = [(x, y) for x in range(-13, 14) for y in range(0, 14) if y > 0 or x > 0]
    small.sort(key=lambda v: q(*v))
    v = small[0]
    w = next(w for w in small if v[0] * w[1] != v[1] * w[0])
    B = min(max(y1, y2), q(*w))
    vals = []
    ymax = math.isqrt(math.floor(B * y1 / det)) + 1
    for y in range(0, ymax + 1):
        rest = B - det * y * y / y1
        if rest < 0:
            continue
        center = -y3 * y / y1
        half = math.isqrt(math.floor(rest / y1)) + 1
        for x in range(math.floor(center) - half, math.ceil(center) + half + 1):
            if y == 0 and x <= 0:
                continue
            val = q(x, y)
            if val <= B:
                vals.append((val, x, y))
    vals.sort()
    q1, x1, w1 = vals[0]
    for val, x, w in vals[1:]:
        if x * w1 - w * x1 != 0:
            return q1, val
    raise AssertionError("no independent second vector found")


# ---------------------------------------------------------------------------
# Polynomials


def sequential_product(roots, bits: int) -> list:
    """Coefficients (ascending) of prod (X - z) in mpmath at the given precision."""
    with mpmath.workprec(bits):
        coeffs = [mpmath.mpc(1)]
        for z in roots:
            w = _mpc(z) if isinstance(z, ApproxComplex) else mpmath.mpc(z)
            nxt = [mpmath.mpc(0)] * (len(coeffs) + 1)
            for k, c in enumerate(coeffs):
                nxt[k + 1] += c
                nxt[k] -= w * c
            coeffs = nxt
        return coeffs


def max_coefficient_distance(f, coeffs, bits: int) -> float:
    """log2 of the sup-norm distance between an ApproxPolynomial and mpmath coefficients."""
    with mpmath.workprec(bits):
        scale = mpmath.mpf(2) ** (-f.p)
        worst = mpmath.mpf(0)
        for a, b, c in zip(f.a, f.b, coeffs):
            worst = max(worst, abs(mpmath.mpc(a, b) * scale - c))
        return float(mpmath.log(worst, 2)) if worst else -math.inf


def random_roots(rng: random.Random, count: int, radius: float, n: int) -> list[ApproxComplex]:
    out = []
    for _ in range(count):
        r = radius * math.sqrt(rng.random())
        t = rng.uniform(0, 2 * math.pi)
        out.append(ApproxComplex.from_fraction(_frac(r * math.cos(t), n), _frac(r * math.sin(t), n), n))
    return out
