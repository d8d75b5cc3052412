"""Even theta constants of genus 2 and the Igusa invariants built from them.

All ten even theta constants at a point Z are obtained from a single walk
over the lattice points m = 2(n + c') in Z^2: the term E(m Z m^t / 4) only
depends on m, and the characteristic only decides which residue classes of
m modulo 4 enter and with which sign.  Each term is computed with a relative
precision matched to its size, so the total absolute rounding error per
characteristic stays below 2^-t.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import gmpy2
from gmpy2 import mpz

from .approx import (
    ApproxComplex,
    ErrorBound,
    add,
    check_precision,
    div,
    mul,
    mul_int,
    pi_mpfr,
    round_to,
)
from .period import SiegelPoint
from .siegel import in_B

EVEN_INDICES = (0, 1, 2, 3, 4, 6, 8, 9, 12, 15)


class NotInBError(ValueError):
    """Theta evaluation needs a point of B."""


class H10VanishesError(ArithmeticError):
    """h10 is not certified non-zero: the point is a product of elliptic curves."""


class PrecisionTooLowError(ArithmeticError):
    """Precision requirement of a stage is not met; retry with more bits."""


# ---------------------------------------------------------------------------
# Characteristics


@dataclass(frozen=True)
class ThetaCharacteristic:
    """c = (c1, c2, c3, c4) in {0, 1/2}^4; stored as the bits 2c."""

    bits: tuple[int, int, int, int]

    @staticmethod
    def from_index(i: int) -> ThetaCharacteristic:
        if not 0 <= i < 16:
            raise ValueError("index must be in 0..15")
        return ThetaCharacteristic(((i >> 2) & 1, (i >> 3) & 1, i & 1, (i >> 1) & 1))

    @property
    def index(self) -> int:
        b1, b2, b3, b4 = self.bits
        return 8 * b2 + 4 * b1 + 2 * b4 + b3

    @property
    def c(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(b, 2) for b in self.bits)

    def is_even(self) -> bool:
        b1, b2, b3, b4 = self.bits
        return (b1 * b3 + b2 * b4) % 2 == 0

    def sign(self, r1: int, r2: int) -> int:
        """(-1)^((m1 2c3 + m2 2c4) / 2) for m = (r1, r2) mod 4 in the class of c'."""
        k = (r1 * self.bits[2] + r2 * self.bits[3]) % 4
        return 1 if k == 0 else -1


def even_characteristics() -> list[ThetaCharacteristic]:
    return [ThetaCharacteristic.from_index(i) for i in EVEN_INDICES]


@lru_cache(maxsize=None)
def six_subsets() -> tuple[tuple[int, ...], ...]:
    """The 6-element sets of even characteristics whose sum is integral (positions in EVEN_INDICES)."""
    chars = even_characteristics()
    out = []
    for C in itertools.combinations(range(10), 6):
        acc = [0, 0, 0, 0]
        for k in C:
            acc = [(a + b) % 2 for a, b in zip(acc, chars[k].bits)]
        if acc == [0, 0, 0, 0]:
            out.append(C)
    return tuple(out)


# ---------------------------------------------------------------------------
# Truncation parameters


def truncation_radius(s: int) -> int:
    """R = ceil(sqrt(0.4 s + 2.2)), computed exactly."""
    # smallest R with R^2 >= (2s + 11) / 5
    R = math.isqrt((2 * s + 11) // 5)
    while 5 * R * R < 2 * s + 11:
        R += 1
    return R


def working_precision(s: int) -> int:
    """Absolute precision t for the individual terms."""
    R = truncation_radius(s)
    return s + 2 + math.ceil(2 * math.log2(2 * R + 2))


# ---------------------------------------------------------------------------
# Kernel


@dataclass
class _ThetaSums:
    buckets: dict          # (r1, r2) mod 4 -> mpc sum over m in that class
    t: int
    R: int
    rounding_terms: int    # number of m with |m_i| <= 2R+1 per residue class at most
    deriv: float           # bound for sum |dq/dz| over all terms, for input error propagation
    terms: int             # number of terms actually multiplied


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("IGUSACM_THREADS", "1")))
    except ValueError:
        return 1


def _mpc_exact(z: ApproxComplex):
    bits = max(64, int(max(abs(z.re_num), abs(z.im_num)).bit_length()) + 2)
    ctx = gmpy2.context(precision=bits)
    re = ctx.mul_2exp(gmpy2.mpfr(z.re_num, bits), -z.precision)
    im = ctx.mul_2exp(gmpy2.mpfr(z.im_num, bits), -z.precision)
    return gmpy2.mpc(re, im, precision=bits)


def _theta_sums(Z: SiegelPoint, s: int) -> _ThetaSums:
    R = truncation_radius(s)
    t = working_precision(s)
    M = 2 * R + 1
    guard = 16 + (4 * M + 16).bit_length()
    top = t + guard
    y1, y2, y3 = (float(v) for v in Z.imag_parts())
    ln2 = math.log(2.0)
    piq = math.pi / (4 * ln2)

    def kbits(m1, m2):
        """-log2 |E(m Z m^t / 4)|."""
        return piq * (y1 * m1 * m1 + 2 * y3 * m1 * m2 + y2 * m2 * m2)

    def prec_for(k):
        return max(64, int(top - k) + 2)

    skip = t + 2  # a term with |q| < 2^-(t+2) is dropped; it counts as one rounding error

    ctx_top = gmpy2.context(precision=top + 32)
    z1, z2, z3 = (_mpc_exact(z) for z in Z.entries())
    pi = pi_mpfr(top + 64)
    X = ctx_top
    ipi = gmpy2.mpc(0, pi, precision=top + 64)

    def E(w, k):
        return X.exp(X.mul(ipi, X.div(w, k)))

    a2 = E(z1, 2)
    e_z3 = E(z3, 2)
    e_mz3 = E(z3, -2)
    c_mult = E(z2, 2)
    C = E(z2, 4)
    up = E(z1, 4)
    dn = up
    q0 = gmpy2.mpc(1, 0)

    acc_prec = t + 24
    acc = {(r1, r2): gmpy2.mpc(0, 0, precision=acc_prec) for r1 in range(4) for r2 in range(4)}
    acc_ctx = gmpy2.context(precision=acc_prec)
    work = gmpy2.context(precision=top)
    deriv = 0.0
    terms = 0

    def add_term(m1, m2, q, weight2):
        nonlocal deriv
        key = (m1 % 4, m2 % 4)
        val = acc_ctx.mul_2exp(q, 1) if weight2 else q
        acc[key] = acc_ctx.add(acc[key], val)

    for m2 in range(0, M + 1):
        row_min_k = piq * m2 * m2 * (y2 - y3 * y3 / y1)
        if row_min_k > skip:
            break
        center = -m2 * y3 / y1
        c_lo, c_hi = math.floor(center), math.ceil(center)
        k_center = min(kbits(c_lo, m2), kbits(c_hi, m2))
        row_prec = prec_for(k_center)
        # upward walk: m1 = 0, 1, 2, ...
        q = q0
        rho = up
        m1 = 0
        while m1 <= M:
            k = kbits(m1, m2)
            if m1 >= c_hi and k > skip:
                break
            if k <= skip and (m2 > 0 or m1 > 0):
                add_term(m1, m2, q, True)
                deriv += math.pi / 4 * (m1 * m1 + m2 * m2 + 2 * abs(m1 * m2)) * 2.0 ** (-k) * 2
                terms += 1
            elif m1 == 0 and m2 == 0:
                add_term(0, 0, q, False)
                terms += 1
            kk = k_center if m1 < c_hi else kbits(m1 + 1, m2)
            work.precision = prec_for(min(kk, k_center) if m1 < c_hi else kk)
            q = work.mul(q, rho)
            rho = work.mul(rho, a2)
            m1 += 1
        # downward walk: m1 = -1, -2, ... (only for m2 > 0; m2 = 0 is covered by symmetry)
        if m2 > 0:
            work.precision = row_prec
            q = work.mul(q0, dn)
            rho = work.mul(dn, a2)
            m1 = -1
            while m1 >= -M:
                k = kbits(m1, m2)
                if m1 <= c_lo and k > skip:
                    break
                if k <= skip:
                    add_term(m1, m2, q, True)
                    deriv += math.pi / 4 * (m1 * m1 + m2 * m2 + 2 * abs(m1 * m2)) * 2.0 ** (-k) * 2
                    terms += 1
                kk = k_center if m1 > c_lo else kbits(m1 - 1, m2)
                work.precision = prec_for(min(kk, k_center) if m1 > c_lo else kk)
                q = work.mul(q, rho)
                rho = work.mul(rho, a2)
                m1 -= 1
        # advance to the next row; precision needed by all later rows is that of the next row centre
        nxt = m2 + 1
        cn = -nxt * y3 / y1
        k_next = min(kbits(math.floor(cn), nxt), kbits(math.ceil(cn), nxt))
        work.precision = prec_for(k_next)
        q0 = work.mul(q0, C)
        C = work.mul(C, c_mult)
        up = work.mul(up, e_z3)
        dn = work.mul(dn, e_mz3)
    per_class = (M + 1) ** 2
    # the slack also absorbs the weights of deep terms that underflow to 0.0
    return _ThetaSums(acc, t, R, per_class, deriv + 8.0, terms)


def _to_approx(x, n: int) -> ApproxComplex:
    ctx = gmpy2.context(precision=max(64, n + 64))
    re = mpz(ctx.rint(ctx.mul_2exp(x.real, n)))
    im = mpz(ctx.rint(ctx.mul_2exp(x.imag, n)))
    return ApproxComplex(re, im, n)


def _check_input(Z: SiegelPoint, s: int) -> None:
    if not in_B(Z, max(Z.precision, s)):
        raise NotInBError("theta evaluation requires Z in B")


def _combine(sums: _ThetaSums, ch: ThetaCharacteristic, Z: SiegelPoint, s: int) -> ApproxComplex:
    b1, b2 = ch.bits[0], ch.bits[1]
    ctx = gmpy2.context(precision=sums.t + 32)
    total = gmpy2.mpc(0, 0, precision=sums.t + 32)
    for r1 in range(b1, 4, 2):
        for r2 in range(b2, 4, 2):
            v = sums.buckets[(r1, r2)]
            total = ctx.add(total, v) if ch.sign(r1, r2) > 0 else ctx.sub(total, v)
    out = _to_approx(total, s + 4)
    # rounding of each kept or dropped term, tail beyond the box, accumulation and final rounding
    err = ErrorBound.make(sums.rounding_terms + 64, -sums.t) + ErrorBound.pow2(-s - 1) + ErrorBound.pow2(-s - 4)
    if Z.error.man:
        err = err + Z.error * ErrorBound.from_fraction(Fraction(sums.deriv).limit_denominator(1 << 20) + 1)
    return out.with_error(err)


def theta_constant(c: ThetaCharacteristic | int, Z: SiegelPoint, s: int) -> ApproxComplex:
    """theta[c](Z) with absolute error at most 2^-s, for Z in B."""
    if isinstance(c, int):
        c = ThetaCharacteristic.from_index(c)
    if not c.is_even():
        return ApproxComplex.exact(0, 0, s)
    check_precision(s)
    _check_input(Z, s)
    sums = _theta_sums(Z, s)
    return _combine(sums, c, Z, s)


def even_thetas(Z: SiegelPoint, s: int) -> list[ApproxComplex]:
    """theta_j(Z) for j in EVEN_INDICES (in that order), each with error at most 2^-s."""
    check_precision(s)
    _check_input(Z, s)
    sums = _theta_sums(Z, s)
    return [_combine(sums, ch, Z, s) for ch in even_characteristics()]


def even_theta_squares(Z: SiegelPoint, s: int) -> list[ApproxComplex]:
    """theta_j(Z)^2 for j in EVEN_INDICES, each with error at most 2^-s.

    Uses the duplication formula
        theta[a; b](Z)^2 = sum_alpha (-1)^(4 b.alpha) theta[alpha; 0](2Z) theta[alpha + a; 0](2Z)
    over alpha in {0, 1/2}^2.  The four constants at 2Z come from one lattice
    walk with terms decaying twice as fast as at Z, so about half as many
    terms are needed as for even_thetas.
    """
    check_precision(s)
    _check_input(Z, s)
    w = s + 6
    Z2 = SiegelPoint(*(mul_int(z, 2) for z in Z.entries()))
    sums = _theta_sums(Z2, w)
    big = {}
    for a1, a2 in itertools.product((0, 1), repeat=2):
        big[(a1, a2)] = _combine(sums, ThetaCharacteristic((a1, a2, 0, 0)), Z2, w)
    out = []
    for ch in even_characteristics():
        b1, b2, b3, b4 = ch.bits
        acc = None
        for a1, a2 in itertools.product((0, 1), repeat=2):
            term = mul(big[(a1, a2)], big[(a1 ^ b1, a2 ^ b2)], w)
            if (b3 * a1 + b4 * a2) % 2:
                term = -term
            acc = term if acc is None else add(acc, term, w)
        out.append(round_to(acc, s + 2))
    return out


# ---------------------------------------------------------------------------
# Modular forms and invariants


def _pow(x: ApproxComplex, k: int, n: int) -> ApproxComplex:
    out = None
    base = x
    while k:
        if k & 1:
            out = base if out is None else mul(out, base, n)
        k >>= 1
        if k:
            base = mul(base, base, n)
    return out if out is not None else ApproxComplex.exact(1, 0, n)


def _prod(xs, n):
    out = xs[0]
    for x in xs[1:]:
        out = mul(out, x, n)
    return out


def _sum(xs, n):
    out = xs[0]
    for x in xs[1:]:
        out = add(out, x, n)
    return out


@dataclass(frozen=True)
class HForms:
    h4: ApproxComplex
    h10: ApproxComplex
    h12: ApproxComplex
    h16: ApproxComplex


def h_forms(thetas, n: int | None = None) -> HForms:
    """h4, h10, h12, h16 from the ten even theta constants (EVEN_INDICES order)."""
    if len(thetas) != 10:
        raise ValueError("need the ten even theta constants")
    if n is None:
        n = min(t.precision for t in thetas)
    return h_forms_from_squares([mul(t, t, n) for t in thetas], n)


def h_forms_from_squares(sq, n: int | None = None) -> HForms:
    """As h_forms, but from the squares theta_j^2; every form is a polynomial in them."""
    if len(sq) != 10:
        raise ValueError("need the ten even theta squares")
    if n is None:
        n = min(t.precision for t in sq)
    p4 = [mul(x, x, n) for x in sq]
    p8 = [mul(x, x, n) for x in p4]
    h4 = _sum(p8, n)
    h10 = _prod(sq, n)
    S = six_subsets()
    prods = [_prod([p4[k] for k in C], n) for C in S]
    h12 = _sum(prods, n)
    terms16 = [mul(p8[d], P, n) for C, P in zip(S, prods) for d in range(10) if d not in C]
    h16 = _sum(terms16, n)
    return HForms(h4, h10, h12, h16)


def h16_term_count() -> int:
    return sum(1 for C in six_subsets() for d in range(10) if d not in C)


def u_bound(Z: SiegelPoint) -> int:
    """u = ceil(3 + pi (y1 + y2 - y3) + max(2, -log2 |z3|)).

    |z3| is taken from below, so the result never underestimates.
    """
    z3 = Z.z3
    low = z3.abs_lower() - z3.err.as_fraction()
    if low <= 0:
        raise PrecisionTooLowError("z3 is not certified non-zero")
    y1, y2, y3 = Z.imag_parts()
    ctx = gmpy2.context(precision=128, round=gmpy2.RoundUp)
    a = ctx.mul(pi_mpfr(128), gmpy2.mpfr(Fraction(y1 + y2 - y3) + Z.error.as_fraction() * 3, 128))
    lg = -ctx.log2(gmpy2.mpfr(low, 128)) if low < Fraction(1, 4) else gmpy2.mpfr(2)
    val = ctx.add(ctx.add(gmpy2.mpfr(3), a), max(gmpy2.mpfr(2), lg))
    return int(ctx.ceil(val))


@dataclass(frozen=True)
class InvariantTriple:
    i1: ApproxComplex
    i2: ApproxComplex
    i3: ApproxComplex
    i4: ApproxComplex | None = None

    def as_tuple(self):
        return self.i1, self.i2, self.i3

    def max_error(self) -> ErrorBound:
        return max(self.i1.err, self.i2.err, self.i3.err)


def _h10_nonzero(h10: ApproxComplex) -> bool:
    return h10.abs_lower() > h10.err.as_fraction()


def igusa_invariants(thetas, u: int, s: int) -> InvariantTriple:
    """i1 = h4 h16 / h10^2, i2 = h4^2 h12 / h10^2, i3 = h4^5 / h10^2 and i4 = h12^5 / h10^6.

    Products are formed factor by factor at absolute precision s.
    """
    return invariants_from_h(h_forms(thetas, s), u, s)


def igusa_invariants_from_squares(squares, u: int, s: int) -> InvariantTriple:
    """igusa_invariants with theta_j^2 as input."""
    return invariants_from_h(h_forms_from_squares(squares, s), u, s)


def invariants_from_h(h: HForms, u: int, s: int) -> InvariantTriple:
    if s <= 13 + 2 * u:
        raise PrecisionTooLowError(f"need s > 13 + 2u = {13 + 2 * u}, got {s}")
    if not _h10_nonzero(h.h10):
        raise H10VanishesError("h10 vanishes to working precision")
    h10sq = mul(h.h10, h.h10, s)
    i1 = div(mul(h.h4, h.h16, s), h10sq, s)
    i2 = div(mul(mul(h.h4, h.h4, s), h.h12, s), h10sq, s)
    i3 = div(_pow(h.h4, 5, s), h10sq, s)
    # i4 is auxiliary; h10^6 may vanish at absolute precision s even when h10 does not
    h10_6 = _pow(h.h10, 6, s)
    i4 = div(_pow(h.h12, 5, s), h10_6, s) if _h10_nonzero(h10_6) else None
    return InvariantTriple(i1, i2, i3, i4)


def invariant_error_envelope(u: int, s: int) -> ErrorBound:
    """Worst-case error 2^(100 + 3u - s) of igusa_invariants."""
    return ErrorBound.pow2(100 + 3 * u - s)


@dataclass(frozen=True)
class HomogeneousInvariants:
    I2: ApproxComplex
    I4: ApproxComplex
    I6: ApproxComplex
    I10: ApproxComplex


def homogeneous_invariants(thetas, n: int | None = None) -> HomogeneousInvariants:
    """I2 = h12/h10, I4 = h4, I6 = h16/h10, I10 = h10."""
    h = h_forms(thetas, n)
    if n is None:
        n = h.h4.precision
    if not _h10_nonzero(h.h10):
        raise H10VanishesError("h10 vanishes to working precision")
    return HomogeneousInvariants(div(h.h12, h.h10, n), h.h4, div(h.h16, h.h10, n), h.h10)


def thetas_at(Z: SiegelPoint, s: int) -> dict[int, ApproxComplex]:
    """Dictionary index -> theta_index(Z) for the even indices."""
    return dict(zip(EVEN_INDICES, even_thetas(Z, s)))
