"""Fixed-point complex numbers 2^-n (x + iy) with explicit error bounds.

Every value is an exact dyadic Gaussian rational.  The distance to the
quantity it approximates is carried separately as an ``ErrorBound``.
Precision only changes through explicit calls (``round_to`` or the ``n``
argument of an operation).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpz

GUARD_BITS = 32
DEFAULT_PRECISION_CAP = 4_000_000

_precision_cap = DEFAULT_PRECISION_CAP


class PrecisionCapError(RuntimeError):
    """Raised when an operation asks for more bits than the configured cap."""


def set_precision_cap(bits: int) -> None:
    global _precision_cap
    if bits <= 0:
        raise ValueError("precision cap must be positive")
    _precision_cap = int(bits)


def precision_cap() -> int:
    return _precision_cap


def check_precision(n: int) -> None:
    if n > _precision_cap:
        raise PrecisionCapError(f"requested {n} bits exceeds the cap of {_precision_cap}")


# ---------------------------------------------------------------------------
# Dyadic upper bounds

_MANT_BITS = 48


@dataclass(frozen=True, slots=True)
class ErrorBound:
    """Non-negative dyadic number man * 2^exp used as an upper bound.

    The mantissa is kept short by rounding upwards, so every operation
    returns a value that is at least the exact result.
    """

    man: int
    exp: int

    @staticmethod
    def make(man: int, exp: int = 0) -> ErrorBound:
        if man < 0:
            raise ValueError("error bounds are non-negative")
        if man == 0:
            return ZERO_BOUND
        extra = man.bit_length() - _MANT_BITS
        if extra > 0:
            man = -((-man) >> extra)
            exp += extra
        return ErrorBound(int(man), int(exp))

    @staticmethod
    def pow2(k: int) -> ErrorBound:
        return ErrorBound(1, int(k))

    @staticmethod
    def from_fraction(q) -> ErrorBound:
        q = Fraction(q)
        if q < 0:
            raise ValueError("error bounds are non-negative")
        if q == 0:
            return ZERO_BOUND
        shift = _MANT_BITS + 2 - (q.numerator.bit_length() - q.denominator.bit_length())
        if shift >= 0:
            num = q.numerator << shift
            man = -((-num) // q.denominator)
        else:
            man = -((-q.numerator) // (q.denominator << -shift))
        return ErrorBound.make(man, -shift)

    def __add__(self, other: ErrorBound) -> ErrorBound:
        if self.man == 0:
            return other
        if other.man == 0:
            return self
        e = min(self.exp, other.exp)
        return ErrorBound.make((self.man << (self.exp - e)) + (other.man << (other.exp - e)), e)

    def __mul__(self, other) -> ErrorBound:
        if not isinstance(other, ErrorBound):
            other = ErrorBound.from_fraction(other)
        return ErrorBound.make(self.man * other.man, self.exp + other.exp)

    __rmul__ = __mul__

    def _cmp(self, other: ErrorBound) -> int:
        if self.man == 0 or other.man == 0:
            return (self.man > 0) - (other.man > 0)
        e = min(self.exp, other.exp)
        x = self.man << (self.exp - e)
        y = other.man << (other.exp - e)
        return (x > y) - (x < y)

    def __le__(self, other: ErrorBound) -> bool:
        return self._cmp(other) <= 0

    def __lt__(self, other: ErrorBound) -> bool:
        return self._cmp(other) < 0

    def __ge__(self, other: ErrorBound) -> bool:
        return self._cmp(other) >= 0

    def __gt__(self, other: ErrorBound) -> bool:
        return self._cmp(other) > 0

    def as_fraction(self) -> Fraction:
        if self.exp >= 0:
            return Fraction(self.man << self.exp)
        return Fraction(self.man, 1 << -self.exp)

    def log2(self) -> float:
        """Approximate log2 of the bound (-inf for zero)."""
        if self.man == 0:
            return float("-inf")
        return self.exp + gmpy2.log2(self.man)

    def bits(self) -> int:
        """Smallest k with bound <= 2^k (very negative for zero)."""
        if self.man == 0:
            return -(1 << 62)
        return self.exp + (self.man - 1).bit_length()


ZERO_BOUND = ErrorBound(0, 0)


# ---------------------------------------------------------------------------
# Integer helpers


def _round_shift(x, k: int):
    """Round x / 2^k to the nearest integer, ties away from zero."""
    if k <= 0:
        return x << (-k)
    half = mpz(1) << (k - 1)
    if x >= 0:
        return (x + half) >> k
    return -((-x + half) >> k)


def _abs_upper(x, y, n: int) -> ErrorBound:
    """Upper bound for |2^-n (x + iy)|."""
    s = x * x + y * y
    if s == 0:
        return ZERO_BOUND
    return ErrorBound.make(int(gmpy2.isqrt(s)) + 1, -n)


def _abs_lower(x, y, n: int) -> Fraction:
    s = x * x + y * y
    return Fraction(int(gmpy2.isqrt(s)), 1 << n) if n >= 0 else Fraction(int(gmpy2.isqrt(s)) << -n)


# ---------------------------------------------------------------------------
# ApproxComplex


@dataclass(frozen=True, slots=True)
class ApproxComplex:
    """The value 2^-precision (re_num + i im_num) together with an error bound."""

    re_num: object
    im_num: object
    precision: int
    err: ErrorBound = ZERO_BOUND

    @staticmethod
    def exact(re_num, im_num=0, precision: int = 0) -> ApproxComplex:
        return ApproxComplex(mpz(re_num), mpz(im_num), int(precision), ZERO_BOUND)

    @staticmethod
    def from_fraction(re, im=0, n: int = 64) -> ApproxComplex:
        """Nearest element of 2^-n Z[i] to the rational re + i im."""
        re, im = Fraction(re), Fraction(im)
        x = _round_fraction(re * (1 << n))
        y = _round_fraction(im * (1 << n))
        exact = x == re * (1 << n) and y == im * (1 << n)
        err = ZERO_BOUND if exact else ErrorBound.pow2(-n)
        return ApproxComplex(mpz(x), mpz(y), n, err)

    @staticmethod
    def from_complex(z: complex, n: int = 53) -> ApproxComplex:
        """Dyadic approximation of a Python float/complex, treated as exact input."""
        z = complex(z)
        return ApproxComplex.from_fraction(Fraction(z.real), Fraction(z.imag), n)

    def with_error(self, err: ErrorBound) -> ApproxComplex:
        return ApproxComplex(self.re_num, self.im_num, self.precision, err)

    @property
    def real(self) -> Fraction:
        return Fraction(int(self.re_num), 1 << self.precision)

    @property
    def imag(self) -> Fraction:
        return Fraction(int(self.im_num), 1 << self.precision)

    def value(self) -> tuple[Fraction, Fraction]:
        return self.real, self.imag

    def __complex__(self) -> complex:
        return complex(_big_float(self.re_num, self.precision), _big_float(self.im_num, self.precision))

    def abs_upper(self) -> ErrorBound:
        """Upper bound for |value|, ignoring the approximation error."""
        return _abs_upper(self.re_num, self.im_num, self.precision)

    def abs_lower(self) -> Fraction:
        return _abs_lower(self.re_num, self.im_num, self.precision)

    def is_zero(self) -> bool:
        return self.re_num == 0 and self.im_num == 0

    def __neg__(self) -> ApproxComplex:
        return ApproxComplex(-self.re_num, -self.im_num, self.precision, self.err)

    def conjugate(self) -> ApproxComplex:
        return ApproxComplex(self.re_num, -self.im_num, self.precision, self.err)

    def mul_i(self) -> ApproxComplex:
        return ApproxComplex(-self.im_num, self.re_num, self.precision, self.err)

    def shifted(self, k: int) -> ApproxComplex:
        """Exact multiplication by 2^k."""
        return ApproxComplex(self.re_num, self.im_num, self.precision - k,
                             ErrorBound.make(self.err.man, self.err.exp + k) if self.err.man else self.err)

    def __repr__(self) -> str:
        z = complex(self)
        return f"ApproxComplex({z.real:.17g}{z.imag:+.17g}j, n={self.precision}, err<=2^{self.err.log2():.1f})"


def _big_float(x, n: int) -> float:
    if x == 0:
        return 0.0
    k = max(0, int(mpz(x).bit_length()) - 60)
    return math.ldexp(float(int(x >> k)), k - n)


def _round_fraction(q: Fraction) -> int:
    num, den = q.numerator, q.denominator
    if den == 1:
        return num
    sign = -1 if num < 0 else 1
    return sign * ((2 * abs(num) + den) // (2 * den))


def round_to(a: ApproxComplex, n: int) -> ApproxComplex:
    """Nearest element of 2^-n Z[i], ties away from zero; adds at most 2^-n error."""
    k = a.precision - n
    if k <= 0:
        return ApproxComplex(a.re_num << (-k), a.im_num << (-k), n, a.err)
    x = _round_shift(a.re_num, k)
    y = _round_shift(a.im_num, k)
    exact = (x << k) == a.re_num and (y << k) == a.im_num
    err = a.err if exact else a.err + ErrorBound.pow2(-n)
    return ApproxComplex(x, y, n, err)


def _align(a: ApproxComplex, n: int):
    k = a.precision - n
    if k <= 0:
        return a.re_num << (-k), a.im_num << (-k), ZERO_BOUND
    x = _round_shift(a.re_num, k)
    y = _round_shift(a.im_num, k)
    if (x << k) == a.re_num and (y << k) == a.im_num:
        return x, y, ZERO_BOUND
    return x, y, ErrorBound.pow2(-n)


def add(a: ApproxComplex, b: ApproxComplex, n: int | None = None) -> ApproxComplex:
    """a + b at precision n; exact when both inputs already have precision n."""
    if n is None:
        n = max(a.precision, b.precision)
    xa, ya, ra = _align(a, n)
    xb, yb, rb = _align(b, n)
    return ApproxComplex(xa + xb, ya + yb, n, a.err + b.err + ra + rb)


def sub(a: ApproxComplex, b: ApproxComplex, n: int | None = None) -> ApproxComplex:
    return add(a, -b, n)


def mul(a: ApproxComplex, b: ApproxComplex, n: int | None = None) -> ApproxComplex:
    """Product rounded to 2^-n Z[i].

    error <= err(a)|b| + err(b)|a| + err(a)err(b) + 2^-n
    """
    if n is None:
        n = max(a.precision, b.precision)
    check_precision(n)
    xa, ya, xb, yb = a.re_num, a.im_num, b.re_num, b.im_num
    # three-multiplication complex product
    k1 = xb * (xa + ya)
    k2 = xa * (yb - xb)
    k3 = ya * (xb + yb)
    re = k1 - k3
    im = k1 + k2
    shift = a.precision + b.precision - n
    # |a| <= |a~| + err(a), which accounts for the extra 2 err(a)err(b)
    prop = ZERO_BOUND
    if a.err.man:
        prop = prop + a.err * b.abs_upper()
    if b.err.man:
        prop = prop + b.err * a.abs_upper() + ErrorBound.make(3) * a.err * b.err
    if shift <= 0:
        return ApproxComplex(re << (-shift), im << (-shift), n, prop)
    x = _round_shift(re, shift)
    y = _round_shift(im, shift)
    if (x << shift) != re or (y << shift) != im:
        prop = prop + ErrorBound.pow2(-n)
    return ApproxComplex(x, y, n, prop)


def mul_int(a: ApproxComplex, k: int) -> ApproxComplex:
    """Exact multiplication by an integer."""
    return ApproxComplex(a.re_num * k, a.im_num * k, a.precision, a.err * ErrorBound.make(abs(int(k))))


def div(a: ApproxComplex, b: ApproxComplex, n: int | None = None) -> ApproxComplex:
    """Quotient a / b rounded to 2^-n Z[i].

    With |b~| - err(b) = m > 0 the error is at most
    (err(a) + |a/b| err(b)) / m + 2^-n.
    """
    if n is None:
        n = max(a.precision, b.precision)
    check_precision(n)
    if b.is_zero():
        raise ZeroDivisionError("division by an approximation of zero")
    xb, yb = b.re_num, b.im_num
    den = xb * xb + yb * yb
    # a / b = a * conj(b) / |b|^2 ; scale so the quotient lands at precision n + 2
    nre = a.re_num * xb + a.im_num * yb
    nim = a.im_num * xb - a.re_num * yb
    # value = 2^(-pa + pb) nre / den ; want integer at scale 2^(n+2)
    shift = n + 2 - a.precision + b.precision
    if shift >= 0:
        nre <<= shift
        nim <<= shift
        q_re, q_im = _div_round(nre, den), _div_round(nim, den)
    else:
        q_re, q_im = _div_round(nre, den << -shift), _div_round(nim, den << -shift)
    x = _round_shift(q_re, 2)
    y = _round_shift(q_im, 2)
    err = ErrorBound.pow2(-n)
    if a.err.man or b.err.man:
        blow = b.abs_lower() - b.err.as_fraction()
        if blow <= 0:
            raise ZeroDivisionError("divisor is not certified non-zero")
        qa = _abs_upper(q_re, q_im, n + 2) + ErrorBound.pow2(-n - 1)
        num = a.err + qa * b.err
        err = err + num * ErrorBound.from_fraction(1 / blow)
    return ApproxComplex(x, y, n, err)


def _div_round(num, den):
    q, r = divmod(num, den)
    if 2 * r >= den:
        q += 1
    return q


# ---------------------------------------------------------------------------
# Transcendental functions

_pi_cache: dict[int, gmpy2.mpfr] = {}
_pi_lock = threading.Lock()


def pi_mpfr(bits: int):
    """pi as an MPFR number with at least ``bits`` bits; cached per precision."""
    bits = max(64, (bits + 63) // 64 * 64)
    val = _pi_cache.get(bits)
    if val is None:
        with _pi_lock:
            val = _pi_cache.get(bits)
            if val is None:
                with gmpy2.context(precision=bits):
                    val = gmpy2.const_pi()
                _pi_cache[bits] = val
    return val


def pi_approx(n: int) -> ApproxComplex:
    """pi rounded to precision n (error <= 2^-n)."""
    check_precision(n)
    with gmpy2.context(precision=n + GUARD_BITS):
        v = gmpy2.mul_2exp(pi_mpfr(n + GUARD_BITS), n)
        x = mpz(gmpy2.rint(v))
    return ApproxComplex(x, mpz(0), n, ErrorBound.pow2(-n))


def exp_pi_i(z: ApproxComplex, n: int) -> ApproxComplex:
    """E(z) = exp(pi i z) to absolute precision n.

    The rounding error is at most 2^-n; the error of z is propagated through
    |E'(w)| <= pi |E(w)| on the disc of radius err(z).
    """
    check_precision(n)
    p = z.precision
    x = z.re_num
    # E has period 2 in the real direction: reduce x into [-1, 1) exactly
    if p >= 0:
        period = mpz(2) << p
        x = (x + (period >> 1)) % period - (period >> 1)
    y = z.im_num
    ymag = float(_big_float(y, p)) if y else 0.0
    growth = max(0, int(ymag * -4.6) + 2) if ymag < 0 else 0
    w = n + GUARD_BITS + growth + 8
    prec = w + max(0, int(y.bit_length()) - p) + 16
    with gmpy2.context(precision=max(prec, int(max(x.bit_length(), y.bit_length())) + 8)):
        pi = pi_mpfr(prec)
        xr = gmpy2.mul_2exp(gmpy2.mpfr(x), -p)
        yr = gmpy2.mul_2exp(gmpy2.mpfr(y), -p)
    with gmpy2.context(precision=prec):
        mod = gmpy2.exp(-pi * yr)
        ang = pi * xr
        s, c = gmpy2.sin_cos(ang)
        re = gmpy2.mul_2exp(mod * c, n)
        im = gmpy2.mul_2exp(mod * s, n)
        xr_out = mpz(gmpy2.rint(re))
        yr_out = mpz(gmpy2.rint(im))
    err = ErrorBound.pow2(-n)
    if z.err.man:
        mag = _abs_upper(xr_out, yr_out, n) + ErrorBound.pow2(-n)
        # pi * exp(pi * err) <= 4 for err <= 1/16
        if z.err > ErrorBound.pow2(-4):
            raise ValueError("input error too large for exp_pi_i")
        err = err + ErrorBound.make(4) * mag * z.err
    return ApproxComplex(xr_out, yr_out, n, err)


def sqrt_fraction(q, n: int) -> ApproxComplex:
    """Square root of a non-negative rational to precision n (real result)."""
    check_precision(n)
    q = Fraction(q)
    if q < 0:
        raise ValueError("square root of a negative number")
    # floor(2^n sqrt(q)) = isqrt(floor(4^n q))
    v = int(gmpy2.isqrt((q.numerator << (2 * n)) // q.denominator))
    return ApproxComplex(mpz(v), mpz(0), n, ErrorBound.pow2(-n))


def to_mpc(a: ApproxComplex, bits: int | None = None):
    """Convert to an MPC number (exact if ``bits`` is large enough)."""
    if bits is None:
        bits = max(64, int(max(abs(a.re_num), abs(a.im_num)).bit_length()) + 8)
    with gmpy2.context(precision=bits):
        re = gmpy2.mul_2exp(gmpy2.mpfr(a.re_num), -a.precision)
        im = gmpy2.mul_2exp(gmpy2.mpfr(a.im_num), -a.precision)
        return gmpy2.mpc(re, im)
