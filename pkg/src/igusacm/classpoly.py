"""Igusa class polynomials: denominator bound, precision budget, polynomial
reconstruction from approximate roots and rational rounding, plus the
driver that runs the whole computation for one CM field."""

from __future__ import annotations

import logging
import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
from gmpy2 import mpz

from .approx import ApproxComplex, ErrorBound, check_precision, round_to
from .cm_enumerate import PPAVTriple, enumerate_ppav
from .cmfield import CMFieldSpec, ResourceError, galois_type, get_field
from .period import PrecisionRetry, period_matrix, polarization_matrix, symplectic_transform
from .siegel import ReductionPrecisionError, in_F2, mat_mul, minima, reduce_to_F2, transpose
from .theta import (
    PrecisionTooLowError,
    even_theta_squares,
    even_thetas,
    igusa_invariants,
    igusa_invariants_from_squares,
    invariant_error_envelope,
    u_bound,
)

log = logging.getLogger(__name__)

SIEVE_LIMIT = 50_000_000


def decimal(n: int) -> str:
    """Decimal string of an integer of any size."""
    return mpz(n).digits(10)


class RoundingAmbiguityError(ArithmeticError):
    """A coefficient cannot be rounded unambiguously at the available precision."""


# ---------------------------------------------------------------------------
# Denominator bound


@dataclass(frozen=True)
class DenominatorBound:
    D: int
    c1: int
    c2: int
    h_prime: int
    prime_bound: int  # every prime factor p of D satisfies p <= prime_bound

    @property
    def log2(self) -> float:
        return _log2_int(self.D)


def _log2_int(n: int) -> float:
    k = max(n.bit_length() - 60, 0)
    return math.log2(n >> k) + k


def sieve_primes(limit: int) -> list[int]:
    """Primes p <= limit by the sieve of Eratosthenes."""
    if limit < 2:
        return []
    flags = bytearray([1]) * (limit + 1)
    flags[0] = flags[1] = 0
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = bytes(len(range(p * p, limit + 1, p)))
    return [i for i in range(limit + 1) if flags[i]]


def product_tree(values) -> int:
    """Product of integers via a balanced binary tree."""
    vals = [mpz(v) for v in values] or [mpz(1)]
    while len(vals) > 1:
        nxt = [vals[i] * vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return int(vals[0])


def prime_bound(Delta: int) -> int:
    """Largest integer strictly below 2^8 pi^-2 Delta."""
    ctx = gmpy2.context(precision=64 + 2 * Delta.bit_length())
    v = ctx.div(ctx.mul(gmpy2.mpfr(256), gmpy2.mpfr(Delta)), ctx.square(ctx.const_pi()))
    b = int(ctx.floor(v))
    return b - 1 if b == v else b


def max_power_le(p: int, n: int) -> int:
    """floor(log n / log p) computed exactly: the largest k with p^k <= n."""
    k, q = 0, p
    while q <= n:
        k += 1
        q *= p
    return k


def denominator_D(Delta: int, h_prime: int, c1: int = 16, c2: int = 16) -> DenominatorBound:
    """D = (prod_{p < 2^8 pi^-2 Delta} p^(c1 + c2 floor(log Delta / log p)))^h'."""
    if Delta < 1 or h_prime < 1 or c1 < 1 or c2 < 1:
        raise ValueError("Delta, h', c1 and c2 must be positive")
    B = prime_bound(Delta)
    if B > SIEVE_LIMIT:
        raise ResourceError(f"prime bound {B} exceeds the sieve limit {SIEVE_LIMIT}")
    powers = [p ** ((c1 + c2 * max_power_le(p, Delta)) * h_prime) for p in sieve_primes(B)]
    return DenominatorBound(product_tree(powers), c1, c2, h_prime, B)


# ---------------------------------------------------------------------------
# Precision budget


def ceil_log2(x) -> int:
    """ceil(log2 x) for a positive integer or Fraction, exactly."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("log of a non-positive number")
    k = x.numerator.bit_length() - x.denominator.bit_length()
    while Fraction(2) ** k < x:
        k += 1
    while Fraction(2) ** (k - 1) >= x:
        k -= 1
    return k


def precision_budget(u_list, D: int, h_prime: int) -> tuple[int, list[int]]:
    """p = ceil(log2 D + 3 log2 h' + 4) + sum(2 u_j + 40) and r_j = 101 + 7 u_j + p."""
    base = ceil_log2(D * h_prime ** 3 * 16)
    p = base + sum(2 * u + 40 for u in u_list)
    return p, [101 + 7 * u + p for u in u_list]


# ---------------------------------------------------------------------------
# Integer and approximate polynomials (coefficient lists in ascending order)


def _ceil_log2_abs(g) -> int:
    m = max((abs(int(c)) for c in g), default=0)
    return ceil_log2(m) if m > 0 else 0


def kronecker_slot(g1, g2) -> int:
    """Bits per coefficient for the Kronecker substitution.

    The product's coefficients are bounded by |g1|inf |g2|inf (deg g1 + 1) <= 2^k
    with k = ceil log2 |g1|inf + ceil log2 |g2|inf + ceil log2 (deg g1 + 1);
    one more bit covers equality and one the sign.
    """
    return _ceil_log2_abs(g1) + _ceil_log2_abs(g2) + ceil_log2(len(g1)) + 2


def _pack(g, k: int) -> int:
    v = mpz(0)
    for c in reversed(g):
        v = (v << k) + c
    return v


def _unpack(v, k: int, n: int) -> list[int]:
    out = []
    half = mpz(1) << (k - 1)
    mask = (mpz(1) << k) - 1
    for _ in range(n):
        c = v & mask
        if c >= half:
            c -= mpz(1) << k
        out.append(int(c))
        v = (v - c) >> k
    if v != 0:
        raise ArithmeticError("Kronecker unpacking left a remainder")
    return out


def mult_int_poly(g1, g2) -> list[int]:
    """Exact product of integer polynomials by evaluation at 2^k."""
    if not g1 or not g2:
        return []
    k = kronecker_slot(g1, g2)
    v = _pack(g1, k) * _pack(g2, k)
    return _unpack(v, k, len(g1) + len(g2) - 1)


def schoolbook(g1, g2) -> list[int]:
    if not g1 or not g2:
        return []
    out = [0] * (len(g1) + len(g2) - 1)
    for i, a in enumerate(g1):
        if a:
            for j, b in enumerate(g2):
                out[i + j] += a * b
    return out


@dataclass(frozen=True)
class ApproxPolynomial:
    """2^-p (a + i b) with |f - this|inf <= err; coefficients ascending."""

    a: tuple
    b: tuple
    p: int
    err: ErrorBound

    @property
    def degree(self) -> int:
        return len(self.a) - 1

    @staticmethod
    def from_roots_leaf(z: ApproxComplex, p: int) -> ApproxPolynomial:
        """X - z at precision p."""
        r = round_to(z, p)
        return ApproxPolynomial((-int(r.re_num), 1 << p), (-int(r.im_num), 0), p, r.err)

    @staticmethod
    def constant(z: ApproxComplex, p: int) -> ApproxPolynomial:
        r = round_to(z, p)
        return ApproxPolynomial((int(r.re_num),), (int(r.im_num),), p, r.err)

    @staticmethod
    def one(p: int) -> ApproxPolynomial:
        return ApproxPolynomial((1 << p,), (0,), p, ErrorBound.make(0))

    def coefficient(self, k: int) -> ApproxComplex:
        return ApproxComplex(mpz(self.a[k]), mpz(self.b[k]), self.p, self.err)

    def coefficients(self) -> list[ApproxComplex]:
        return [self.coefficient(k) for k in range(len(self.a))]

    def norm1_upper(self) -> ErrorBound:
        """Upper bound for |f|_1 of the exact polynomial."""
        tot = mpz(0)
        for x, y in zip(self.a, self.b):
            tot += gmpy2.isqrt(mpz(x) * x + mpz(y) * y) + 1
        return ErrorBound.make(int(tot), -self.p) + self.err * ErrorBound.make(len(self.a))

    def complex_coefficients(self) -> list[complex]:
        return [complex(c) for c in self.coefficients()]


def _round_poly(g, shift: int) -> list[int]:
    if shift <= 0:
        return [c << -shift for c in g]
    half = 1 << (shift - 1)
    return [((c + half) >> shift) if c >= 0 else -((-c + half) >> shift) for c in g]


def mult_approx_poly(g1: ApproxPolynomial, g2: ApproxPolynomial, p: int | None = None) -> ApproxPolynomial:
    """Product at absolute precision p with the error bound

    |g1|_1 e2 + |g2|_1 e1 + (deg g1 + 1) e1 e2 + 2^-p.
    """
    if p is None:
        p = max(g1.p, g2.p)
    check_precision(p)
    a1, b1, a2, b2 = list(g1.a), list(g1.b), list(g2.a), list(g2.b)
    re = [x - y for x, y in zip(mult_int_poly(a1, a2), mult_int_poly(b1, b2))]
    im = [x + y for x, y in zip(mult_int_poly(a1, b2), mult_int_poly(b1, a2))]
    shift = g1.p + g2.p - p
    ra, rb = _round_poly(re, shift), _round_poly(im, shift)
    exact = shift <= 0 or all(c % (1 << shift) == 0 for c in re + im)
    err = ErrorBound.make(0) if exact else ErrorBound.pow2(-p)
    if g2.err.man:
        err = err + g1.norm1_upper() * g2.err
    if g1.err.man:
        err = err + g2.norm1_upper() * g1.err
    if g1.err.man and g2.err.man:
        err = err + ErrorBound.make(len(g1.a)) * g1.err * g2.err
    return ApproxPolynomial(tuple(ra), tuple(rb), p, err)


def add_approx_poly(g1: ApproxPolynomial, g2: ApproxPolynomial) -> ApproxPolynomial:
    if g1.p != g2.p:
        raise ValueError("precisions differ")
    n = max(len(g1.a), len(g2.a))
    pad = lambda t: list(t) + [0] * (n - len(t))  # noqa: E731
    a = [x + y for x, y in zip(pad(g1.a), pad(g2.a))]
    b = [x + y for x, y in zip(pad(g1.b), pad(g2.b))]
    return ApproxPolynomial(tuple(a), tuple(b), g1.p, g1.err + g2.err)


def _log2_bound(s) -> float:
    s = Fraction(s)
    return math.log2(s.numerator) - math.log2(s.denominator)


def tree_precision(u: int, s_bounds, n: int) -> int:
    """u + sum log2 s_j + 3 log2 n + 3, rounded up."""
    prod = Fraction(1)
    for s in s_bounds:
        prod *= Fraction(s)
    return u + ceil_log2(prod * Fraction(n) ** 3 * 8)


def required_root_error(u: int, s_bounds, i: int) -> Fraction:
    """2^(-u - sum_{j != i} log2 s_j - 3 log2 n - 3) as an exact rational lower bound."""
    n = len(s_bounds)
    prod = Fraction(1)
    for j, s in enumerate(s_bounds):
        if j != i:
            prod *= Fraction(s)
    return Fraction(1, 2 ** u) / (prod * Fraction(n) ** 3 * 8)


def certified_size_bound(z: ApproxComplex) -> int:
    """A power of two s with |z| + 1 <= s, valid for the exact value behind z."""
    up = z.abs_upper().as_fraction() + z.err.as_fraction() + 1
    return 1 << ceil_log2(up)


def poly_from_roots(roots, s_bounds, u: int) -> ApproxPolynomial:
    """Approximation of prod (X - z_i) with error at most 2^-u, via a balanced product tree."""
    n = len(roots)
    if n == 0:
        raise ValueError("no roots")
    if len(s_bounds) != n:
        raise ValueError("one size bound per root is needed")
    for i, (z, s) in enumerate(zip(roots, s_bounds)):
        if z.abs_upper().as_fraction() + z.err.as_fraction() + 1 > Fraction(s):
            raise ValueError(f"size bound s_{i} = {s} is smaller than |z_{i}| + 1")
        need = required_root_error(u, s_bounds, i)
        if z.err.as_fraction() > need:
            raise PrecisionTooLowError(
                f"root {i} has error 2^{z.err.log2():.1f}, needs at most 2^{math.log2(need):.1f}")
    p = tree_precision(u, s_bounds, n)
    check_precision(p)
    level = [ApproxPolynomial.from_roots_leaf(z, p) for z in roots]
    depth = (n - 1).bit_length()
    level += [ApproxPolynomial.one(p)] * ((1 << depth) - n)
    while len(level) > 1:
        level = [mult_approx_poly(level[i], level[i + 1], p) for i in range(0, len(level), 2)]
    out = level[0]
    if out.err > ErrorBound.pow2(-u):
        raise PrecisionTooLowError(f"product tree error 2^{out.err.log2():.1f} exceeds 2^-{u}")
    return out


def poly_sequential(roots, p: int) -> ApproxPolynomial:
    """Left-to-right product of the linear factors at precision p (no error requirements)."""
    out = ApproxPolynomial.one(p)
    for z in roots:
        out = mult_approx_poly(out, ApproxPolynomial.from_roots_leaf(z, p), p)
    return out


# ---------------------------------------------------------------------------
# Rational reconstruction


@dataclass(frozen=True)
class RationalPolynomial:
    """sum_k coeffs[k] X^k / denom with gcd(coeffs, denom) = 1."""

    coeffs: tuple[int, ...]
    denom: int

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def fractions(self) -> list[Fraction]:
        return [Fraction(c, self.denom) for c in self.coeffs]

    def is_monic(self) -> bool:
        return self.coeffs[-1] == self.denom

    def __call__(self, x):
        acc = Fraction(0) if isinstance(x, (int, Fraction)) else 0
        for c in reversed(self.fractions()):
            acc = acc * x + c
        return acc

    def text_block(self, name: str) -> str:
        return (f"poly {name} degree={self.degree} denom={decimal(self.denom)}\n"
                f"coeffs_ascending: {' '.join(decimal(c) for c in self.coeffs)}\n")

    @staticmethod
    def from_fractions(fr) -> RationalPolynomial:
        fr = [Fraction(x) for x in fr]
        den = 1
        for x in fr:
            den = den * x.denominator // math.gcd(den, x.denominator)
        return RationalPolynomial(tuple(int(x * den) for x in fr), den)


def round_to_rational(f: ApproxPolynomial, D: int) -> RationalPolynomial:
    """Recover H with D H in Z[X] from f~ with error below 1/(2D)."""
    eps = f.err.as_fraction()
    if eps >= Fraction(1, 2 * D):
        raise RoundingAmbiguityError(f"error 2^{f.err.log2():.1f} is not below 1/(2D)")
    nums = []
    scale = 1 << f.p
    for x, y in zip(f.a, f.b):
        im = Fraction(abs(y), scale)
        if im > 2 * eps:
            raise RoundingAmbiguityError("coefficient has a significant imaginary part")
        v = Fraction(x * D, scale)
        n = math.floor(v + Fraction(1, 2))
        if abs(abs(v - n) - Fraction(1, 2)) <= 2 * D * eps:
            raise RoundingAmbiguityError("coefficient is too close to a rounding boundary")
        nums.append(n)
    g = D
    for n in nums:
        g = math.gcd(g, n)
    return RationalPolynomial(tuple(n // g for n in nums), D // g)


# ---------------------------------------------------------------------------
# Interpolation polynomials


def interpolation_polys(i1_roots, values, u: int) -> ApproxPolynomial:
    """sum_C value(C) prod_{C' != C} (X - i1(C')) with error at most 2^-u.

    Each summand is a product tree followed by a multiplication with the
    constant value(C); the summands are added pairwise.
    """
    n = len(i1_roots)
    if n != len(values):
        raise ValueError("one value per root is needed")
    k = ceil_log2(n) if n > 1 else 0
    u_term = u + k + 1
    summands = []
    for idx in range(n):
        others = [z for j, z in enumerate(i1_roots) if j != idx]
        c = values[idx]
        sc = certified_size_bound(c)
        if others:
            s_o = [certified_size_bound(z) for z in others]
            norm_bound = 1
            for s in s_o:
                norm_bound *= s
            # e(prod) sc + |prod|_1 e(c) + e(prod) e(c) + 2^-p  <=  2^-u_term
            g = poly_from_roots(others, s_o, u_term + ceil_log2(sc) + 2)
            if c.err.as_fraction() * norm_bound > Fraction(1, 2 ** (u_term + 2)):
                raise PrecisionTooLowError("interpolation value not precise enough")
        else:
            g = ApproxPolynomial.one(u_term + 2)
        p = max(g.p, u_term + 3)
        cpoly = ApproxPolynomial.constant(c, p)
        g = ApproxPolynomial(tuple(x << (p - g.p) for x in g.a), tuple(x << (p - g.p) for x in g.b), p, g.err)
        summands.append(mult_approx_poly(g, cpoly, p))
    p = max(s.p for s in summands)
    summands = [ApproxPolynomial(tuple(x << (p - s.p) for x in s.a), tuple(x << (p - s.p) for x in s.b), p, s.err)
                for s in summands]
    while len(summands) > 1:
        nxt = [add_approx_poly(summands[i], summands[i + 1]) for i in range(0, len(summands) - 1, 2)]
        if len(summands) % 2:
            nxt.append(summands[-1])
        summands = nxt
    out = summands[0]
    if out.err > ErrorBound.pow2(-u):
        raise PrecisionTooLowError(f"interpolation error 2^{out.err.log2():.1f} exceeds 2^-{u}")
    return out


# ---------------------------------------------------------------------------
# Driver


@dataclass
class RunConfig:
    c1: int = 16
    c2: int = 16
    hhat: bool = False
    class_bound: int = 5000
    theta_route: str = "duplication"   # or "direct"
    threads: int | None = None


@dataclass
class ClassPolynomialSet:
    H: dict[int, RationalPolynomial]
    Hhat: dict[int, RationalPolynomial]
    audit: dict = field(default_factory=dict)

    def text(self) -> str:
        out = [self.H[n].text_block(f"H{n}") for n in (1, 2, 3)]
        out += [self.Hhat[n].text_block(f"Hhat{n}") for n in sorted(self.Hhat)]
        return "".join(out)


@dataclass
class _Reduced:
    triple: PPAVTriple
    M: list
    u: int
    m2: float


def _workers(cfg: RunConfig) -> int:
    if cfg.threads:
        return cfg.threads
    try:
        return max(1, int(os.environ.get("IGUSACM_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def m2_bound(delta0: int, delta1: int) -> float:
    """max{(sqrt 6 / 2 pi) delta0^(3/2), (2/9) delta1^(1/2) delta0^(1/2)}."""
    return max(math.sqrt(6) / (2 * math.pi) * delta0 ** 1.5, 2 / 9 * math.sqrt(delta1 * delta0))


def reduced_period_data(t: PPAVTriple, n: int = 128) -> _Reduced:
    """Symplectic basis, reduction into F2 and the bound u for one triple."""
    A = polarization_matrix(t)
    M = symplectic_transform(A)
    for bits in (n, 2 * n, 4 * n, 8 * n):
        try:
            Z0 = period_matrix(t, M, bits)
            red = reduce_to_F2(Z0)
        except (PrecisionRetry, ReductionPrecisionError):
            continue
        M2 = [list(r) for r in mat_mul(M, transpose(red.M))]
        Z = period_matrix(t, M2, bits)
        if in_F2(Z, bits - 16):
            y = Z.imag_parts()
            m2 = float(minima(y)[1])
            return _Reduced(t, M2, u_bound(Z), m2)
    raise ReductionPrecisionError("could not reduce the period matrix into F2")


def igusa_class_polynomials(spec: CMFieldSpec, config: RunConfig | None = None,
                            audit: dict | None = None) -> ClassPolynomialSet:
    """H_{K,1..3} (and optionally the interpolation versions) for a primitive quartic CM field.

    If ``audit`` is given it is filled in place, so budget values survive a
    failure in a later stage.
    """
    cfg = config or RunConfig()
    spec.validate()
    fld = get_field(spec)
    timings: dict[str, float] = {}
    if audit is None:
        audit = {}
    audit.update(delta0=spec.delta0, a=spec.a, b=spec.b, timings=timings)
    clock = time.perf_counter()

    def lap(name):
        nonlocal clock
        now = time.perf_counter()
        timings[name] = round(now - clock, 4)
        clock = now

    Delta = fld.disc
    audit.update(delta=Delta, delta1=fld.delta1, galois_type=galois_type(spec), c1=cfg.c1, c2=cfg.c2)
    ramified = [q for q in (2, 3) if Delta % q == 0]
    if ramified:
        msg = f"{' and '.join(map(str, ramified))} ramif{'y' if len(ramified) > 1 else 'ies'} in K; the denominator bound is not proven"
        warnings.warn(msg, stacklevel=2)
        audit["warnings"] = [msg]
    lap("maximal_order")

    triples = enumerate_ppav(spec, class_bound=cfg.class_bound)
    cg = fld.class_group(cfg.class_bound)
    h_prime = len(triples)
    audit.update(h=cg.h, h0=cg.h0, h1=cg.h1, h_prime=h_prime)
    lap("enumerate")

    Dbound = denominator_D(Delta, h_prime, cfg.c1, cfg.c2)
    D = Dbound.D
    audit["D"] = decimal(D)
    audit["log2_D"] = round(Dbound.log2, 3)
    lap("denominator")

    workers = _workers(cfg)
    reduced = _map(reduced_period_data, triples, workers)
    bound = m2_bound(spec.delta0, fld.delta1)
    for r in reduced:
        if r.m2 > bound:
            raise AssertionError(f"m2(Im Z) = {r.m2} exceeds the bound {bound}")
    u_list = [r.u for r in reduced]
    audit["u"] = u_list
    audit["m2"] = [round(r.m2, 6) for r in reduced]
    lap("period_matrices")

    p, r_list = precision_budget(u_list, D, h_prime)
    audit["p"], audit["r"] = p, r_list
    audit["retries"] = 0
    check_precision(max(r_list) + 64)
    for attempt in range(2):
        try:
            return _finish(cfg, spec, reduced, D, h_prime, p, r_list, audit, workers, lap)
        except (PrecisionTooLowError, RoundingAmbiguityError, PrecisionRetry) as exc:
            if attempt == 1:
                raise
            log.warning("retrying with doubled precision: %s", exc)
            audit["retries"] = 1
            p = 2 * p
            r_list = [101 + 7 * u + p for u in u_list]
            audit["p_retry"], audit["r_retry"] = p, r_list
    raise AssertionError("unreachable")


def _invariants_for(args):
    red, r, cfg = args
    Z = period_matrix(red.triple, red.M, r + 64)
    if cfg.theta_route == "direct":
        inv = igusa_invariants(even_thetas(Z, r), red.u, r)
    else:
        inv = igusa_invariants_from_squares(even_theta_squares(Z, r), red.u, r)
    return inv


def _finish(cfg, spec, reduced, D, h_prime, p, r_list, audit, workers, lap):
    invs = _map(_invariants_for, [(red, r, cfg) for red, r in zip(reduced, r_list)], workers)
    envelope_ok, size_ok = [], []
    for inv, red, r in zip(invs, reduced, r_list):
        envelope_ok.append(inv.max_error() <= invariant_error_envelope(red.u, r))
        # the a priori bound rests on |h10| > 2^-u, which can fail for large Im Z;
        # the rounding below is certified by the tracked errors either way
        size_ok.append(all(x.abs_upper().log2() <= 6 * red.u + 77 for x in inv.as_tuple()))
    if not all(size_ok):
        log.warning("an invariant exceeds 2^(6u+77); relying on tracked errors")
    audit["invariant_error_within_envelope"] = all(envelope_ok)
    audit["invariant_within_size_bound"] = all(size_ok)
    lap("theta_and_invariants")

    u_poly = ceil_log2(D) + 2
    H = {}
    s_record = {}
    for n in (1, 2, 3):
        roots = [round_to(inv.as_tuple()[n - 1], p) for inv in invs]
        s = [certified_size_bound(z) for z in roots]
        s_record[n] = [x.bit_length() - 1 for x in s]
        f = poly_from_roots(roots, s, u_poly)
        H[n] = round_to_rational(f, D)
        if not H[n].is_monic() or H[n].degree != h_prime:
            raise AssertionError(f"H{n} is not monic of degree h'")
    audit["log2_s"] = s_record
    lap("class_polynomials")

    Hhat = {}
    if cfg.hhat:
        D_hat = D * math.factorial(h_prime)
        audit["D_hat"] = decimal(D_hat)
        u_hat = ceil_log2(D_hat) + 2
        i1 = [inv.i1 for inv in invs]
        for n in (2, 3):
            vals = [inv.as_tuple()[n - 1] for inv in invs]
            Hhat[n] = round_to_rational(interpolation_polys(i1, vals, u_hat), D_hat)
        lap("interpolation")
    return ClassPolynomialSet(H, Hhat, audit)
