"""Oracle comparisons runnable from the command line.

Each suite returns a SuiteResult; the report text depends only on the seed
and the parameters, so two runs with the same seed print the same bytes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from . import oracles
from .classpoly import mult_int_poly, poly_from_roots, schoolbook
from .period import symplectic_transform, is_symplectic_for
from .siegel import minima
from .theta import EVEN_INDICES, even_thetas, truncation_radius


@dataclass
class SuiteResult:
    name: str
    cases: int
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        extra = f" first failure: {self.failures[0]}" if self.failures else ""
        return f"suite {self.name}: {status} ({self.cases} cases, {len(self.failures)} failures){extra}"


def theta_suite(rng: random.Random, s: int = 60, points: int = 3) -> SuiteResult:
    """All even theta constants against a naive sum over a box four times wider at 4s bits."""
    fails = []
    R = truncation_radius(s)
    for k in range(points):
        Z = oracles.random_point_in_B(rng, 64)
        got = even_thetas(Z, s)
        for idx, v in zip(EVEN_INDICES, got):
            ref = oracles.theta_naive(idx, Z, 4 * R, 4 * s)
            d = oracles.approx_distance(v, ref, 4 * s)
            if d > -s:
                fails.append(f"point {k} characteristic {idx}: error 2^{d:.1f}")
    return SuiteResult("theta", points * len(EVEN_INDICES), fails)


def product_tree_suite(rng: random.Random, trials: int = 10, n: int = 20, u: int = 64) -> SuiteResult:
    """Product tree output against sequential expansion at four times the precision."""
    fails = []
    for k in range(trials):
        roots = oracles.random_roots(rng, n, 10.0, 2 * u + 200)
        s_bounds = [11] * n
        f = poly_from_roots(roots, s_bounds, u)
        ref = oracles.sequential_product(roots, 4 * f.p)
        d = oracles.max_coefficient_distance(f, ref, 4 * f.p)
        if d > -u:
            fails.append(f"trial {k}: error 2^{d:.1f}")
    return SuiteResult("product_tree", trials, fails)


def kronecker_suite(rng: random.Random, trials: int = 100) -> SuiteResult:
    fails = []
    for k in range(trials):
        g1 = [rng.randint(-2 ** 64, 2 ** 64) for _ in range(rng.randint(1, 65))]
        g2 = [rng.randint(-2 ** 64, 2 ** 64) for _ in range(rng.randint(1, 65))]
        if mult_int_poly(g1, g2) != schoolbook(g1, g2):
            fails.append(f"trial {k}")
    return SuiteResult("kronecker", trials, fails)


def gauss_suite(rng: random.Random, trials: int = 50) -> SuiteResult:
    """Minima of Gauss-reduced forms against brute-force enumeration."""
    fails = []
    for k in range(trials):
        U = oracles.random_unimodular(rng, 2, steps=6)
        d1, d2 = rng.randint(1, 40), rng.randint(1, 40)
        off = rng.randint(-20, 20)
        # positive definite form via a random basis change of a reduced one
        a, b, c = d1, off, off * off // d1 + d2 + 1
        y1 = a * U[0][0] ** 2 + 2 * b * U[0][0] * U[1][0] + c * U[1][0] ** 2
        y2 = a * U[0][1] ** 2 + 2 * b * U[0][1] * U[1][1] + c * U[1][1] ** 2
        y3 = a * U[0][0] * U[0][1] + b * (U[0][0] * U[1][1] + U[1][0] * U[0][1]) + c * U[1][0] * U[1][1]
        got = minima(tuple(Fraction(v) for v in (y1, y2, y3)))
        ref = oracles.brute_force_minima(y1, y2, y3)
        if tuple(got) != tuple(ref):
            fails.append(f"trial {k}: got {got}, expected {ref}")
    return SuiteResult("gauss", trials, fails)


def symplectic_suite(rng: random.Random, trials: int = 100) -> SuiteResult:
    fails = []
    for k in range(trials):
        A = oracles.random_polarization_form(rng)
        M = symplectic_transform(A)
        if not is_symplectic_for(M, A):
            fails.append(f"trial {k}")
    return SuiteResult("symplectic", trials, fails)


SUITES = {
    "theta": theta_suite,
    "product_tree": product_tree_suite,
    "kronecker": kronecker_suite,
    "gauss": gauss_suite,
    "symplectic": symplectic_suite,
}


def run_suites(names=None, seed: int = 0, s: int = 60) -> list[SuiteResult]:
    out = []
    for name in names or list(SUITES):
        rng = random.Random(f"{seed}:{name}")
        if name == "theta":
            out.append(theta_suite(rng, s=s))
        else:
            out.append(SUITES[name](rng))
    return out
