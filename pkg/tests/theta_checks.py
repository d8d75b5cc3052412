"""Size bounds for theta constants on B, checked numerically."""

import cmath
import math


def E(z):
    return cmath.exp(math.pi * 1j * z)


def theta_leading_term(j, z1, z2, z3):
    """Dominant part of theta_12 and theta_15: the four terms with n + c' = +-(1/2, -1/2), +-(1/2, 1/2)."""
    return 2 * (1 + (-1) ** j * E(z3)) * E((z1 + z2 - 2 * z3) / 4)


def h10_lower_exponent(Z) -> float:
    """Upper bound for -log2|h10(Z)| on B implied by the individual theta lower bounds."""
    z1, z2, z3 = Z.as_complex()
    y1, y2, y3 = z1.imag, z2.imag, z3.imag
    const = -2 * math.log2(0.59 ** 4 * 1.3 ** 4 * 1.05 * 1.12)
    return const + 2 * math.pi * math.log2(math.e) * (y1 + y2 - y3) + 2 * max(2, -math.log2(abs(z3)))


def theta_bound_violations(Z, thetas) -> list[str]:
    """Every bound that fails for the ten even theta values at Z (dict index -> complex)."""
    z1, z2, z3 = Z.as_complex()
    y1, y2, y3 = z1.imag, z2.imag, z3.imag
    t = thetas
    bad = []

    def check(ok, label):
        if not ok:
            bad.append(label)

    for j in (0, 1, 2, 3):
        check(abs(t[j] - 1) < 0.405, f"|theta{j} - 1| < 0.405")
        check(abs(t[j]) < 1.41, f"|theta{j}| < 1.41")
        check(abs(t[j]) > 0.59, f"|theta{j}| > 0.59")
    for j in (4, 6):
        check(abs(t[j] / (2 * E(z1 / 4)) - 1) < 0.348, f"theta{j} vs 2E(z1/4)")
    for j in (8, 9):
        check(abs(t[j] / (2 * E(z2 / 4)) - 1) < 0.348, f"theta{j} vs 2E(z2/4)")
    for j in (12, 15):
        lead = theta_leading_term(j, z1, z2, z3)
        check(abs(t[j] / lead - 1) < 0.438, f"theta{j} vs leading term")
    for j in (4, 6, 8, 9):
        check(abs(t[j]) < 1.37, f"|theta{j}| < 1.37")
    for j in (12, 15):
        check(abs(t[j]) < 1.56, f"|theta{j}| < 1.56")
    for j in (4, 6):
        check(abs(t[j]) > 1.3 * math.exp(-math.pi / 4 * y1), f"|theta{j}| lower")
    for j in (8, 9):
        check(abs(t[j]) > 1.3 * math.exp(-math.pi / 4 * y2), f"|theta{j}| lower")
    decay = math.exp(-math.pi / 4 * (y1 + y2 - 2 * y3))
    nu = min(0.25, abs(z3))
    check(abs(t[12]) > 1.05 * decay, "|theta12| lower")
    check(abs(t[15]) > 1.12 * decay * nu, "|theta15| lower")
    return bad
