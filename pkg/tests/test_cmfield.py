import math
import random
from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from igusacm.cmfield import (
    CMFieldSpec,
    FieldElement,
    InvalidFieldError,
    class_number_k0,
    conj_ideal,
    different,
    embeddings,
    fundamental_unit,
    fundamental_unit_k0,
    galois_type,
    get_field,
    ideal_inverse,
    ideal_mul,
    ideal_norm,
    is_principal,
    maximal_order,
)
from nf_oracle import QuarticField, real_fundamental_unit

ZETA5 = CMFieldSpec(5, 10, 2)
FIELDS = [ZETA5, CMFieldSpec(8, 4, 1), CMFieldSpec(5, 4, 1), CMFieldSpec(17, 5, 1), CMFieldSpec(8, 13, 3)]


def _rand_element(fld, rng, size=5):
    return fld.from_order_coords([rng.randint(-size, size) for _ in range(4)])


def _poly_disc(spec):
    x = sympy.Symbol("x")
    return int(sympy.discriminant(x ** 4 + 2 * spec.a * x ** 2 + spec.d, x))


# -- specification and validation ------------------------------------------


def test_rejects_non_primitive():
    with pytest.raises(InvalidFieldError, match="non-primitive"):
        CMFieldSpec(5, 3, 1).validate()


def test_rejects_not_totally_negative():
    with pytest.raises(InvalidFieldError, match="totally negative"):
        CMFieldSpec(8, 2, 1).validate()


@pytest.mark.parametrize("delta0", [9, 20, 7, 1])
def test_rejects_non_fundamental_delta0(delta0):
    with pytest.raises(InvalidFieldError):
        CMFieldSpec(delta0, 10, 1).validate()


def test_minimal_polynomial_relation():
    for spec in FIELDS:
        al = FieldElement.alpha(spec)
        assert al ** 4 + al * al * (2 * spec.a) + spec.d == FieldElement.from_int(spec, 0)


# -- maximal order -------------------------------------------------------------


def test_zeta5_discriminant():
    assert maximal_order(ZETA5).discriminant == 125
    oracle = QuarticField(5, 10, 2)
    assert oracle.disc == 125
    ratio = Fraction(_poly_disc(ZETA5), 125)
    assert ratio.denominator == 1 and math.isqrt(ratio.numerator) ** 2 == ratio.numerator


@pytest.mark.parametrize("spec", FIELDS, ids=str)
def test_maximal_order_matches_oracle(spec):
    fld = get_field(spec)
    oracle = QuarticField(spec.delta0, spec.a, spec.b)
    assert fld.disc == oracle.disc
    # both bases span the same lattice in the power basis
    for w in oracle.order:
        assert fld.is_in_order(FieldElement(spec, w))
    # index^2 relation with the polynomial discriminant
    ratio = Fraction(_poly_disc(spec), fld.disc)
    assert ratio.denominator == 1 and math.isqrt(ratio.numerator) ** 2 == ratio.numerator


@pytest.mark.parametrize("spec", FIELDS, ids=str)
def test_integral_basis_ring_closure(spec):
    fld = get_field(spec)
    W = fld.basis_elements
    for x in W:
        for y in W:
            assert fld.is_in_order(x * y)
    T = sympy.Matrix(4, 4, lambda i, j: sympy.Rational((W[i] * W[j]).trace()))
    assert T.det() == fld.disc


@pytest.mark.parametrize("spec", FIELDS, ids=str)
def test_discriminant_factorization(spec):
    fld = get_field(spec)
    assert fld.disc % spec.delta0 ** 2 == 0
    assert fld.delta1 * spec.delta0 ** 2 == fld.disc


# -- Galois type -----------------------------------------------------------


def _has_mixed_splitting(spec, primes=200):
    """True when some unramified prime splits as 1+1+2 (impossible for a cyclic quartic)."""
    x = sympy.Symbol("x")
    f = x ** 4 + 2 * spec.a * x ** 2 + spec.d
    disc = _poly_disc(spec)
    for p in sympy.primerange(3, primes * 10):
        if disc % p == 0:
            continue
        degs = sorted(sympy.degree(g, x) for g, k in sympy.factor_list(f, modulus=p)[1] for _ in range(k))
        if len(set(degs)) > 1:
            return True
    return False


@pytest.mark.parametrize("spec, expected", [
    (ZETA5, "cyclic"),
    (CMFieldSpec(8, 4, 1), "cyclic"),
    (CMFieldSpec(5, 13, 3), "non_galois"),
    (CMFieldSpec(5, 4, 1), "non_galois"),
], ids=str)
def test_galois_type(spec, expected):
    assert galois_type(spec) == expected
    assert _has_mixed_splitting(spec) == (expected == "non_galois")


# -- ideals --------------------------------------------------------------------


def _index_oracle(I):
    """[O_K : I] for an integral ideal from the determinant of its basis coordinates."""
    fld = I.field
    M = sympy.Matrix([[sympy.Rational(c) for c in fld.order_coords(b)] for b in I.basis()])
    return abs(M.det())


@given(st.integers(0, 10 ** 6))
def test_norm_multiplicative(seed):
    rng = random.Random(seed)
    fld = get_field(rng.choice(FIELDS))
    A = fld.ideal([_rand_element(fld, rng), _rand_element(fld, rng)])
    B = fld.ideal([_rand_element(fld, rng)]) if rng.random() < 0.5 else fld.ideal([_rand_element(fld, rng), rng.randint(2, 9)])
    if A.norm() == 0 or B.norm() == 0:
        return
    AB = ideal_mul(A, B)
    assert ideal_norm(AB) == ideal_norm(A) * ideal_norm(B)
    assert _index_oracle(AB) == ideal_norm(A) * ideal_norm(B)


@given(st.integers(0, 10 ** 6))
def test_ideal_identities(seed):
    rng = random.Random(seed)
    fld = get_field(rng.choice(FIELDS))
    gens = [_rand_element(fld, rng), rng.randint(1, 12)]
    if gens[0].is_zero():
        return
    A = fld.ideal(gens)
    O = fld.unit_ideal()
    assert A * O == A
    assert ideal_mul(A, ideal_inverse(A)) == O
    assert conj_ideal(conj_ideal(A)) == A
    for g in gens:
        assert A.contains(g if isinstance(g, FieldElement) else FieldElement.from_int(fld.spec, g))


def test_zero_ideal_rejected():
    fld = get_field(ZETA5)
    with pytest.raises(ValueError):
        fld.ideal([FieldElement.from_int(ZETA5, 0)])


@given(st.integers(0, 10 ** 6))
def test_element_conj_involution(seed):
    rng = random.Random(seed)
    spec = rng.choice(FIELDS)
    x = FieldElement(spec, [Fraction(rng.randint(-20, 20), rng.randint(1, 5)) for _ in range(4)])
    assert x.conj().conj() == x
    assert (x * x.conj()).in_real_subfield()


# -- different -----------------------------------------------------------------


@pytest.mark.parametrize("spec", FIELDS, ids=str)
def test_different_norm_and_dual(spec):
    fld = get_field(spec)
    D = different(spec)
    assert D.norm() == fld.disc
    assert conj_ideal(D) == D
    # trace dual of O_K by brute force: the dual basis of the trace matrix
    W = fld.basis_elements
    T = sympy.Matrix(4, 4, lambda i, j: sympy.Rational((W[i] * W[j]).trace()))
    Ti = T.inv()
    dual = []
    for i in range(4):
        e = FieldElement(spec, (0, 0, 0, 0))
        for j in range(4):
            e = e + W[j] * Fraction(int(Ti[j, i].p), int(Ti[j, i].q))
        dual.append(e)
    inv = ideal_inverse(D)
    for e in dual:
        assert inv.contains(e)
    assert fld.module(dual) == inv


# -- units ---------------------------------------------------------------------


def test_fundamental_units():
    u, v, n = fundamental_unit_k0(5)
    assert (u, v, n) == (Fraction(1, 2), Fraction(1, 2), -1)
    u, v, n = fundamental_unit_k0(8)
    assert (u, v) == (1, Fraction(1, 2))  # 1 + sqrt(8)/2 = 1 + sqrt(2)
    for D0 in (5, 8, 12, 13, 17, 21, 24, 29, 33, 37, 41, 61, 89, 97):
        u, v, n = fundamental_unit_k0(D0)
        assert u * u - v * v * D0 == n and abs(n) == 1
        assert float(u) + float(v) * math.sqrt(D0) == pytest.approx(real_fundamental_unit(D0), rel=1e-12)


@pytest.mark.parametrize("spec", FIELDS, ids=str)
def test_unit_data(spec):
    ud = fundamental_unit(spec)
    assert ud.epsilon0.in_real_subfield()
    u, v = ud.epsilon0.real_parts()[1]
    assert u * u - v * v * spec.delta0 == ud.norm_sign and abs(ud.norm_sign) == 1
    assert ud.real_value() == pytest.approx(real_fundamental_unit(spec.delta0), rel=1e-12)
    assert ud.mu_order == (10 if spec == ZETA5 else 2)
    for z in ud.roots_of_unity:
        assert z ** ud.mu_order == FieldElement.from_int(spec, 1)


def test_class_number_k0():
    # small real quadratic fields with known class numbers
    known = {5: 1, 8: 1, 12: 1, 13: 1, 17: 1, 40: 2, 60: 2, 65: 2, 85: 2, 229: 3, 145: 4}
    for D0, h in known.items():
        assert class_number_k0(D0) == h


# -- class group and principality ------------------------------------------------


def test_zeta5_class_group():
    cg = get_field(ZETA5).class_group()
    assert (cg.h, cg.h0, cg.h1) == (1, 1, 1)


@pytest.mark.parametrize("spec", FIELDS + [CMFieldSpec(5, 5, 1), CMFieldSpec(8, 13, 1)], ids=str)
def test_class_group_against_oracle(spec):
    fld = get_field(spec)
    cg = fld.class_group()
    assert cg.h == QuarticField(spec.delta0, spec.a, spec.b).class_number()
    assert cg.h % cg.h0 == 0 and cg.h == cg.h0 * cg.h1
    for R in cg.representatives:
        assert R.is_integral() and R.norm() <= cg.minkowski_bound
    prod = 1
    for d in cg.group_structure:
        prod *= d
    assert prod == cg.h


@given(st.integers(0, 10 ** 6))
def test_principal_generator_recovered(seed):
    rng = random.Random(seed)
    fld = get_field(rng.choice(FIELDS))
    g = _rand_element(fld, rng, 4)
    if g.is_zero():
        return
    I = fld.ideal([g])
    x = is_principal(I)
    assert x is not None
    q = x / g
    assert fld.is_in_order(q) and fld.is_in_order(q.inverse()) and abs(q.norm()) == 1


def test_unit_ideal_generator():
    x = is_principal(get_field(ZETA5).unit_ideal())
    assert abs(x.norm()) == 1


def test_non_principal_ideal():
    spec = CMFieldSpec(5, 4, 1)
    fld = get_field(spec)
    cg = fld.class_group()
    oracle = QuarticField(5, 4, 1)
    for R in cg.representatives:
        coords = [[int(c) for c in fld.order_coords(b)] for b in R.basis()]
        # express in the oracle's integral basis (same maximal order, possibly another basis)
        vecs = [oracle.coords(list(b.c)) for b in R.basis()]
        from nf_oracle import _int_hnf
        H = _int_hnf([[int(c) for c in v] for v in vecs])
        assert (is_principal(R) is not None) == oracle.is_principal(H)
    assert any(is_principal(R) is None for R in cg.representatives)


def test_principality_paths_agree():
    """Ideals whose quotient is principal land in the same class."""
    spec = CMFieldSpec(8, 13, 3)
    fld = get_field(spec)
    cg = fld.class_group()
    rng = random.Random(3)
    from igusacm.cmfield import _class_index
    invs = [R.inverse() for R in cg.representatives]
    for R in cg.representatives:
        g = _rand_element(fld, rng, 3)
        if g.is_zero():
            continue
        moved = R * g
        k = _class_index(invs, moved)
        assert cg.representatives[k] == R


# -- embeddings ----------------------------------------------------------------


@pytest.mark.parametrize("spec", FIELDS, ids=str)
def test_embeddings(spec):
    n = 100
    roots = embeddings(spec, n)
    with mpmath.workprec(4 * n):
        vals = [mpmath.mpc(mpmath.mpf(r.real.numerator) / r.real.denominator,
                           mpmath.mpf(r.imag.numerator) / r.imag.denominator) for r in roots]
        oracle = mpmath.polyroots([1, 0, 2 * spec.a, 0, spec.d], maxsteps=200, extraprec=4 * n)
        tol = mpmath.mpf(2) ** (-n + 4)
        for v in vals:
            assert min(abs(v - o) for o in oracle) <= tol
        # conjugate pairs: phi_{j+2} = conj(phi_j)
        for j in (0, 1):
            assert abs(vals[j + 2] - mpmath.conj(vals[j])) <= tol
        # alpha^2 = -a +- b sqrt(delta0)
        sq = sorted(float((v * v).real) for v in vals[:2])
        r = spec.b * math.sqrt(spec.delta0)
        assert sq == pytest.approx(sorted([-spec.a - r, -spec.a + r]))
        # phi_1 has positive imaginary part and the larger |Im|
        assert vals[0].imag > 0 and vals[1].imag > 0 and vals[0].imag > vals[1].imag
