import itertools
import random

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from igusacm import oracles
from igusacm.cm_enumerate import PPAVTriple, check_triple, cm_type_of, enumerate_ppav, polarization_ideal
from igusacm.cmfield import CMFieldSpec, get_field
from igusacm.period import (
    OMEGA,
    SiegelPoint,
    det_imag,
    imag_positive_definite,
    imag_z_measure,
    is_symplectic_for,
    period_matrix,
    period_matrix_from_z,
    polarization_matrix,
    relative_module,
    symmetry_residual,
    symplectic_transform,
    xi_from_z,
)
from igusacm.lattice import det
from igusacm.siegel import apply_sp4_complex, equivalent_in_F2, gottschling_set, mat_mul, reduce_to_F2, transpose

ZETA5 = CMFieldSpec(5, 10, 2)
FIELDS = [ZETA5, CMFieldSpec(8, 4, 1), CMFieldSpec(5, 4, 1), CMFieldSpec(17, 5, 1)]


def _triples(spec):
    return enumerate_ppav(spec)


def _trace_form_oracle(t):
    """Tr(xi x conj(y)) summed numerically over the roots of the defining polynomial.

    The roots are purely imaginary, so complex conjugation sends alpha to -alpha.
    """
    spec = t.field.spec
    with mpmath.workdps(40):
        roots = mpmath.polyroots([1, 0, 2 * spec.a, 0, spec.a ** 2 - spec.b ** 2 * spec.delta0], maxsteps=200,
                                 extraprec=100)

        def ev(x, r):
            return sum(mpmath.mpf(c.numerator) / c.denominator * r ** i for i, c in enumerate(x.c))

        A = []
        for x in t.basis:
            row = []
            for y in t.basis:
                v = sum(ev(t.xi, r) * ev(x, r) * ev(y, -r) for r in roots)
                row.append(int(mpmath.nint(v.real)))
                assert abs(v - mpmath.nint(v.real)) < 1e-20
            A.append(row)
        return A


@pytest.mark.parametrize("spec", FIELDS, ids=str)
def test_polarization_matrix(spec):
    for t in _triples(spec):
        A = polarization_matrix(t)
        assert all(A[i][j] == -A[j][i] for i in range(4) for j in range(4))
        assert det(A) == 1
        assert A == _trace_form_oracle(t)


@pytest.mark.parametrize("spec", FIELDS, ids=str)
def test_symplectic_transform_on_triples(spec):
    for t in _triples(spec):
        A = polarization_matrix(t)
        M = symplectic_transform(A)
        assert is_symplectic_for(M, A)
        assert abs(det(M)) == 1


def test_symplectic_transform_on_omega():
    Om = [list(r) for r in OMEGA]
    M = symplectic_transform(Om)
    assert is_symplectic_for(M, Om)


@given(st.integers(0, 2 ** 32))
def test_symplectic_transform_random_forms(seed):
    A = oracles.random_polarization_form(random.Random(seed))
    M = symplectic_transform(A)
    assert is_symplectic_for(M, A)


@pytest.mark.parametrize("spec", FIELDS, ids=str)
def test_period_matrix_properties(spec):
    n = 100
    for t in _triples(spec):
        M = symplectic_transform(polarization_matrix(t))
        Z = period_matrix(t, M, n)
        assert Z.precision >= n
        assert imag_positive_definite(Z)
        res = symmetry_residual(t, M, n)
        assert res.abs_upper().log2() <= -n + 4


def test_period_matrix_change_of_basis():
    """Replacing M by M S moves Z to S^t acting on Z."""
    t = _triples(CMFieldSpec(5, 4, 1))[0]
    M = symplectic_transform(polarization_matrix(t))
    Z = period_matrix(t, M, 80).as_complex()
    rng = random.Random(7)
    for _ in range(6):
        S = oracles.random_sp4_word(rng, gottschling_set(), 5)
        Z2 = period_matrix(t, [list(r) for r in mat_mul(M, S)], 80).as_complex()
        Z2_pred = apply_sp4_complex(transpose(S), Z)
        assert max(abs(a - b) for a, b in zip(Z2, Z2_pred)) < 1e-12


def test_period_matrix_precision_converges():
    t = _triples(ZETA5)[0]
    M = symplectic_transform(polarization_matrix(t))
    lo = period_matrix(t, M, 60)
    hi = period_matrix(t, M, 200)
    for a, b in zip(lo.entries(), hi.entries()):
        assert oracles.approx_distance(a, mpmath.mpc(float(b.real), float(b.imag)), 300) < -45


def _z_candidates(spec, limit=4):
    fld = get_field(spec)
    out = []
    for v in itertools.product(range(-2, 3), repeat=4):
        z = fld.from_order_coords(v)
        if (z - z.conj()).is_zero():
            continue
        for den in (1, 2):
            zz = z / den
            try:
                mod = relative_module(spec, zz)
            except ValueError:
                continue
            out.append((zz, mod))
            if len(out) >= limit:
                return out
    return out


def test_from_z_polarization_and_volume():
    spec = ZETA5
    fld = get_field(spec)
    for z, mod in _z_candidates(spec):
        xi = xi_from_z(spec, z)
        assert fld.ideal([xi]) == polarization_ideal(mod)
        Z = period_matrix_from_z(z, spec, 100)
        assert imag_positive_definite(Z)
        assert det_imag(Z) == pytest.approx(imag_z_measure(z) * float(mod.norm()) ** 2, rel=1e-12)


def test_from_z_agrees_with_triple_route():
    """The two constructions give Sp4-equivalent points once reduced into F2."""
    spec = ZETA5
    for z, mod in _z_candidates(spec):
        xi = xi_from_z(spec, z)
        t = PPAVTriple(cm_type_of(xi), mod, xi)
        check_triple(t)
        M = symplectic_transform(polarization_matrix(t))
        r1 = reduce_to_F2(period_matrix_from_z(z, spec, 100)).Z
        r2 = reduce_to_F2(period_matrix(t, M, 100)).Z
        assert equivalent_in_F2(r1, r2, 80)


def test_siegel_point_helpers():
    Z = SiegelPoint.from_complex(0.1 + 1j, 0.2 + 2j, 0.05 + 0.3j)
    assert Z.as_complex() == pytest.approx((0.1 + 1j, 0.2 + 2j, 0.05 + 0.3j))
    assert imag_positive_definite(Z)
    assert not imag_positive_definite(SiegelPoint.from_complex(1j, 1j, 2j))
    assert Z.rounded(20).precision == 20
