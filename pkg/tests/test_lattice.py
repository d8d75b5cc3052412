import itertools
from fractions import Fraction

import sympy
from hypothesis import given
from hypothesis import strategies as st
from sympy.matrices.normalforms import hermite_normal_form

from igusacm.lattice import det, hnf_columns, kernel_mod_p, lll_gram, mat_inverse, short_vectors, unimodular_row_solve

small = st.integers(-9, 9)


def full_rank_columns(cols):
    return sympy.Matrix(cols).T.rank() == len(cols[0])


@given(st.lists(st.lists(small, min_size=4, max_size=4), min_size=4, max_size=7))
def test_hnf_spans_same_lattice(cols):
    if not full_rank_columns(cols):
        return
    H = hnf_columns(cols, 4)
    assert all(H[i][j] == 0 for i in range(4) for j in range(i))
    assert all(0 <= H[i][j] < H[i][i] for i in range(4) for j in range(i + 1, 4))
    # same determinant as sympy's normal form, and each input column lies in the span
    ref = hermite_normal_form(sympy.Matrix(cols).T)
    assert abs(sympy.Matrix(H).det()) == abs(ref.det())
    Hm = sympy.Matrix(H)
    for c in cols:
        sol = Hm.LUsolve(sympy.Matrix(c))
        assert all(x.q == 1 for x in sol)


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=3, max_size=3))
def test_det_and_inverse(M):
    d = det(M)
    assert d == sympy.Matrix(M).det()
    if d:
        inv = mat_inverse(M)
        prod = [[sum(Fraction(M[i][k]) * inv[k][j] for k in range(3)) for j in range(3)] for i in range(3)]
        assert prod == [[int(i == j) for j in range(3)] for i in range(3)]


def _random_gram(rng_vals):
    B = sympy.Matrix(3, 3, rng_vals)
    return [[int(x) for x in row] for row in (B * B.T).tolist()], B


@given(st.lists(small, min_size=9, max_size=9))
def test_lll_is_unimodular_and_size_reduced(vals):
    G, B = _random_gram(vals)
    if B.det() == 0:
        return
    U = lll_gram(G)
    assert abs(sympy.Matrix(U).det()) == 1
    Gr = sympy.Matrix(U) * sympy.Matrix(G) * sympy.Matrix(U).T
    # first vector no longer than 2^(n-1) times the shortest input basis vector
    assert Gr[0, 0] <= 4 * min(G[i][i] for i in range(3))


@given(st.lists(small, min_size=9, max_size=9), st.integers(1, 60))
def test_short_vectors_complete(vals, bound):
    G, B = _random_gram(vals)
    if B.det() == 0:
        return
    got = {tuple(v) for v, _ in short_vectors(G, bound)}
    got |= {tuple(-x for x in v) for v in got}
    # brute force in a box that contains every solution: |x_i| <= sqrt(bound * (G^-1)_ii)
    Gi = sympy.Matrix(G).inv()
    r = [int(sympy.sqrt(bound * Gi[i, i]).evalf()) + 1 for i in range(3)]
    if (2 * r[0] + 1) * (2 * r[1] + 1) * (2 * r[2] + 1) > 200_000:
        return
    want = set()
    for x in itertools.product(*(range(-k, k + 1) for k in r)):
        if any(x) and sum(x[i] * G[i][j] * x[j] for i in range(3) for j in range(3)) <= bound:
            want.add(x)
    assert got == want


def test_kernel_mod_p():
    rows = [[1, 2, 3, 4], [0, 1, 1, 1]]
    for v in kernel_mod_p(rows, 4, 7):
        assert all(sum(a * b for a, b in zip(r, v)) % 7 == 0 for r in rows)
    assert len(kernel_mod_p(rows, 4, 7)) == 2


@given(st.lists(st.integers(-50, 50), min_size=2, max_size=5))
def test_unimodular_row_solve(row):
    import math
    g = 0
    for x in row:
        g = math.gcd(g, x)
    if g == 0:
        return
    v = unimodular_row_solve(row)
    assert sum(a * b for a, b in zip(row, v)) == g
