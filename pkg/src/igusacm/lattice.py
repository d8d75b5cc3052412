"""Small exact lattice tools: Hermite normal form, LLL on a Gram matrix,
short-vector enumeration and linear algebra modulo a prime.

Matrices are lists of rows.  Everything here works for the 4-dimensional
lattices that occur for quartic fields; nothing is tuned for large sizes.
"""

from __future__ import annotations

import math
from fractions import Fraction


def hnf_columns(cols: list[list[int]], rank: int | None = None) -> list[list[int]]:
    """Column-style Hermite normal form.

    ``cols`` is a list of integer column vectors of equal length r spanning a
    full-rank lattice.  Returns the r x r upper-triangular matrix H (as rows)
    with positive diagonal and 0 <= H[i][j] < H[i][i] for j > i, whose columns
    span the same lattice.
    """
    r = len(cols[0]) if rank is None else rank
    work = [list(c) for c in cols if any(c)]
    pivots: list[list[int] | None] = [None] * r
    for i in range(r - 1, -1, -1):
        nz = [c for c in work if c[i] != 0]
        rest = [c for c in work if c[i] == 0]
        if not nz:
            raise ValueError("lattice is not of full rank")
        piv = nz[0]
        for c in nz[1:]:
            # combine piv and c so that c gets a zero in row i
            a, b = piv[i], c[i]
            g, x, y = _xgcd(a, b)
            u, v = a // g, b // g
            new_piv = [x * p + y * q for p, q in zip(piv, c)]
            new_c = [u * q - v * p for p, q in zip(piv, c)]
            piv = new_piv
            if any(new_c):
                rest.append(new_c)
        if piv[i] < 0:
            piv = [-x for x in piv]
        pivots[i] = piv
        work = rest
    H = [[pivots[j][i] for j in range(r)] for i in range(r)]
    for j in range(r):
        for i in range(j - 1, -1, -1):
            q = H[i][j] // H[i][i]
            if q:
                for k in range(i + 1):
                    H[k][j] -= q * H[k][i]
    return H


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with g = gcd(a, b) >= 0 and a x + b y = g."""
    return _xgcd(a, b)


def det(M) -> Fraction:
    """Exact determinant by fraction-free elimination."""
    n = len(M)
    A = [[Fraction(x) for x in row] for row in M]
    d = Fraction(1)
    for i in range(n):
        p = next((r for r in range(i, n) if A[r][i] != 0), None)
        if p is None:
            return Fraction(0)
        if p != i:
            A[i], A[p] = A[p], A[i]
            d = -d
        d *= A[i][i]
        inv = 1 / A[i][i]
        for r in range(i + 1, n):
            f = A[r][i] * inv
            if f:
                for c in range(i, n):
                    A[r][c] -= f * A[i][c]
    return d


def mat_inverse(M) -> list[list[Fraction]]:
    n = len(M)
    A = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for i in range(n):
        p = next((r for r in range(i, n) if A[r][i] != 0), None)
        if p is None:
            raise ZeroDivisionError("singular matrix")
        A[i], A[p] = A[p], A[i]
        inv = 1 / A[i][i]
        A[i] = [x * inv for x in A[i]]
        for r in range(n):
            if r != i and A[r][i] != 0:
                f = A[r][i]
                A[r] = [x - f * y for x, y in zip(A[r], A[i])]
    return [row[n:] for row in A]


def mat_mul(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def transpose(A):
    return [list(r) for r in zip(*A)]


# ---------------------------------------------------------------------------
# LLL


def lll_gram(G, delta: Fraction = Fraction(99, 100)) -> list[list[int]]:
    """LLL-reduce the lattice with Gram matrix G (exact rationals).

    Returns a unimodular integer matrix U (rows) such that the vectors
    b'_i = sum_j U[i][j] b_j form an LLL-reduced basis with parameter delta.
    """
    n = len(G)
    G = [[Fraction(x) for x in row] for row in G]
    U = [[int(i == j) for j in range(n)] for i in range(n)]

    def gso():
        mu = [[Fraction(0)] * n for _ in range(n)]
        B = [Fraction(0)] * n
        for i in range(n):
            for j in range(i):
                s = G[i][j] - sum(mu[j][k] * mu[i][k] * B[k] for k in range(j))
                mu[i][j] = s / B[j]
            B[i] = G[i][i] - sum(mu[i][k] ** 2 * B[k] for k in range(i))
            if B[i] <= 0:
                raise ValueError("Gram matrix is not positive definite")
        return mu, B

    def swap(i, j):
        U[i], U[j] = U[j], U[i]
        G[i], G[j] = G[j], G[i]
        for row in G:
            row[i], row[j] = row[j], row[i]

    k = 1
    mu, B = gso()
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                _size_reduce(G, U, k, j, q)
                mu, B = gso()
        if B[k] >= (delta - mu[k][k - 1] ** 2) * B[k - 1]:
            k += 1
        else:
            swap(k, k - 1)
            mu, B = gso()
            k = max(k - 1, 1)
    return U


def _size_reduce(G, U, i, j, q):
    n = len(G)
    U[i] = [a - q * b for a, b in zip(U[i], U[j])]
    gii = G[i][i] - 2 * q * G[i][j] + q * q * G[j][j]
    for k in range(n):
        if k != i:
            G[i][k] = G[i][k] - q * G[j][k]
            G[k][i] = G[i][k]
    G[i][i] = gii


def gram_from_form(basis, form) -> list[list[Fraction]]:
    n = len(basis)
    return [[form(basis[i], basis[j]) for j in range(n)] for i in range(n)]


# ---------------------------------------------------------------------------
# Short vectors


def short_vectors(G, bound, limit: int | None = None) -> list[tuple[list[int], Fraction]]:
    """All non-zero integer x with x^t G x <= bound (exact rational check).

    Vectors are returned up to sign (one of x, -x).  Enumeration is done on an
    LLL-reduced basis with floating-point pruning widened by a safety margin;
    every returned vector is verified exactly.
    """
    n = len(G)
    bound = Fraction(bound)
    U = lll_gram(G)
    Gr = [[sum(U[i][a] * G[a][b] * U[j][b] for a in range(n) for b in range(n)) for j in range(n)]
          for i in range(n)]
    return _enumerate(Gr, U, bound, limit)


def _enumerate(Gr, U, bound, limit):
    n = len(Gr)
    Gf = [[float(x) for x in row] for row in Gr]
    # Cholesky: Gf = R^t R with R upper triangular, q(x) = sum_i (sum_{j>=i} R[i][j] x_j)^2
    R = [[0.0] * n for _ in range(n)]
    for i in range(n):
        s = Gf[i][i] - sum(R[k][i] ** 2 for k in range(i))
        if s <= 0:
            raise ValueError("Gram matrix is not positive definite")
        R[i][i] = math.sqrt(s)
        for j in range(i + 1, n):
            R[i][j] = (Gf[i][j] - sum(R[k][i] * R[k][j] for k in range(i))) / R[i][i]
    fb = float(bound) * (1 + 1e-9) + 1e-9
    out = []
    x = [0] * n

    def rec(i, partial):
        # coordinates x[i+1..n-1] fixed; partial = sum over rows > i
        if i < 0:
            if any(x):
                v = [sum(x[a] * U[a][b] for a in range(n)) for b in range(n)]
                q = sum(x[a] * Gr[a][b] * x[b] for a in range(n) for b in range(n))
                if q <= bound:
                    out.append((v, q))
            return
        c = sum(R[i][j] * x[j] for j in range(i + 1, n))
        rem = fb - partial
        if rem < 0:
            return
        r = math.sqrt(rem) / R[i][i]
        center = -c / R[i][i]
        lo = math.ceil(center - r - 1e-9)
        hi = math.floor(center + r + 1e-9)
        for v in range(lo, hi + 1):
            x[i] = v
            t = R[i][i] * v + c
            rec(i - 1, partial + t * t)
            if limit is not None and len(out) > limit:
                raise OverflowError("too many short vectors")
        x[i] = 0

    rec(n - 1, 0.0)
    # keep one of each pair {x, -x}
    seen = set()
    res = []
    for v, q in out:
        key = tuple(v)
        neg = tuple(-a for a in v)
        if neg in seen:
            continue
        seen.add(key)
        res.append((v, q))
    return res


# ---------------------------------------------------------------------------
# Linear algebra over F_p


def kernel_mod_p(rows: list[list[int]], ncols: int, p: int) -> list[list[int]]:
    """Basis (as lists of ints in [0, p)) of {x in F_p^ncols : rows . x = 0}."""
    A = [[x % p for x in r] for r in rows]
    piv_cols = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(A)) if A[i][c]), None)
        if pr is None:
            continue
        A[r], A[pr] = A[pr], A[r]
        inv = pow(A[r][c], -1, p)
        A[r] = [(x * inv) % p for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [(x - f * y) % p for x, y in zip(A[i], A[r])]
        piv_cols.append(c)
        r += 1
        if r == len(A):
            break
    free = [c for c in range(ncols) if c not in piv_cols]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for i, pc in enumerate(piv_cols):
            v[pc] = (-A[i][f]) % p
        basis.append(v)
    return basis


def rank_mod_p(rows: list[list[int]], ncols: int, p: int) -> int:
    return ncols - len(kernel_mod_p(rows, ncols, p))


def unimodular_row_solve(row: list[int]) -> list[int]:
    """Find an integer vector v with row . v = gcd(row).

    Computed from the Hermite form of the row vector: column operations
    reduce the row to (g, 0, ..., 0) and v is the first column of the
    accumulated unimodular transformation.
    """
    n = len(row)
    r = list(row)
    T = [[int(i == j) for j in range(n)] for i in range(n)]  # columns of T are tracked as T[.][j]
    for j in range(1, n):
        if r[j] == 0:
            continue
        g, x, y = _xgcd(r[0], r[j])
        u, v = (r[0] // g, r[j] // g) if g else (0, 0)
        # new col0 = x col0 + y colj ; new colj = -v col0 + u colj
        for i in range(n):
            c0, cj = T[i][0], T[i][j]
            T[i][0] = x * c0 + y * cj
            T[i][j] = -v * c0 + u * cj
        r[0], r[j] = g, 0
    if r[0] < 0:
        for i in range(n):
            T[i][0] = -T[i][0]
        r[0] = -r[0]
    return [T[i][0] for i in range(n)]
