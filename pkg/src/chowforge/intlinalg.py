"""Exact integer/rational linear algebra helpers.

Everything here works on tuples of Python ints (arbitrary precision) or
fractions.Fraction; no floating point anywhere.  Matrices are tuples of row
tuples.
"""

from fractions import Fraction
from math import gcd


def primitive(v):
    """Divide an integer vector by the gcd of its entries (sign preserved)."""
    g = 0
    for x in v:
        g = gcd(g, x)
    if g <= 1:
        return tuple(v)
    return tuple(x // g for x in v)


def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c, v):
    return tuple(c * x for x in v)


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def mat_vec(m, v):
    return tuple(dot(row, v) for row in m)


def transpose(m):
    return tuple(zip(*m)) if m else ()


def row_hnf(m):
    """Row Hermite form of an integer matrix.

    Returns (H, U) with U unimodular, H = U*M, H in row echelon form with
    positive pivots and entries above each pivot reduced into [0, pivot).
    Zero rows of H are collected at the bottom.
    """
    rows = [list(r) for r in m]
    nr = len(rows)
    nc = len(rows[0]) if nr else 0
    u = [[1 if i == j else 0 for j in range(nr)] for i in range(nr)]
    pivot_row = 0
    for col in range(nc):
        # clear the column below pivot_row with gcd steps
        while True:
            nz = [i for i in range(pivot_row, nr) if rows[i][col] != 0]
            if not nz:
                break
            i0 = min(nz, key=lambda i: abs(rows[i][col]))
            if i0 != pivot_row:
                rows[i0], rows[pivot_row] = rows[pivot_row], rows[i0]
                u[i0], u[pivot_row] = u[pivot_row], u[i0]
            p = rows[pivot_row][col]
            done = True
            for i in range(pivot_row + 1, nr):
                q = rows[i][col] // p  # floor division keeps remainders small
                if q:
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[pivot_row])]
                    u[i] = [a - q * b for a, b in zip(u[i], u[pivot_row])]
                if rows[i][col] != 0:
                    done = False
            if done:
                break
        if pivot_row < nr and rows[pivot_row][col] != 0:
            if rows[pivot_row][col] < 0:
                rows[pivot_row] = [-a for a in rows[pivot_row]]
                u[pivot_row] = [-a for a in u[pivot_row]]
            p = rows[pivot_row][col]
            for i in range(pivot_row):
                q = rows[i][col] // p
                if q:
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[pivot_row])]
                    u[i] = [a - q * b for a, b in zip(u[i], u[pivot_row])]
            pivot_row += 1
        if pivot_row == nr:
            break
    h = tuple(tuple(r) for r in rows)
    return h, tuple(tuple(r) for r in u)


def right_kernel(m):
    """Basis (tuple of rows) of {x in Z^n : M x = 0}; the lattice is saturated."""
    mt = transpose(m)
    if not mt:  # zero columns
        return ()
    h, u = row_hnf(mt)
    return tuple(tuple(u[i]) for i in range(len(h)) if not any(h[i]))


def saturation_basis(rows):
    """Basis of the saturated lattice Z^n intersect span_Q(rows)."""
    n = len(rows[0])
    perp = right_kernel(rows)
    if not perp:
        return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))
    return right_kernel(perp)


def integer_rank(rows):
    if not rows:
        return 0
    h, _ = row_hnf(rows)
    return sum(1 for r in h if any(r))


def solve_exact(mat_rows, rhs):
    """Solve (rows as columns? no:) sum_j x_j * mat_rows[j] = rhs over Q.

    mat_rows is a list of linearly independent vectors; returns the unique
    Fraction tuple x if rhs lies in their span, else None.
    """
    m = len(mat_rows)
    n = len(rhs)
    # augmented system: columns are the vectors
    a = [[Fraction(mat_rows[j][i]) for j in range(m)] + [Fraction(rhs[i])]
         for i in range(n)]
    piv_cols = []
    r = 0
    for c in range(m):
        pr = next((i for i in range(r, n) if a[i][c] != 0), None)
        if pr is None:
            continue
        a[r], a[pr] = a[pr], a[r]
        pv = a[r][c]
        a[r] = [x / pv for x in a[r]]
        for i in range(n):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        piv_cols.append(c)
        r += 1
    for i in range(r, n):
        if a[i][m] != 0:
            return None  # rhs outside the span
    x = [Fraction(0)] * m
    for i, c in enumerate(piv_cols):
        x[c] = a[i][m]
    return tuple(x)


def invert_fraction(mat):
    """Inverse of a square integer matrix as rows of Fractions."""
    n = len(mat)
    a = [[Fraction(mat[i][j]) for j in range(n)] +
         [Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for c in range(n):
        pr = next(i for i in range(c, n) if a[i][c] != 0)
        a[c], a[pr] = a[pr], a[c]
        pv = a[c][c]
        a[c] = [x / pv for x in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return tuple(tuple(row[n:]) for row in a)


def gcd_of_maximal_minors(rows):
    """gcd of all m x m minors of an m x n integer matrix (m <= n)."""
    from itertools import combinations

    m = len(rows)
    n = len(rows[0])
    g = 0
    for cols in combinations(range(n), m):
        sub = [[rows[i][j] for j in cols] for i in range(m)]
        g = gcd(g, _det_int(sub))
        if g == 1:
            return 1
    return abs(g)


def _det_int(mat):
    """Determinant of a square integer matrix (Bareiss, division-free result)."""
    a = [row[:] for row in mat]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            sw = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if sw is None:
                return 0
            a[k], a[sw] = a[sw], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]
