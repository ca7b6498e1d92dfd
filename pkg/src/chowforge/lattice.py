"""The Picard lattice of a blown-up plane: Z H + Z E_1 + ... + Z E_r with the
diagonal pairing H^2 = 1, E_i^2 = -1, the canonical class, and the lattice
automorphism group generated by index permutations and quadratic-transform
reflections.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import FeasibilityError, InputError

DEFAULT_ELEMENT_CAP = 10 ** 6


@dataclass(frozen=True)
class PicClass:
    """Class d*H - sum_i m_i E_i, stored as the coefficient vector (d, m_1..m_r)."""

    r: int
    coeffs: tuple

    @classmethod
    def make(cls, coeffs):
        coeffs = tuple(int(x) for x in coeffs)
        if not coeffs:
            raise InputError("coefficient vector must include the degree entry")
        return cls(len(coeffs) - 1, coeffs)

    @classmethod
    def from_exponents(cls, exps):
        exps = tuple(int(x) for x in exps)
        return cls(len(exps) - 1, (exps[0],) + tuple(-x for x in exps[1:]))

    @property
    def degree(self):
        return self.coeffs[0]

    @property
    def mults(self):
        return self.coeffs[1:]

    def exponents(self):
        """Coordinates of t^D: (d, -m_1, ..., -m_r) in the H, E_i basis."""
        return (self.coeffs[0],) + tuple(-m for m in self.coeffs[1:])

    def __add__(self, other):
        _check_rank(self, other)
        return PicClass(self.r, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        _check_rank(self, other)
        return PicClass(self.r, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, c):
        return PicClass(self.r, tuple(c * a for a in self.coeffs))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def is_zero(self):
        return not any(self.coeffs)

    def __repr__(self):
        return f"PicClass{self.coeffs}"


def _check_rank(a, b):
    if a.r != b.r:
        raise InputError(f"rank mismatch: {a.r} vs {b.r}")


def pair(a, b):
    """Intersection number d_a d_b - sum m_a,i m_b,i."""
    _check_rank(a, b)
    return a.coeffs[0] * b.coeffs[0] - sum(
        x * y for x, y in zip(a.coeffs[1:], b.coeffs[1:]))


def canonical_class(r):
    """K = -3H + sum E_i; satisfies K.K = 9 - r."""
    return PicClass(r, (-3,) + (-1,) * r)


def basis_class(r, i):
    """i = 0 gives H, i >= 1 gives E_i."""
    coeffs = [0] * (r + 1)
    coeffs[i] = 1 if i == 0 else -1
    return PicClass(r, tuple(coeffs))


@dataclass(frozen=True)
class WeylElement:
    """Integer matrix acting on coefficient vectors, preserving the pairing
    and fixing the canonical class."""

    matrix: tuple

    @property
    def r(self):
        return len(self.matrix) - 1

    def apply(self, d):
        v = d.coeffs
        return PicClass(d.r, tuple(sum(row[j] * v[j] for j in range(len(v)))
                                   for row in self.matrix))

    def apply_exponents(self, exps):
        """Action on t^D exponent vectors (the same map in the H, E_i basis)."""
        m = self.exponent_matrix()
        return tuple(sum(row[j] * exps[j] for j in range(len(exps))) for row in m)

    def exponent_matrix(self):
        n = len(self.matrix)
        sign = [1] + [-1] * (n - 1)
        return tuple(tuple(sign[i] * self.matrix[i][j] * sign[j] for j in range(n))
                     for i in range(n))

    def compose(self, other):
        a, b = self.matrix, other.matrix
        n = len(a)
        return WeylElement(tuple(
            tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n))
            for i in range(n)))

    def is_identity(self):
        n = len(self.matrix)
        return all(self.matrix[i][j] == (1 if i == j else 0)
                   for i in range(n) for j in range(n))


def identity_element(r):
    return WeylElement(tuple(tuple(1 if i == j else 0 for j in range(r + 1))
                             for i in range(r + 1)))


def transposition_element(r, a, b):
    """Swap E_a and E_b (1-based indices)."""
    n = r + 1
    perm = list(range(n))
    perm[a], perm[b] = perm[b], perm[a]
    return WeylElement(tuple(tuple(1 if perm[i] == j else 0 for j in range(n))
                             for i in range(n)))


def quadratic_transform_element(r, a, b, c):
    """The reflection sending H to 2H - E_a - E_b - E_c, each of E_a, E_b,
    E_c to the line through the other two, and fixing the remaining E_i."""
    if r < 3:
        raise InputError("quadratic transform needs three indices")
    n = r + 1
    rows = [[0] * n for _ in range(n)]
    # columns give images of the basis (H, E_i); in (d, m) coordinates the
    # matrix is symmetric with the sign pattern below
    abc = (a, b, c)
    rows[0][0] = 2
    for i in abc:
        rows[0][i] = -1
        rows[i][0] = 1
    for i in abc:
        for j in abc:
            if i != j:
                rows[i][j] = -1
    for i in range(1, n):
        if i not in abc:
            rows[i][i] = 1
    return WeylElement(tuple(tuple(row) for row in rows))


def weyl_generators(r):
    """All transpositions of the exceptional indices plus all quadratic
    transforms phi_abc, 1 <= a < b < c <= r (none for r < 3)."""
    gens = [transposition_element(r, a, b)
            for a, b in combinations(range(1, r + 1), 2)]
    if r >= 3:
        gens.extend(quadratic_transform_element(r, a, b, c)
                    for a, b, c in combinations(range(1, r + 1), 3))
    return sorted(gens, key=lambda w: w.matrix)


@dataclass(frozen=True)
class WeylGroup:
    r: int
    elements: tuple  # of WeylElement
    complete: bool

    @property
    def order(self):
        return len(self.elements) if self.complete else None

    def multiply(self, a, b):
        return a.compose(b)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)


@lru_cache(maxsize=None)
def weyl_group(r, element_cap=DEFAULT_ELEMENT_CAP):
    """Breadth-first closure of the generators under multiplication.

    Deterministic: generators sorted lexicographically, matrices deduplicated
    by their entries.  Soft-fails with complete=False once element_cap is
    exceeded (expected for r = 7, 8 at the default cap... r=8 has order
    696729600 * ~1000; don't try).
    """
    n = r + 1
    gens = weyl_generators(r)
    if r < 1 or not gens:
        return WeylGroup(r, (identity_element(max(r, 0)),), True)
    gen_arr = np.array([g.matrix for g in gens], dtype=np.int64)
    ident = np.array(identity_element(r).matrix, dtype=np.int64)
    row_size = n * n * 8
    seen = {ident.tobytes()}
    frontier = ident.reshape(1, n, n)
    complete = True
    while len(frontier):
        fresh = []
        for gmat in gen_arr:
            prod = frontier @ gmat
            if np.abs(prod).max() > 2 ** 31:
                raise FeasibilityError("matrix entries grew unexpectedly large")
            data = prod.tobytes()
            for i in range(0, len(data), row_size):
                key = data[i:i + row_size]
                if key not in seen:
                    seen.add(key)
                    fresh.append(key)
        if len(seen) > element_cap:
            complete = False
            break
        frontier = (np.frombuffer(b"".join(fresh), dtype=np.int64).reshape(-1, n, n)
                    if fresh else np.empty((0, n, n), dtype=np.int64))
    elements = []
    for key in sorted(seen):
        flat = np.frombuffer(key, dtype=np.int64).tolist()
        elements.append(WeylElement(tuple(tuple(flat[i * n:(i + 1) * n])
                                          for i in range(n))))
    return WeylGroup(r, tuple(elements), complete)


def mukai_q0(r, p):
    """Smallest q > r with 1/p + 1/r + 1/(q - r) <= 1, in exact rationals."""
    if r < 3 or p < 2:
        raise InputError("need r >= 3 and p >= 2")
    base = Fraction(1, p) + Fraction(1, r)
    q = r + 1
    while base + Fraction(1, q - r) > 1:
        q += 1
    return q
