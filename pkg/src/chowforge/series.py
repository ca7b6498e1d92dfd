"""Convolution algebra of graded monoid series, differential-operator
weighting, rationality testing, and the symmetric-product series.

A polynomial weight P applied to a cone sum works two ways here: per-point
evaluation over the brute-force lattice enumeration, and a differential
operator acting on the unweighted truncation.  The operator route rewrites P
in the falling-factorial basis so that f(t) * d^a/dt^a acts exactly like
d/dt t^n = n t^(n-1) on monomials; the two routes are cross-checked whenever
both are computed.
"""

from fractions import Fraction
from math import comb, factorial

from .errors import InputError, InternalConsistencyError
from .intlinalg import dot, vec_add, vec_sub
from .polyhedra import (
    ConeRationalFunction,
    GradedTruncation,
    HalfOpenSimplicialCone,
    LaurentPoly,
    RationalCone,
    cone_lattice_points,
    cone_series,
    expand,
    expand_sum,
    fundamental_domain,
    half_open_decompose,
    triangulate,
)


def convolve(f, g):
    """Convolution product of two truncations; bound is the min of the two."""
    if f.grading != g.grading:
        raise InputError("grading mismatch")
    if len(f.coeffs) > len(g.coeffs):
        f, g = g, f
    bound = min(f.bound, g.bound)
    grading = f.grading
    out = {}
    g_items = sorted(g.coeffs.items(), key=lambda kv: dot(grading, kv[0]))
    g_degs = [dot(grading, e) for e, _ in g_items]
    for e1, c1 in f.coeffs.items():
        d1 = dot(grading, e1)
        if d1 > bound:
            continue
        for (e2, c2), d2 in zip(g_items, g_degs):
            if d1 + d2 > bound:
                break
            s = vec_add(e1, e2)
            v = out.get(s, 0) + c1 * c2
            if v:
                out[s] = v
            elif s in out:
                del out[s]
    return GradedTruncation(grading, bound, out)


def truncation_one(grading, bound):
    rank = len(grading)
    return GradedTruncation(grading, bound, {(0,) * rank: 1})


def _falling(x, j):
    out = 1
    for i in range(j):
        out *= x - i
    return out


def apply_diff_op(op_terms, trunc):
    """Apply sum_i f_i(t) d^(a_i)/dt^(a_i) to a truncation.

    op_terms is a list of (coefficient, order) pairs where coefficient maps
    exponent vectors to int or Fraction and order is a tuple of nonnegative
    derivative multi-orders.  A monomial t^D picks up the falling-factorial
    weight prod_j D_j (D_j - 1) ... (D_j - a_j + 1) and shifts by -a_j, then
    multiplies by the coefficient polynomial.  The result bound shrinks when a
    coefficient term raises the grading by more than its derivative lowers it.
    """
    grading = trunc.grading
    shift = 0
    terms = []
    for coeff, order in op_terms:
        order = tuple(int(a) for a in order)
        if any(a < 0 for a in order):
            raise InputError("derivative orders must be nonnegative")
        d_order = dot(grading, order)
        cleaned = {}
        for e, c in dict(coeff).items():
            c = Fraction(c)
            if not c:
                continue
            e = tuple(e)
            cleaned[e] = c
            shift = min(shift, dot(grading, e) - d_order)
        if cleaned:
            terms.append((cleaned, order))
    bound = trunc.bound + shift
    acc = {}
    for coeff, order in terms:
        for dpt, c in trunc.coeffs.items():
            w = 1
            for xj, aj in zip(dpt, order):
                w *= _falling(xj, aj)
                if w == 0:
                    break
            if w == 0:
                continue
            base = vec_sub(dpt, order)
            for e, fc in coeff.items():
                p = vec_add(base, e)
                d = dot(grading, p)
                if d < 0:
                    raise InputError(f"operator output {p} has negative grading")
                if d <= bound:
                    acc[p] = acc.get(p, 0) + fc * c * w
    out = {}
    for p, c in acc.items():
        c = Fraction(c)
        if c:
            if c.denominator != 1:
                raise InternalConsistencyError(f"non-integer coefficient {c} at {p}")
            out[p] = int(c)
    return GradedTruncation(grading, bound, out)


def rationality_check(f, g, h):
    """Does g * f = h hold on every point with grading <= bound - max deg(g)?"""
    grading = f.grading
    if not g.terms:
        return not any(dot(grading, e) <= f.bound for e in h.terms)
    bound = f.bound - max(dot(grading, e) for e in g.terms)
    prod = {}
    for eg, cg in g.terms.items():
        for ef, cf in f.coeffs.items():
            s = vec_add(eg, ef)
            if dot(grading, s) <= bound:
                prod[s] = prod.get(s, 0) + cg * cf
    prod = {e: c for e, c in prod.items() if c}
    want = {e: c for e, c in h.terms.items() if dot(grading, e) <= bound and c}
    return prod == want


def macdonald_e0(chi, bound):
    """Symmetric-product series (1/(1-t))^chi truncated in rank one."""
    if bound < 0:
        raise InputError("bound must be nonnegative")
    coeffs = {}
    if chi >= 0:
        for d in range(bound + 1):
            c = comb(chi + d - 1, d) if chi > 0 else (1 if d == 0 else 0)
            if c:
                coeffs[(d,)] = c
    else:
        m = -chi
        for d in range(min(bound, m) + 1):
            coeffs[(d,)] = (-1) ** d * comb(m, d)
    return GradedTruncation((1,), bound, coeffs)


# ---------------------------------------------------------------------------
# polynomial weights


_STIRLING2 = {}


def _stirling2(n, k):
    if k < 0 or k > n:
        return 0
    if n == 0:
        return 1 if k == 0 else 0
    key = (n, k)
    if key not in _STIRLING2:
        _STIRLING2[key] = k * _stirling2(n - 1, k) + _stirling2(n - 1, k - 1)
    return _STIRLING2[key]


class Polynomial:
    """Multivariate polynomial with Fraction coefficients, used for weights
    like the Riemann-Roch quadratic; exponents are tuples of naturals."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars, terms=None):
        self.nvars = nvars
        self.terms = {}
        if terms:
            for e, c in dict(terms).items():
                c = Fraction(c)
                if c:
                    self.terms[tuple(e)] = c

    @classmethod
    def constant(cls, nvars, c):
        return cls(nvars, {(0,) * nvars: Fraction(c)})

    @classmethod
    def variable(cls, nvars, i):
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): Fraction(1)})

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.nvars, other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return Polynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.nvars, other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Polynomial(self.nvars, {e: c * other for e, c in self.terms.items()})
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = vec_add(e1, e2)
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def evaluate(self, point):
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for x, a in zip(point, e):
                for _ in range(a):
                    v *= x
            total += v
        return total

    def evaluate_int(self, point):
        v = self.evaluate(point)
        if v.denominator != 1:
            raise InputError(f"weight not integral at {point}")
        return int(v)

    def substitute_affine(self, offset, directions):
        """P(offset + sum_i k_i directions[i]) as a Polynomial in k."""
        m = len(directions)
        coords = []
        for j in range(self.nvars):
            lin = {(0,) * m: Fraction(offset[j])}
            for i in range(m):
                e = [0] * m
                e[i] = 1
                lin[tuple(e)] = lin.get(tuple(e), Fraction(0)) + directions[i][j]
            coords.append(Polynomial(m, lin))
        total = Polynomial(m)
        for e, c in self.terms.items():
            term = Polynomial.constant(m, c)
            for j, a in enumerate(e):
                for _ in range(a):
                    term = term * coords[j]
            total = total + term
        return total

    def falling_basis(self):
        """Coefficients c_b with P(x) = sum_b c_b prod_j ff(x_j, b_j)."""
        out = {}
        for alpha, c in self.terms.items():
            choices = [range(a + 1) for a in alpha]
            from itertools import product as _product
            for beta in _product(*choices):
                w = c
                for a, b in zip(alpha, beta):
                    w *= _stirling2(a, b)
                if w:
                    beta = tuple(beta)
                    out[beta] = out.get(beta, Fraction(0)) + w
        return {b: c for b, c in out.items() if c}


def riemann_roch_weight(rank):
    """(x0^2 - sum_k xk^2 + 3 x0 + sum_k xk)/2 + 1 on exponent vectors, the
    h^0 of a nef class in the degree/exceptional coordinates."""
    half = Fraction(1, 2)
    p = Polynomial(rank)
    x0 = Polynomial.variable(rank, 0)
    p = p + half * (x0 * x0) + 3 * half * x0
    for k in range(1, rank):
        xk = Polynomial.variable(rank, k)
        p = p - half * (xk * xk) + half * xk
    return p + 1


def diff_op_from_polynomial(p):
    """Differential operator whose action multiplies the coefficient of t^D
    by P(D): P rewritten in the falling-factorial basis, each basis element
    ff(D, b) realized as t^b d^b/dt^b."""
    return [({tuple(beta): c}, tuple(beta)) for beta, c in sorted(p.falling_basis().items())]


class WeightedSum(tuple):
    """Pair of truncations computed along independent routes (they agree)."""

    __slots__ = ()

    def __new__(cls, direct, via_operator):
        return super().__new__(cls, (direct, via_operator))

    @property
    def direct(self):
        return self[0]

    @property
    def via_operator(self):
        return self[1]


def polynomial_weighted_sum(cone, weight, grading, bound):
    """sum P(D) t^D over the lattice points of a pointed cone, computed both
    by direct evaluation over the enumerated points and by the operator route
    on the cone's generating function.  Disagreement raises."""
    if not isinstance(cone, RationalCone):
        cone = RationalCone.make(cone)
    pts = cone_lattice_points(cone, grading, bound)
    direct = GradedTruncation(
        grading, bound, {p: weight.evaluate_int(p) for p in pts})
    pieces = half_open_decompose(triangulate(cone))
    ones = expand_sum([cone_series(h) for h in pieces], grading, bound)
    via_op = apply_diff_op(diff_op_from_polynomial(weight), ones)
    if via_op.coeffs != direct.coeffs:
        raise InternalConsistencyError("weighted-sum routes disagree")
    return WeightedSum(direct, via_op)


def weighted_cone_rational(hoc, weight):
    """Closed rational form of sum P(D) t^D over a half-open simplicial cone.

    Writing D = w + sum k_i v_i over the fundamental domain, P becomes a
    polynomial in k, and sum_k ff(k_i, b_i) x^k = b_i! x^b_i/(1-x)^(b_i+1)
    turns each falling-basis term into a monomial over powers of (1 - t^v_i).
    """
    gens = hoc.generators
    m = len(gens)
    rank = hoc.ambient_rank
    contributions = []  # (w, beta, coefficient)
    mult = [1] * m
    for w in fundamental_domain(hoc):
        pk = weight.substitute_affine(w, gens)
        for beta, c in pk.falling_basis().items():
            contributions.append((w, beta, c))
            for i in range(m):
                mult[i] = max(mult[i], beta[i] + 1)
    num = LaurentPoly(rank)
    one = LaurentPoly.one(rank)
    frac_num = {}
    for w, beta, c in contributions:
        mono = w
        scale = c
        for i in range(m):
            for _ in range(beta[i]):
                mono = vec_add(mono, gens[i])
            scale *= factorial(beta[i])
        piece = LaurentPoly.monomial(mono)
        for i in range(m):
            extra = mult[i] - beta[i] - 1
            for _ in range(extra):
                piece = piece * (one - LaurentPoly.monomial(gens[i]))
        for e, k in piece.terms.items():
            frac_num[e] = frac_num.get(e, Fraction(0)) + scale * k
    terms = {}
    for e, c in frac_num.items():
        if c:
            if c.denominator != 1:
                raise InternalConsistencyError("weighted numerator not integral")
            terms[e] = int(c)
    den = []
    for i in range(m):
        den.extend([gens[i]] * mult[i])
    return ConeRationalFunction.make(LaurentPoly(rank, terms), den)
