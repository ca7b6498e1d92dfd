"""Geometry and effective-divisor series of the plane blown up at up to
eight general points.

Everything is driven by the (-1)-classes: they span the effective cone (for
r >= 2), cut out the nef cone by nonnegativity of the pairing, and every
effective class splits uniquely as a nef part plus disjoint (-1)-curves with
positive multiplicities.  On the nef part h^0 is the Riemann-Roch value
(A - K) A / 2 + 1, which is what the weighted series below sum up.

The h^0-weighted series over all effective classes is assembled in three
independent ways: grouping by the set of fixed (-1)-curves (the primary
route), brute-force enumeration of effective classes (the oracle), and the
orbit form that averages a standard term per blow-down type over the lattice
automorphism group.  All three must agree coefficient by coefficient.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations

import numpy as np

from .errors import FeasibilityError, InputError, InternalConsistencyError
from .intlinalg import dot, integer_rank, vec_add
from .lattice import (
    PicClass,
    WeylElement,
    basis_class,
    canonical_class,
    pair,
    weyl_group,
)
from .polyhedra import (
    ConeRationalFunction,
    GradedTruncation,
    LaurentPoly,
    RationalCone,
    cone_series,
    dual_description,
    enumerate_lattice_points,
    expand,
    expand_sum,
    half_open_decompose,
    triangulate,
)
from .series import (
    Polynomial,
    apply_diff_op,
    convolve,
    riemann_roch_weight,
    truncation_one,
    weighted_cone_rational,
)


class NotEffectiveError(InputError):
    """Raised when a class fails the unique nef-plus-fixed decomposition."""


def minus_k_grading(r):
    """The (-K)-degree functional on exponent vectors: strictly positive on
    every nonzero effective class for r <= 8 (ampleness of -K)."""
    return (3,) + (1,) * r


# ---------------------------------------------------------------------------
# (-1)-classes


def _square_mult_solutions(r, target_sum, target_sq, hi):
    """Nonincreasing integer r-tuples with given sum and sum of squares."""
    out = []

    def rec(prefix, s, q, bound):
        k = r - len(prefix)
        if k == 0:
            if s == 0 and q == 0:
                out.append(tuple(prefix))
            return
        top = min(bound, _isqrt(q))
        lo = -_isqrt(q)
        for v in range(top, lo - 1, -1):
            rest_s = s - v
            rest_q = q - v * v
            if rest_q < 0:
                continue
            # remaining entries are <= v and >= -sqrt(rest_q)
            if rest_s > (k - 1) * v:
                continue
            if rest_s < -(k - 1) * _isqrt(rest_q):
                continue
            if k > 1 and rest_s * rest_s > (k - 1) * rest_q:
                continue  # Cauchy-Schwarz
            if k == 1 and (rest_s or rest_q):
                continue
            rec(prefix + [v], rest_s, rest_q, v)

    rec([], target_sum, target_sq, hi)
    return out


def _isqrt(n):
    if n < 0:
        return 0
    import math
    return math.isqrt(n)


def _distinct_permutations(values):
    seen = set()
    for p in permutations(values):
        if p not in seen:
            seen.add(p)
            yield p


def minus_one_classes(r, d_max=None):
    """All classes D = dH - sum m_i E_i with d >= 0, D.D = -1 and -K.D = 1.

    For r <= 8 the list is finite and complete: Cauchy-Schwarz on the two
    defining equations gives (3d-1)^2 <= r (d^2+1), so d <= 7, and d = 7 has
    no integer solution; the search stops at d = 7.  For r = 9 the set is
    infinite and a degree cap is required.
    """
    if r < 0 or r > 9:
        raise InputError("need 0 <= r <= 9")
    if r == 9 and d_max is None:
        raise InputError("r = 9 has infinitely many classes; supply d_max")
    if d_max is None:
        d_max = 7
    if r == 9 and d_max > 50:
        raise InputError("d_max capped at 50")
    out = []
    for d in range(d_max + 1):
        if r == 0:
            continue
        s = 3 * d - 1
        q = d * d + 1
        for shape in _square_mult_solutions(r, s, q, max(d, 1) if d else 0):
            for m in _distinct_permutations(shape):
                out.append(PicClass(r, (d,) + m))
    return sorted(out, key=lambda c: c.coeffs)


@lru_cache(maxsize=None)
def _minus_one_classes_cached(r):
    return tuple(minus_one_classes(r))


def effective_generators(r):
    """Generators of the effective cone: H alone for r = 0, the exceptional
    class and the line through the point for r = 1, the (-1)-classes after."""
    if r == 0:
        return [basis_class(0, 0)]
    if r == 1:
        return [basis_class(1, 1), PicClass.make((1, 1))]
    return list(_minus_one_classes_cached(r))


@dataclass(frozen=True)
class NefConeDescription:
    r: int
    rays: tuple      # PicClass extreme rays
    facets: tuple    # PicClass facet normals (irredundant effective generators)

    def exponent_cone(self):
        return RationalCone.make([ray.exponents() for ray in self.rays], self.r + 1)


@lru_cache(maxsize=None)
def nef_cone(r):
    """Dual of the effective cone, by exact double description."""
    if r < 0 or r > 8:
        raise InputError("need 0 <= r <= 8")
    gens = effective_generators(r)
    ineqs = [g.coeffs for g in gens]  # pair(D, I) = I.coeffs . D.exponents()
    rays, lineality = dual_description(ineqs, r + 1)
    if lineality:
        raise InternalConsistencyError("nef cone has lineality")
    ray_classes = tuple(sorted((PicClass.from_exponents(x) for x in rays),
                               key=lambda c: c.coeffs))
    facets = []
    for g in gens:
        active = [x for x in rays if dot(g.coeffs, x) == 0]
        if integer_rank(active) == r:
            facets.append(g)
    return NefConeDescription(r, ray_classes, tuple(facets))


def is_nef(d):
    return all(pair(d, i) >= 0 for i in effective_generators(d.r))


def is_effective(d):
    """Membership in the effective cone, decided against the nef dual rays.
    Integral cone points are treated as effective (saturation, validated
    against the interpolation oracle)."""
    return all(pair(d, n) >= 0 for n in nef_cone(d.r).rays)


@dataclass(frozen=True)
class Decomposition:
    nef_part: PicClass
    fixed: tuple  # of (PicClass, multiplicity)


def decompose(d):
    """Unique splitting D = A + sum m_I I with A nef, the I disjoint
    (-1)-classes, A.I = 0 and m_I = -D.I > 0."""
    fixed = []
    a = d
    for i in _minus_one_classes_cached(d.r):
        v = pair(d, i)
        if v < 0:
            fixed.append((i, -v))
            a = a - (-v) * i
    if not is_nef(a):
        raise NotEffectiveError(f"{d} has no nef-plus-fixed decomposition")
    for i, m in fixed:
        if pair(a, i) != 0:
            raise NotEffectiveError(f"nef part meets fixed curve {i}")
    for j in range(len(fixed)):
        for k in range(j + 1, len(fixed)):
            if pair(fixed[j][0], fixed[k][0]) != 0:
                raise NotEffectiveError("fixed curves not disjoint")
    check = a
    for i, m in fixed:
        check = check + m * i
    if check != d:
        raise NotEffectiveError("decomposition does not reconstruct the class")
    return Decomposition(a, tuple(fixed))


def _rr_value(a):
    k = canonical_class(a.r)
    num = pair(a, a) - pair(k, a)
    if num % 2:
        raise InternalConsistencyError("odd Riemann-Roch numerator")
    return num // 2 + 1


def h0(d):
    """Sections of O(D): zero off the effective cone, else the Riemann-Roch
    value of the nef part of the decomposition."""
    if d.r > 8:
        raise InputError("h0 available for r <= 8")
    if d.is_zero():
        return 1
    if not is_effective(d):
        return 0
    return _rr_value(decompose(d).nef_part)


# ---------------------------------------------------------------------------
# disjoint exceptional sets


@dataclass(frozen=True)
class DisjointExceptionalSet:
    classes: tuple           # sorted PicClass tuple, pairwise orthogonal
    blowdown_type: str       # "P" or "F0"

    @property
    def size(self):
        return len(self.classes)


def _orthocomplement_basis(r, classes):
    if not classes:
        rows = ()
    else:
        rows = tuple(c.coeffs for c in classes)
    from .intlinalg import right_kernel
    if not rows:
        return tuple(tuple(1 if i == j else 0 for j in range(r + 1))
                     for i in range(r + 1))
    # pair(D, I) = 0 translates to I.coeffs . exponents = 0; move back to
    # coefficient coordinates with the same sign pattern
    sign = lambda v: (v[0],) + tuple(-x for x in v[1:])
    kern = right_kernel(rows)
    return tuple(sign(k) for k in kern)


def classify_blowdown(r, classes):
    """P-type unless the orthogonal complement is an even lattice: the
    quadric surface's lattice has no odd self-intersections, every blown-down
    plane keeps a line class of odd square."""
    basis = _orthocomplement_basis(r, classes)
    for b in basis:
        cls = PicClass.make(b)
        if pair(cls, cls) % 2:
            return "P"
    return "F0"


def disjoint_exceptional_sets(r, allow_large=False):
    """All pairwise-orthogonal subsets of the (-1)-classes, the empty set
    included, classified by blow-down type."""
    if r < 0 or r > 8:
        raise InputError("need 0 <= r <= 8")
    if r >= 7 and not allow_large:
        raise FeasibilityError("r >= 7 enumerations are large; pass allow_large=True")
    classes = list(_minus_one_classes_cached(r))
    n = len(classes)
    ortho = [[pair(classes[i], classes[j]) == 0 for j in range(n)] for i in range(n)]
    sets = []

    def rec(start, members):
        sets.append(tuple(members))
        for i in range(start, n):
            if all(ortho[i][j] for j in members):
                members.append(i)
                rec(i + 1, members)
                members.pop()

    rec(0, [])
    out = []
    for member_idx in sets:
        cls = tuple(classes[i] for i in member_idx)
        out.append(DisjointExceptionalSet(cls, classify_blowdown(r, cls)))
    return out


# ---------------------------------------------------------------------------
# nef cone series


@lru_cache(maxsize=None)
def nef_cone_pieces(r):
    cone = nef_cone(r).exponent_cone()
    return tuple(half_open_decompose(triangulate(cone)))


def nef_series_rational(r):
    """The all-ones series over nef lattice points, as a sum of half-open
    simplicial cone generating functions."""
    return [cone_series(h) for h in nef_cone_pieces(r)]


def nef_series_L(r, bound, grading=None):
    grading = grading or minus_k_grading(r)
    return expand_sum(nef_series_rational(r), grading, bound)


def nef_lattice_points(r, bound, orthogonal_to=(), grading=None):
    """Exponent vectors of nef classes with (-K)-degree <= bound, optionally
    restricted to the orthogonal complement of some classes."""
    grading = grading or minus_k_grading(r)
    n = r + 1
    rows = []
    for g in effective_generators(r):
        rows.append((tuple(-x for x in g.coeffs), 0))
    for c in orthogonal_to:
        rows.append((tuple(c.coeffs), 0))
        rows.append((tuple(-x for x in c.coeffs), 0))
    rows.append((grading, bound))
    rows.append((tuple(-x for x in grading), 0))
    return enumerate_lattice_points(rows, n)


def q_operator(r):
    """Second-order operator turning the all-ones nef series into the
    h^0-weighted one: (t0^2/2) d^2/dt0^2 + 2 t0 d/dt0
    - (1/2) sum_k tk^2 d^2/dtk^2 + 1."""
    n = r + 1
    half = Fraction(1, 2)
    zero = (0,) * n

    def unit(i, k=1):
        e = [0] * n
        e[i] = k
        return tuple(e)

    terms = [({unit(0, 2): half}, unit(0, 2)), ({unit(0): 2}, unit(0))]
    for k in range(1, n):
        terms.append(({unit(k, 2): -half}, unit(k, 2)))
    terms.append(({zero: 1}, zero))
    return terms


def weighted_nef_series_N(r, bound, grading=None):
    """h^0-weighted nef series, via the differential operator on the cone
    series and, independently, per-point Riemann-Roch evaluation."""
    grading = grading or minus_k_grading(r)
    ell = nef_series_L(r, bound, grading)
    via_op = apply_diff_op(q_operator(r), ell)
    direct = GradedTruncation(grading, bound, {
        x: _rr_value(PicClass.from_exponents(x)) for x in nef_lattice_points(r, bound)})
    if via_op != direct:
        raise InternalConsistencyError("weighted nef series routes disagree")
    return via_op


# ---------------------------------------------------------------------------
# the full effective series


def _exceptional_factor(classes, grading, bound):
    """prod over I of t^I/(1 - t^I) expanded: the series of strictly positive
    multiples of a disjoint set."""
    rank = len(grading)
    shift = (0,) * rank
    den = []
    for c in classes:
        shift = vec_add(shift, c.exponents())
        den.append(c.exponents())
    crf = ConeRationalFunction.make(LaurentPoly.monomial(shift), den)
    return expand(crf, grading, bound)


def _weighted_restricted_nef(r, members, grading, bound):
    pts = nef_lattice_points(r, bound, orthogonal_to=members, grading=grading)
    return GradedTruncation(grading, bound, {
        x: _rr_value(PicClass.from_exponents(x)) for x in pts})


def euler_chow(r, bound, grading=None):
    """Sum of h^0(D) t^D over all effective classes, grouped by the disjoint
    set of fixed (-1)-curves of the decomposition."""
    if r < 0 or r > 6:
        raise InputError("supported for r <= 6; r = 5, 6 are slow")
    grading = grading or minus_k_grading(r)
    total = GradedTruncation(grading, bound)
    for s in disjoint_exceptional_sets(r):
        weighted = _weighted_restricted_nef(r, s.classes, grading, bound)
        if s.classes:
            term = convolve(_exceptional_factor(s.classes, grading, bound), weighted)
        else:
            term = weighted
        total = total + term
    return total


def euler_chow_rational(r):
    """The same series as a finite sum of cone rational functions: per
    disjoint set, the exceptional-multiples factor times the Riemann-Roch
    weighted forms of the restricted nef cone pieces."""
    if r < 0 or r > 6:
        raise InputError("supported for r <= 6")
    n = r + 1
    weight = riemann_roch_weight(n)
    out = []
    for s in disjoint_exceptional_sets(r):
        ineqs = [g.coeffs for g in effective_generators(r)]
        for c in s.classes:
            ineqs.append(tuple(c.coeffs))
            ineqs.append(tuple(-x for x in c.coeffs))
        rays, lineality = dual_description(ineqs, n)
        if lineality:
            raise InternalConsistencyError("restricted nef cone has lineality")
        shift = (0,) * n
        den_extra = []
        for c in s.classes:
            shift = vec_add(shift, c.exponents())
            den_extra.append(c.exponents())
        if not rays:
            pieces = []
            base = [ConeRationalFunction.make(
                LaurentPoly.monomial(shift, weight.evaluate_int((0,) * n)), den_extra)]
        else:
            pieces = half_open_decompose(triangulate(RationalCone.make(rays, n)))
            base = []
            for h in pieces:
                wf = weighted_cone_rational(h, weight)
                base.append(ConeRationalFunction.make(
                    LaurentPoly.monomial(shift) * wf.numerator,
                    list(wf.denominator_factors) + den_extra))
        out.extend(base)
    return out


def euler_chow_oracle(r, bound, grading=None):
    """Brute force: enumerate every integer class in the degree box, keep the
    effective ones, and sum h^0(D) t^D directly."""
    if r < 0 or r > 6:
        raise InputError("supported for r <= 6")
    grading = grading or minus_k_grading(r)
    rays = nef_cone(r).rays
    ray_vecs = [n.coeffs for n in rays]
    kvec = canonical_class(r).coeffs
    max_ratio = max((Fraction(g.degree, -pair(canonical_class(r), g) and
                              pair(PicClass(r, (max(1, 1),) + (0,) * r) * 0 + -1 * canonical_class(r), g))
                     for g in effective_generators(r)), default=Fraction(0))
    # degree of an effective class is at most bound * max(d_I) over generators
    d_cap = bound * max((g.degree for g in effective_generators(r)), default=1)
    d_cap = max(d_cap, 0)
    coeffs = {}
    minus_k = -1 * canonical_class(r)

    def class_ok(cls):
        return all(dot(v, cls.exponents()) >= 0 for v in ray_vecs)

    for d in range(d_cap + 1):
        lo_total, hi_total = 3 * d - bound, 3 * d
        m = [0] * r

        def rec(i, acc):
            if i == r:
                if lo_total <= acc <= hi_total:
                    cls = PicClass(r, (d,) + tuple(m))
                    if class_ok(cls):
                        value = h0(cls)
                        if value:
                            coeffs[cls.exponents()] = value
                return
            remaining = r - i - 1
            lo_i = lo_total - acc - remaining * d
            hi_i = d
            for v in range(max(lo_i, -bound - 3 * d), hi_i + 1):
                m[i] = v
                rec(i + 1, acc + v)
            m[i] = 0

        if r == 0:
            if 0 <= 3 * d <= bound:
                coeffs[(d,)] = h0(PicClass(0, (d,)))
        else:
            rec(0, 0)
    out = {x: c for x, c in coeffs.items() if 0 <= dot(grading, x) <= bound}
    return GradedTruncation(grading, bound, out)


# ---------------------------------------------------------------------------
# orbit form


def _orbit_of_set(group, classes):
    start = frozenset(c.coeffs for c in classes)
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for s in frontier:
            for g in group:
                img = frozenset(g.apply(PicClass.make(c)).coeffs for c in s)
                if img not in seen:
                    seen.add(img)
                    nxt.append(img)
        frontier = nxt
    return seen


def _transform_sum(group, trunc):
    """sum over the group of the exponent-substituted copies of a truncation."""
    grading = trunc.grading
    items = trunc.sorted_items()
    if not items:
        return GradedTruncation(grading, trunc.bound)
    pts = np.array([e for e, _ in items], dtype=np.int64)
    vals = [c for _, c in items]
    acc = {}
    for g in group:
        mat = np.array(g.exponent_matrix(), dtype=np.int64)
        moved = pts @ mat.T
        for row, c in zip(moved.tolist(), vals):
            key = tuple(row)
            acc[key] = acc.get(key, 0) + c
    out = {e: c for e, c in acc.items() if 0 <= dot(grading, e) <= trunc.bound and c}
    return GradedTruncation(grading, trunc.bound, out)


def _scaled(trunc, denominator):
    out = {}
    for e, c in trunc.coeffs.items():
        if c % denominator:
            raise InternalConsistencyError("orbit sum not divisible by stabilizer order")
        out[e] = c // denominator
    return GradedTruncation(trunc.grading, trunc.bound, out)


def weyl_orbit_form(r, bound, grading=None):
    """The effective series evaluated literally as orbit sums over the
    lattice automorphism group: one standard term per blow-down type, summed
    over the whole group and divided by the stabilizer order."""
    if r < 1 or r > 5:
        raise InputError("orbit form supported for 1 <= r <= 5")
    group = weyl_group(r)
    if not group.complete:
        raise FeasibilityError("automorphism group exceeded the element cap")
    grading = grading or minus_k_grading(r)
    order = group.order
    total = GradedTruncation(grading, bound)
    for k in range(r + 1):
        members = tuple(basis_class(r, i) for i in range(k + 1, r + 1))
        weighted = _weighted_restricted_nef(r, members, grading, bound)
        if members:
            std = convolve(_exceptional_factor(members, grading, bound), weighted)
        else:
            std = weighted
        orbit = _orbit_of_set(group, members)
        stab = order // len(orbit)
        total = total + _scaled(_transform_sum(group, std), stab)
    if r >= 2:
        h_class = basis_class(r, 0)
        t_members = (PicClass.make((1, 1, 1) + (0,) * (r - 2)),) + tuple(
            basis_class(r, i) for i in range(3, r + 1))
        u = h_class - basis_class(r, 1)
        v = h_class - basis_class(r, 2)
        w = t_members[0]
        den = [u.exponents()] * 2 + [v.exponents()] * 2 + [w.exponents()]
        for c in t_members[1:]:
            den.append(c.exponents())
        shift = w.exponents()
        for c in t_members[1:]:
            shift = vec_add(shift, c.exponents())
        std = expand(ConeRationalFunction.make(LaurentPoly.monomial(shift), den),
                     grading, bound)
        orbit = _orbit_of_set(group, t_members)
        stab = order // len(orbit)
        total = total + _scaled(_transform_sum(group, std), stab)
    return total


# ---------------------------------------------------------------------------
# degree-capped witness for nine points


def minus_one_explorer_r9(d_max):
    """(-1)-classes of the nine-point blow-up with degree <= d_max, each with
    an extremality certificate: the functional h(D) = (I - K).D vanishes on I
    and is checked strictly positive on every other found class and on -K, so
    no I = D1 + D2 with both parts in the cone spanned by the found classes
    and -K is possible."""
    if d_max < 0 or d_max > 50:
        raise InputError("need 0 <= d_max <= 50")
    classes = minus_one_classes(9, d_max)
    minus_k = -1 * canonical_class(9)
    out = []
    for i_cls in classes:
        witness = i_cls - canonical_class(9)
        ok = pair(witness, minus_k) > 0 and pair(witness, i_cls) == 0
        if ok:
            for other in classes:
                if other is i_cls or other == i_cls:
                    continue
                if pair(witness, other) <= 0:
                    ok = False
                    break
        out.append((i_cls, {"functional": witness.coeffs, "extreme": ok}))
    return out


def sample_effective_classes(r, count, seed, d_cap=10):
    """Deterministic sample of effective classes with degree <= d_cap, drawn
    as random nonnegative combinations of the effective generators."""
    import random

    rng = random.Random(seed)
    gens = effective_generators(r)
    out = []
    while len(out) < count:
        cls = PicClass(r, (0,) * (r + 1))
        for g in gens:
            if rng.random() < 0.35:
                cls = cls + rng.randint(1, 3) * g
        if cls.is_zero() or cls.degree > d_cap:
            continue
        out.append(cls)
    return out
