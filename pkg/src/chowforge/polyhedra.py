"""Lattice-point generating functions of pointed rational polyhedral cones.

The pipeline is: triangulate a pointed cone into simplicial pieces (placing
order), convert the pieces into half-open cones that partition the original
(so no inclusion-exclusion bookkeeping is needed downstream), enumerate each
piece's fundamental parallelepiped through a Hermite-style basis, and read off
the generating function

    sum_{D in cone} t^D  =  sum_pieces (sum_{w in domain} t^w) / prod_i (1 - t^{v_i}).

Everything is exact integer/rational arithmetic; graded truncations give the
series coefficients up to a bound, and an independent brute-force enumerator
(Fourier-Motzkin over the facet description) cross-checks the whole pipeline.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd

from .errors import InputError, InternalConsistencyError
from .intlinalg import (
    dot,
    gcd_of_maximal_minors,
    integer_rank,
    invert_fraction,
    primitive,
    right_kernel,
    row_hnf,
    saturation_basis,
    solve_exact,
    vec_add,
)


# ---------------------------------------------------------------------------
# sparse Laurent polynomials and graded truncations


class LaurentPoly:
    """Finite integer combination of monomials t^v, v an integer vector."""

    __slots__ = ("rank", "terms")

    def __init__(self, rank, terms=None):
        self.rank = rank
        self.terms = {}
        if terms:
            for e, c in dict(terms).items():
                if c:
                    self.terms[tuple(e)] = c

    @classmethod
    def monomial(cls, exponent, coeff=1):
        return cls(len(exponent), {tuple(exponent): coeff})

    @classmethod
    def one(cls, rank):
        return cls(rank, {(0,) * rank: 1})

    def __eq__(self, other):
        return (isinstance(other, LaurentPoly) and self.rank == other.rank
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.rank, tuple(sorted(self.terms.items()))))

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            elif e in out:
                del out[e]
        return LaurentPoly(self.rank, out)

    def __neg__(self):
        return LaurentPoly(self.rank, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = vec_add(e1, e2)
                out[e] = out.get(e, 0) + c1 * c2
        return LaurentPoly(self.rank, out)

    def __repr__(self):
        return f"LaurentPoly({self.rank}, {dict(sorted(self.terms.items()))})"

    def sorted_items(self):
        return sorted(self.terms.items())


class GradedTruncation:
    """Series coefficients on all lattice points with 0 <= grading <= bound."""

    __slots__ = ("grading", "bound", "coeffs")

    def __init__(self, grading, bound, coeffs=None):
        self.grading = tuple(grading)
        self.bound = bound
        self.coeffs = {}
        if coeffs:
            for e, c in dict(coeffs).items():
                if c:
                    e = tuple(e)
                    d = dot(self.grading, e)
                    if d < 0 or d > bound:
                        raise InputError(f"point {e} has grading {d} outside [0, {bound}]")
                    self.coeffs[e] = c

    def coefficient(self, point):
        return self.coeffs.get(tuple(point), 0)

    def restrict(self, bound):
        if bound > self.bound:
            raise InputError("cannot extend a truncation")
        keep = {e: c for e, c in self.coeffs.items() if dot(self.grading, e) <= bound}
        return GradedTruncation(self.grading, bound, keep)

    def __add__(self, other):
        if self.grading != other.grading:
            raise InputError("grading mismatch")
        b = min(self.bound, other.bound)
        out = {}
        for src in (self.coeffs, other.coeffs):
            for e, c in src.items():
                if dot(self.grading, e) <= b:
                    out[e] = out.get(e, 0) + c
        return GradedTruncation(self.grading, b, out)

    def scale(self, c):
        return GradedTruncation(self.grading, self.bound,
                                {e: c * v for e, v in self.coeffs.items()})

    def __eq__(self, other):
        return (isinstance(other, GradedTruncation)
                and self.grading == other.grading
                and self.bound == other.bound
                and self.coeffs == other.coeffs)

    def __repr__(self):
        n = len(self.coeffs)
        return f"GradedTruncation(grading={self.grading}, bound={self.bound}, {n} points)"

    def sorted_items(self):
        return sorted(self.coeffs.items())


@dataclass(frozen=True)
class ConeRationalFunction:
    """numerator / prod over denominator_factors v of (1 - t^v)."""

    numerator: LaurentPoly
    denominator_factors: tuple

    @classmethod
    def make(cls, numerator, denominator_factors):
        return cls(numerator, tuple(sorted(tuple(v) for v in denominator_factors)))

    @property
    def rank(self):
        return self.numerator.rank

    def denominator_poly(self):
        rank = self.rank
        out = LaurentPoly.one(rank)
        for v in self.denominator_factors:
            out = out * (LaurentPoly.one(rank) - LaurentPoly.monomial(v))
        return out


# ---------------------------------------------------------------------------
# cones


@dataclass(frozen=True)
class RationalCone:
    ambient_rank: int
    generators: tuple

    @classmethod
    def make(cls, generators, ambient_rank=None):
        gens = []
        for g in generators:
            g = tuple(int(x) for x in g)
            if not any(g):
                raise InputError("zero vector is not a cone generator")
            gens.append(primitive(g))
        if ambient_rank is None:
            if not gens:
                raise InputError("ambient rank required for the empty cone")
            ambient_rank = len(gens[0])
        if any(len(g) != ambient_rank for g in gens):
            raise InputError("generator rank mismatch")
        return cls(ambient_rank, tuple(sorted(set(gens))))

    def dual(self):
        """(rays, lineality) of {y : y.g >= 0 for all generators g}.

        The rays are the facet normals of the cone; the lineality basis spans
        the orthogonal complement of the cone's linear span, so it encodes the
        equations cutting out that span.
        """
        return dual_description(self.generators, self.ambient_rank)

    def positive_functional(self):
        """An integer functional strictly positive on every generator, or None.

        Existence certifies pointedness: the functional is the sum of the
        extreme rays of the dual cone, positive on all generators exactly when
        no nonzero v has both v and -v inside the cone.
        """
        if not self.generators:
            return (1,) * self.ambient_rank
        rays, _ = self.dual()
        delta = (0,) * self.ambient_rank
        for r in rays:
            delta = vec_add(delta, r)
        if all(dot(delta, g) > 0 for g in self.generators):
            return delta
        return None

    def is_pointed(self):
        return self.positive_functional() is not None

    def is_simplicial(self):
        return integer_rank(self.generators) == len(self.generators)

    def contains(self, x):
        rays, lineality = self.dual()
        x = tuple(x)
        return (all(dot(r, x) >= 0 for r in rays)
                and all(dot(l, x) == 0 for l in lineality))


@dataclass(frozen=True)
class HalfOpenSimplicialCone:
    """Simplicial cone with, per generator, an optional excluded opposite facet."""

    ambient_rank: int
    generators: tuple
    open_flags: tuple

    @classmethod
    def make(cls, generators, open_flags=None):
        gens = tuple(tuple(int(x) for x in g) for g in generators)
        if not gens:
            raise InputError("half-open cone needs at least one generator")
        if any(not any(g) for g in gens):
            raise InputError("zero vector is not a cone generator")
        rank = len(gens[0])
        if integer_rank(gens) != len(gens):
            raise InputError("generators must be linearly independent")
        if open_flags is None:
            open_flags = (False,) * len(gens)
        open_flags = tuple(bool(b) for b in open_flags)
        if len(open_flags) != len(gens):
            raise InputError("one open flag per generator")
        return cls(rank, gens, open_flags)

    def closed(self):
        return RationalCone.make(self.generators, self.ambient_rank)


# ---------------------------------------------------------------------------
# double description: generators of a cone given by inequalities


def _extreme_filter(rays, processed, n, lin_count):
    """Keep rays lying on a minimal face, i.e. with active-constraint rank
    exactly n - lin_count - 1."""
    target = n - lin_count - 1
    keep = []
    for r in rays:
        active = [b for b in processed if dot(b, r) == 0]
        if integer_rank(active) == target:
            keep.append(r)
    return keep


def dual_description(ineqs, n):
    """Generators of the cone {y in R^n : a.y >= 0 for every a in ineqs}.

    Returns (rays, lineality): sorted primitive extreme rays modulo the
    lineality space, and a basis of the lineality space itself.
    """
    todo = sorted({primitive(tuple(a)) for a in ineqs if any(a)})
    lineality = [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)]
    rays = []
    processed = []
    for a in todo:
        pidx = next((i for i, l in enumerate(lineality) if dot(a, l) != 0), None)
        if pidx is not None:
            pivot = lineality[pidx]
            if dot(a, pivot) < 0:
                pivot = tuple(-x for x in pivot)
            pa = dot(a, pivot)
            new_lin = []
            for i, l in enumerate(lineality):
                if i == pidx:
                    continue
                al = dot(a, l)
                new_lin.append(primitive(tuple(pa * li - al * pi for li, pi in zip(l, pivot)))
                               if al else l)
            new_rays = {pivot}
            for r in rays:
                ar = dot(a, r)
                rr = primitive(tuple(pa * ri - ar * pi for ri, pi in zip(r, pivot)))
                if any(rr):
                    new_rays.add(rr)
            lineality = new_lin
            rays = sorted(new_rays)
        else:
            plus = [r for r in rays if dot(a, r) > 0]
            zero = [r for r in rays if dot(a, r) == 0]
            minus = [r for r in rays if dot(a, r) < 0]
            if minus:
                fresh = set()
                for u in plus:
                    for v in minus:
                        if not _adjacent(u, v, rays, processed):
                            continue
                        w = primitive(tuple(dot(a, u) * vi - dot(a, v) * ui
                                            for ui, vi in zip(u, v)))
                        if any(w):
                            fresh.add(w)
                rays = sorted(set(plus) | set(zero) | fresh)
            # with no negative rays the inequality is redundant on the pointed part
        processed.append(a)
        rays = sorted(_extreme_filter(rays, processed, n, len(lineality)))
    lineality = sorted(_sign_normalize(l) for l in lineality)
    return tuple(rays), tuple(lineality)


def _adjacent(u, v, rays, processed):
    common = [b for b in processed if dot(b, u) == 0 and dot(b, v) == 0]
    for w in rays:
        if w == u or w == v:
            continue
        if all(dot(b, w) == 0 for b in common):
            return False
    return True


def _sign_normalize(v):
    for x in v:
        if x < 0:
            return tuple(-y for y in v)
        if x > 0:
            return tuple(v)
    return tuple(v)


# ---------------------------------------------------------------------------
# triangulation


def triangulate(cone):
    """Placing triangulation of a pointed cone, processing generators in
    sorted order.  Pieces are simplicial, cover the cone, and meet along
    common faces."""
    if not isinstance(cone, RationalCone):
        cone = RationalCone.make(cone)
    if cone.positive_functional() is None:
        raise InputError("cone is not pointed")
    gens = list(cone.generators)  # already sorted and primitive
    if not gens:
        return []
    pieces = []  # lists of generator indices; every piece spans the current span
    span_idx = []  # indices whose generators span the current linear span

    def coords_in(piece, x):
        return solve_exact([gens[i] for i in piece], x)

    for idx, g in enumerate(gens):
        if not pieces:
            pieces = [[idx]]
            span_idx = [idx]
            continue
        in_span = solve_exact([gens[i] for i in span_idx], g) is not None
        if not in_span:
            pieces = [p + [idx] for p in pieces]
            span_idx = span_idx + [idx]
            continue
        inside = False
        for p in pieces:
            c = coords_in(p, g)
            if c is not None and all(x >= 0 for x in c):
                inside = True
                break
        if inside:
            continue
        # cone over the facets visible from g
        facet_count = {}
        for p in pieces:
            for drop in p:
                f = frozenset(p) - {drop}
                facet_count[f] = facet_count.get(f, 0) + 1
        new_pieces = []
        for p in pieces:
            for drop in p:
                f = frozenset(p) - {drop}
                if facet_count[f] != 1 or not f:
                    continue
                h = _facet_normal([gens[i] for i in sorted(f)], gens[drop],
                                  [gens[i] for i in span_idx])
                if dot(h, g) < 0:
                    new_pieces.append(sorted(f) + [idx])
        pieces = pieces + new_pieces
    return [RationalCone.make([gens[i] for i in p], cone.ambient_rank) for p in pieces]


def _facet_normal(facet_gens, inner_gen, span_gens):
    """Integer normal of a facet within the span: zero on the facet, positive
    on the dropped generator."""
    basis = saturation_basis(span_gens)
    rows = []
    for fg in facet_gens:
        c = solve_exact(basis, fg)
        rows.append(tuple(int(x) for x in c))
    (k,) = right_kernel(rows)
    h = tuple(sum(k[i] * basis[i][j] for i in range(len(basis)))
              for j in range(len(basis[0])))
    s = dot(h, inner_gen)
    if s == 0:
        raise InternalConsistencyError("degenerate facet normal")
    if s < 0:
        h = tuple(-x for x in h)
    return h


def half_open_decompose(pieces):
    """Turn simplicial cones meeting along faces into half-open cones that
    partition their union: every lattice point of the union lies in exactly
    one piece.

    A facet is excluded exactly when a fixed generic interior point of the
    union lies strictly on its outside; the generic point is the sum of the
    first piece's generators, lexicographically perturbed so it avoids every
    facet hyperplane.
    """
    cones = []
    for p in pieces:
        if not isinstance(p, RationalCone):
            p = RationalCone.make(p)
        if not p.is_simplicial():
            raise InputError("pieces must be simplicial")
        cones.append(p)
    if not cones:
        return []
    span_gens = [g for c in cones for g in c.generators]
    d = integer_rank(span_gens)
    for c in cones:
        if len(c.generators) != d:
            raise InputError("pieces must all span the same space as their union")
    basis = saturation_basis(span_gens)
    q0 = (0,) * len(basis[0])
    for g in cones[0].generators:
        q0 = vec_add(q0, g)
    q0_c = tuple(int(x) for x in solve_exact(basis, q0))

    def generic_sign(h_c):
        # sign of h.(q0 + eps*b1 + eps^2*b2 + ...) for infinitesimal eps
        for val in (dot(h_c, q0_c),) + tuple(h_c):
            if val:
                return 1 if val > 0 else -1
        raise InternalConsistencyError("zero facet normal")

    out = []
    for c in cones:
        gens_c = [tuple(int(x) for x in solve_exact(basis, g)) for g in c.generators]
        flags = []
        for i in range(len(gens_c)):
            others = [gens_c[j] for j in range(len(gens_c)) if j != i]
            if others:
                (k,) = right_kernel(others)
            else:
                k = (1,) * len(basis) if len(basis) == 1 else None
                if k is None:
                    raise InternalConsistencyError("facet of a ray in higher rank")
            if dot(k, gens_c[i]) < 0:
                k = tuple(-x for x in k)
            flags.append(generic_sign(k) < 0)
        out.append(HalfOpenSimplicialCone.make(c.generators, flags))
    return out


# ---------------------------------------------------------------------------
# fundamental domains and cone series


def fundamental_domain(hoc):
    """Lattice points sum a_i v_i with a_i in [0,1), or (0,1] where the facet
    opposite v_i is excluded.  The count equals the gcd of the maximal minors
    of the generator matrix."""
    gens = hoc.generators
    m = len(gens)
    basis = saturation_basis(gens)
    cmat = []
    for v in gens:
        c = solve_exact(basis, v)
        if c is None or any(x.denominator != 1 for x in c):
            raise InternalConsistencyError("generator outside its own saturated lattice")
        cmat.append(tuple(int(x) for x in c))
    h, _ = row_hnf(cmat)
    diag = [h[j][j] for j in range(m)]
    cinv = invert_fraction(cmat)
    points = []
    for y in product(*[range(dj) for dj in diag]):
        a = [sum(Fraction(y[i]) * cinv[i][j] for i in range(m)) for j in range(m)]
        a = [x - (x.numerator // x.denominator) for x in a]  # now in [0,1)
        for i in range(m):
            if hoc.open_flags[i] and a[i] == 0:
                a[i] = Fraction(1)
        x = [Fraction(0)] * hoc.ambient_rank
        for i in range(m):
            for j in range(hoc.ambient_rank):
                x[j] += a[i] * gens[i][j]
        if any(v.denominator != 1 for v in x):
            raise InternalConsistencyError("non-integral fundamental domain point")
        points.append(tuple(int(v) for v in x))
    points.sort()
    expected = gcd_of_maximal_minors(gens)
    if len(points) != expected or len(set(points)) != expected:
        raise InternalConsistencyError("fundamental domain size != lattice index")
    return points


def cone_series(hoc):
    """Generating function of the half-open simplicial cone: the fundamental
    domain sum over the product of (1 - t^v) for its generators."""
    num = LaurentPoly(hoc.ambient_rank,
                      {w: 1 for w in fundamental_domain(hoc)})
    return ConeRationalFunction.make(num, hoc.generators)


def expand(crf, grading, bound):
    """Exact coefficients of a ConeRationalFunction for grading <= bound,
    by iterated geometric-series convolution."""
    grading = tuple(grading)
    for v in crf.denominator_factors:
        if dot(grading, v) <= 0:
            raise InputError(f"grading not positive on denominator vector {v}")
    acc = {}
    for e, c in crf.numerator.sorted_items():
        d = dot(grading, e)
        if d < 0:
            raise InputError(f"numerator term {e} has negative grading")
        if d <= bound:
            acc[e] = acc.get(e, 0) + c
    for v in crf.denominator_factors:
        nxt = {}
        for e in sorted(acc):
            c = acc[e]
            p = e
            while dot(grading, p) <= bound:
                nxt[p] = nxt.get(p, 0) + c
                p = vec_add(p, v)
        acc = nxt
    return GradedTruncation(grading, bound, acc)


def expand_sum(crfs, grading, bound):
    total = GradedTruncation(grading, bound)
    for f in crfs:
        total = total + expand(f, grading, bound)
    return total


# ---------------------------------------------------------------------------
# brute-force lattice point enumeration (the independent oracle)


def cone_lattice_points(cone, grading, bound):
    """All lattice points of the cone with grading value in [0, bound], found
    by exhaustive search over the facet description (Fourier-Motzkin bounds,
    no generating functions involved)."""
    if not isinstance(cone, RationalCone):
        cone = RationalCone.make(cone)
    grading = tuple(grading)
    for g in cone.generators:
        if dot(grading, g) <= 0:
            raise InputError("grading must be strictly positive on the cone")
    if not cone.generators:
        return [(0,) * cone.ambient_rank]
    rays, lineality = cone.dual()
    rows = []  # (a, c) meaning a.x <= c
    for f in rays:
        rows.append((tuple(-x for x in f), 0))
    for l in lineality:
        rows.append((tuple(l), 0))
        rows.append((tuple(-x for x in l), 0))
    rows.append((grading, bound))
    rows.append((tuple(-x for x in grading), 0))
    return _enumerate_box(rows, cone.ambient_rank)


def _normalize_rows(rows):
    out = set()
    for a, c in rows:
        if not any(a):
            if c < 0:
                return None  # infeasible
            continue
        g = 0
        for x in a:
            g = gcd(g, x)
        g = gcd(g, c)
        if g > 1:
            a = tuple(x // g for x in a)
            c = c // g
        out.add((tuple(a), c))
    return sorted(out)


def _enumerate_box(rows, n):
    systems = [None] * (n + 1)
    cur = _normalize_rows(rows)
    if cur is None:
        return []
    systems[n] = cur
    for k in range(n, 1, -1):
        j = k - 1
        plus = [r for r in cur if r[0][j] > 0]
        minus = [r for r in cur if r[0][j] < 0]
        zero = [r for r in cur if r[0][j] == 0]
        fresh = []
        for (a, c) in plus:
            for (b, d) in minus:
                coef_a = -b[j]
                coef_b = a[j]
                row = tuple(coef_a * ai + coef_b * bi for ai, bi in zip(a, b))
                fresh.append((row, coef_a * c + coef_b * d))
        cur = _normalize_rows(zero + fresh)
        if cur is None:
            return []
        systems[k - 1] = cur

    points = []
    x = [0] * n

    def recurse(level):
        sys_rows = systems[level + 1]
        lo, hi = None, None
        for a, c in sys_rows:
            aj = a[level]
            if aj == 0:
                continue
            rest = c - sum(a[i] * x[i] for i in range(level))
            b = Fraction(rest, aj)
            if aj > 0:
                hi = b if hi is None else min(hi, b)
            else:
                lo = b if lo is None else max(lo, b)
        if lo is None or hi is None:
            raise InputError("unbounded enumeration (grading not positive?)")
        lo_i = -((-lo.numerator) // lo.denominator)  # ceil
        hi_i = hi.numerator // hi.denominator        # floor
        for v in range(lo_i, hi_i + 1):
            x[level] = v
            if level + 1 == n:
                points.append(tuple(x))
            else:
                recurse(level + 1)

    recurse(0)
    points.sort()
    return points
