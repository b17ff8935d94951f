"""Exact convex polytopes in low dimension.

Polytopes carry both an H-representation (closed halfspaces) and a
V-representation computed on demand by exhaustive vertex enumeration.
Volumes and polynomial integrals use a pulling triangulation and the
Dirichlet formula on the standard simplex, done in integer arithmetic
after clearing denominators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from itertools import combinations
from math import gcd, lcm
from typing import Iterable, Sequence

from .exactmath import Polynomial, as_rational, parse_inequalities
from .exactmath.linalg import int_det, int_solve, nullspace, rank, solve

MAX_DIMENSION = 5


class PolytopeError(ValueError):
    pass


class UnboundedPolytopeError(PolytopeError):
    pass


class DegeneratePolytopeError(PolytopeError):
    pass


@dataclass(frozen=True)
class Halfspace:
    """The closed halfspace ``normal . x <= offset``."""

    normal: tuple[Fraction, ...]
    offset: Fraction

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(as_rational(c) for c in self.normal))
        object.__setattr__(self, "offset", as_rational(self.offset))
        if not any(self.normal):
            raise PolytopeError("halfspace normal is zero")

    @property
    def dim(self) -> int:
        return len(self.normal)

    def value(self, x: Sequence) -> Fraction:
        return sum((a * b for a, b in zip(self.normal, x)), Fraction(0))

    def contains(self, x: Sequence) -> bool:
        return self.value(x) <= self.offset

    def slack(self, x: Sequence) -> Fraction:
        return self.offset - self.value(x)

    def normalized(self) -> "Halfspace":
        """Same halfspace with a primitive integer normal."""
        den = reduce(lcm, (c.denominator for c in self.normal), self.offset.denominator)
        ints = [int(c * den) for c in self.normal]
        g = reduce(gcd, (abs(c) for c in ints))
        return Halfspace(tuple(Fraction(c, g) for c in ints), self.offset * den / g)

    def complement(self) -> "Halfspace":
        """Closure of the complementary halfspace."""
        return Halfspace(tuple(-c for c in self.normal), -self.offset)

    @classmethod
    def from_polynomial(cls, p: Polynomial, variables: Sequence[str]) -> "Halfspace":
        """Halfspace ``p <= 0`` for an affine ``p`` over ``variables``."""
        if p.degree() > 1:
            raise PolytopeError(f"constraint {p} <= 0 is not linear")
        p = p.with_variables(variables)
        n = len(variables)
        normal = [p.terms.get(tuple(int(j == i) for j in range(n)), Fraction(0)) for i in range(n)]
        return cls(tuple(normal), -p.terms.get((0,) * n, Fraction(0)))


def parse_halfspaces(constraints: Iterable[str], variables: Sequence[str]) -> list[Halfspace]:
    out = []
    for text in constraints:
        for p in parse_inequalities(text, variables):
            extra = [v for v in p.free_variables() if v not in variables]
            if extra:
                raise PolytopeError(f"constraint {text!r} uses unknown variables {extra}")
            if p.is_constant():
                if p.constant_value() > 0:
                    raise PolytopeError(f"constraint {text!r} is never satisfied")
                continue
            out.append(Halfspace.from_polynomial(p, variables))
    return out


def _integer_rows(halfspaces: Sequence[Halfspace]) -> list[tuple[list[int], int]]:
    rows = []
    for h in halfspaces:
        den = reduce(lcm, (c.denominator for c in h.normal), h.offset.denominator)
        rows.append(([int(c * den) for c in h.normal], int(h.offset * den)))
    return rows


def _affine_rank(points: Sequence[Sequence[Fraction]]) -> int:
    if len(points) <= 1:
        return 0
    p0 = points[0]
    return rank([[a - b for a, b in zip(p, p0)] for p in points[1:]])


class Polytope:
    """Bounded convex polytope ``{x : normal . x <= offset for every halfspace}``.

    Equality and hashing use the (normalized, deduplicated, sorted)
    H-representation.
    """

    def __init__(self, halfspaces: Iterable[Halfspace], dim: int | None = None, *, check_bounded: bool = True):
        hs = list(halfspaces)
        if dim is None:
            if not hs:
                raise PolytopeError("dimension is required when there are no halfspaces")
            dim = hs[0].dim
        if not 1 <= dim <= MAX_DIMENSION:
            raise PolytopeError(f"dimension {dim} outside 1..{MAX_DIMENSION}")
        if any(h.dim != dim for h in hs):
            raise PolytopeError("halfspaces of mixed dimension")
        self.dim = dim
        self.halfspaces = tuple(sorted({h.normalized() for h in hs}, key=lambda h: (h.normal, h.offset)))
        if rank([h.normal for h in self.halfspaces]) < dim:
            raise UnboundedPolytopeError("halfspace normals do not span the space")
        if check_bounded and self.vertices:
            self._check_bounded()

    @classmethod
    def from_constraints(cls, constraints: Iterable[str], variables: Sequence[str]) -> "Polytope":
        return cls(parse_halfspaces(constraints, variables), len(variables))

    @classmethod
    def box(cls, lows: Sequence, highs: Sequence) -> "Polytope":
        d = len(lows)
        hs = []
        for i, (lo, hi) in enumerate(zip(lows, highs)):
            e = tuple(Fraction(int(j == i)) for j in range(d))
            hs.append(Halfspace(e, hi))
            hs.append(Halfspace(tuple(-c for c in e), -as_rational(lo)))
        return cls(hs, d)

    # V-representation ------------------------------------------------------
    @cached_property
    def vertices(self) -> tuple[tuple[Fraction, ...], ...]:
        d = self.dim
        rows = _integer_rows(self.halfspaces)
        found = set()
        for subset in combinations(range(len(rows)), d):
            sol = int_solve([rows[i][0] for i in subset], [rows[i][1] for i in subset])
            if sol is None:
                continue
            nums, den = sol
            if all(sum(a * x for a, x in zip(normal, nums)) <= off * den for normal, off in rows):
                found.add(tuple(Fraction(x, den) for x in nums))
        return tuple(sorted(found))

    def _check_bounded(self) -> None:
        rows = [r for r, _ in _integer_rows(self.halfspaces)]
        d = self.dim
        for subset in combinations(range(len(rows)), d - 1):
            sub = [rows[i] for i in subset]
            if d > 1 and rank(sub) < d - 1:
                continue
            ray = nullspace(sub, d) if sub else nullspace([], d)
            if len(ray) != 1:
                continue
            y = ray[0]
            for sign in (1, -1):
                if all(sign * sum(a * b for a, b in zip(r, y)) <= 0 for r in rows):
                    raise UnboundedPolytopeError(f"recession direction {[sign * c for c in y]}")

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    @cached_property
    def affine_dimension(self) -> int:
        return _affine_rank(self.vertices) if self.vertices else -1

    @property
    def is_full_dimensional(self) -> bool:
        return self.affine_dimension == self.dim

    @cached_property
    def incidence(self) -> tuple[frozenset, ...]:
        """Vertex indices on each halfspace's boundary, in halfspace order."""
        return tuple(
            frozenset(i for i, v in enumerate(self.vertices) if h.value(v) == h.offset)
            for h in self.halfspaces
        )

    @cached_property
    def facets(self) -> tuple[tuple[Halfspace, frozenset], ...]:
        if not self.is_full_dimensional:
            return ()
        out = []
        seen = set()
        for h, tight in zip(self.halfspaces, self.incidence):
            if tight in seen:
                continue
            if _affine_rank([self.vertices[i] for i in tight]) == self.dim - 1:
                seen.add(tight)
                out.append((h, tight))
        return tuple(out)

    def contains(self, x: Sequence) -> bool:
        return all(h.contains(x) for h in self.halfspaces)

    def interior_point(self) -> tuple[Fraction, ...]:
        """Vertex barycenter; interior when full-dimensional."""
        n = len(self.vertices)
        if not n:
            raise PolytopeError("empty polytope")
        return tuple(sum(c) / n for c in zip(*self.vertices))

    def intersect(self, other: "Polytope | Iterable[Halfspace]", *, check_bounded: bool = False) -> "Polytope":
        extra = other.halfspaces if isinstance(other, Polytope) else tuple(other)
        return Polytope(self.halfspaces + tuple(extra), self.dim, check_bounded=check_bounded)

    # triangulation ---------------------------------------------------------
    @cached_property
    def triangulation(self) -> tuple[tuple[int, ...], ...]:
        """Pulling triangulation as tuples of vertex indices."""
        if not self.is_full_dimensional:
            return ()
        memo: dict[frozenset, int] = {}
        verts = self.vertices

        def dim_of(ids: frozenset) -> int:
            if ids not in memo:
                memo[ids] = _affine_rank([verts[i] for i in sorted(ids)])
            return memo[ids]

        tights = [t for t in set(self.incidence) if t]

        def facets_of(face: frozenset, k: int) -> list[frozenset]:
            out = set()
            for t in tights:
                sub = face & t
                if sub != face and len(sub) >= k and dim_of(sub) == k - 1:
                    out.add(sub)
            return sorted(out, key=sorted)

        def pull(face: frozenset, k: int) -> list[tuple[int, ...]]:
            if len(face) == k + 1:
                return [tuple(sorted(face))]
            apex = min(face)
            simplices = []
            for facet in facets_of(face, k):
                if apex in facet:
                    continue
                for s in pull(facet, k - 1):
                    simplices.append((apex,) + s)
            return simplices

        return tuple(pull(frozenset(range(len(verts))), self.dim))

    # measure ---------------------------------------------------------------
    def volume(self) -> Fraction:
        return integrate_polynomial(self, Polynomial.constant(1, _coords(self.dim)))

    def __eq__(self, other):
        if not isinstance(other, Polytope):
            return NotImplemented
        return self.dim == other.dim and self.halfspaces == other.halfspaces

    def __hash__(self):
        return hash((self.dim, self.halfspaces))

    def __repr__(self):
        return f"Polytope(dim={self.dim}, halfspaces={len(self.halfspaces)})"


def _coords(d: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(d))


def convex_hull(points: Iterable[Sequence]) -> Polytope:
    """Full-dimensional convex hull of rational points, both representations validated."""
    pts = sorted({tuple(as_rational(c) for c in p) for p in points})
    if not pts:
        raise DegeneratePolytopeError("no points")
    d = len(pts[0])
    if any(len(p) != d for p in pts):
        raise DegeneratePolytopeError("points of mixed dimension")
    if _affine_rank(pts) < d:
        raise DegeneratePolytopeError(f"points span an affine space of dimension {_affine_rank(pts)} < {d}")
    halfspaces = set()
    for subset in combinations(pts, d):
        p0 = subset[0]
        diffs = [[a - b for a, b in zip(p, p0)] for p in subset[1:]]
        normals = nullspace(diffs, d) if diffs else nullspace([], d)
        if len(normals) != 1:
            continue
        n = normals[0]
        c = sum(a * b for a, b in zip(n, p0))
        vals = [sum(a * b for a, b in zip(n, p)) for p in pts]
        if all(v <= c for v in vals):
            halfspaces.add(Halfspace(tuple(n), c).normalized())
        elif all(v >= c for v in vals):
            halfspaces.add(Halfspace(tuple(-a for a in n), -c).normalized())
    poly = Polytope(halfspaces, d)
    point_set = set(pts)
    if not set(poly.vertices) <= point_set or not all(poly.contains(p) for p in pts):
        raise PolytopeError("H- and V-representations disagree")  # pragma: no cover
    return poly


# integration -----------------------------------------------------------------

_FACT = [1]


def _fact(n: int) -> int:
    while len(_FACT) <= n:
        _FACT.append(_FACT[-1] * len(_FACT))
    return _FACT[n]


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            out[key] = out.get(key, 0) + ca * cb
    return out


def _linear(const: int, coeffs: Sequence[int]) -> dict:
    d = len(coeffs)
    out = {}
    if const:
        out[(0,) * d] = const
    for j, c in enumerate(coeffs):
        if c:
            out[tuple(int(i == j) for i in range(d))] = c
    return out


def _simplex_moments(
    verts: Sequence[Sequence[Fraction]],
    f: Polynomial,
    form: tuple[Sequence[Fraction], Fraction] | None,
    jmax: int,
) -> list[Fraction]:
    """Integrals of ``f * form**j`` (j = 0..jmax) over one simplex.

    ``f`` is positional over the simplex coordinates; ``form`` is
    ``(a, b)`` meaning ``a . x + b``.
    """
    d = len(verts[0])
    L = reduce(lcm, (c.denominator for v in verts for c in v), 1)
    V = [[int(c * L) for c in v] for v in verts]
    edges = [[V[j][i] - V[0][i] for i in range(d)] for j in range(1, d + 1)]
    jac = abs(int_det(edges))
    if jac == 0:
        return [Fraction(0)] * (jmax + 1)
    # X_i(lam) = V0_i + sum_j lam_j * E_j_i, and x_i = X_i / L
    X = [_linear(V[0][i], [edges[j][i] for j in range(d)]) for i in range(d)]
    D = max(f.degree(), 0)
    scaled = {e: c * L ** (D - sum(e)) for e, c in f.terms.items()}
    M = reduce(lcm, (c.denominator for c in scaled.values()), 1)
    powers: dict[tuple[int, int], dict] = {}

    def power(i: int, k: int) -> dict:
        if (i, k) not in powers:
            powers[(i, k)] = {(0,) * d: 1} if k == 0 else _poly_mul(power(i, k - 1), X[i])
        return powers[(i, k)]

    Q: dict = {}
    for exps, c in scaled.items():
        term = {(0,) * d: int(c * M)}
        for i, e in enumerate(exps):
            if e:
                term = _poly_mul(term, power(i, e))
        for k, v in term.items():
            Q[k] = Q.get(k, 0) + v
    base = Fraction(jac, M * L**D * L**d)
    results = []
    if form is not None:
        a, b = form
        K = reduce(lcm, (c.denominator for c in list(a) + [b]), 1)
        ai = [int(c * K) for c in a]
        # K*(a.x + b) = (sum_i ai X_i + K b L) / L
        ell: dict = {(0,) * d: int(b * K) * L}
        for i, c in enumerate(ai):
            if c:
                for k, v in X[i].items():
                    ell[k] = ell.get(k, 0) + c * v
        ell = {k: v for k, v in ell.items() if v}
    for j in range(jmax + 1):
        if j:
            Q = _poly_mul(Q, ell)
        by_degree: dict[int, int] = {}
        for exps, c in Q.items():
            g = sum(exps)
            w = c
            for e in exps:
                if e > 1:
                    w *= _fact(e)
            by_degree[g] = by_degree.get(g, 0) + w
        total = sum((Fraction(s, _fact(g + d)) for g, s in by_degree.items()), Fraction(0))
        scale = base if j == 0 else base / (K * L) ** j
        results.append(total * scale)
    return results


def _positional(P: Polytope, f: Polynomial) -> Polynomial:
    if len(f.variables) != P.dim:
        if f.is_constant():
            return Polynomial.constant(f.constant_value(), _coords(P.dim))
        raise PolytopeError(f"polynomial over {len(f.variables)} variables, polytope of dimension {P.dim}")
    return f


def integrate_polynomial(P: Polytope, f: Polynomial) -> Fraction:
    """Exact Lebesgue integral of ``f`` over ``P``; variables are matched by position."""
    f = _positional(P, f)
    if not P.is_full_dimensional:
        return Fraction(0)
    verts = P.vertices
    total = Fraction(0)
    for simplex in P.triangulation:
        total += _simplex_moments([verts[i] for i in simplex], f, None, 0)[0]
    return total


def volume(P: Polytope) -> Fraction:
    return P.volume()


@dataclass(frozen=True)
class DensityPiece:
    """Pushforward density on ``[lo, hi]`` as a polynomial in one variable."""

    lo: Fraction
    hi: Fraction
    density: Polynomial


def pushforward(P: Polytope, f: Polynomial, axis: int = 0, name: str = "u") -> list[DensityPiece]:
    """Density of ``f dx`` pushed to coordinate ``axis``.

    Between consecutive vertex heights the density is a polynomial of
    degree at most ``deg f + dim - 1``; it is recovered exactly from its
    moments against powers of the normalized height.
    """
    f = _positional(P, f)
    if not P.is_full_dimensional:
        return []
    d = P.dim
    if d == 1:
        lo, hi = P.vertices[0][0], P.vertices[-1][0]
        coeffs = f.univariate_coefficients() if f.variables else [f.constant_value()]
        return [DensityPiece(lo, hi, Polynomial.from_coefficients(coeffs, name))]
    heights = sorted({v[axis] for v in P.vertices})
    deg = max(f.degree(), 0) + d - 1
    e = tuple(Fraction(int(i == axis)) for i in range(d))
    pieces = []
    for lo, hi in zip(heights, heights[1:]):
        slab = P.intersect([Halfspace(e, hi), Halfspace(tuple(-c for c in e), -lo)])
        width = hi - lo
        form = (tuple(c / width for c in e), -lo / width)
        moments = [Fraction(0)] * (deg + 1)
        verts = slab.vertices
        for simplex in slab.triangulation:
            for j, m in enumerate(_simplex_moments([verts[i] for i in simplex], f, form, deg)):
                moments[j] += m
        # density rho(x) = sum_k c_k y^k with y = (x - lo)/width
        hilbert = [[width / (j + k + 1) for k in range(deg + 1)] for j in range(deg + 1)]
        c = solve(hilbert, moments)
        y = (Polynomial.variable(name) - lo) / width
        rho = Polynomial.constant(0, (name,))
        for k in reversed(range(deg + 1)):
            rho = rho * y + c[k]
        pieces.append(DensityPiece(lo, hi, rho.with_variables((name,))))
    return pieces


# cell unions -----------------------------------------------------------------


@dataclass
class CellUnionReport:
    total_volume: Fraction
    max_overlap: Fraction
    overlaps: list[tuple[int, int, Fraction]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.max_overlap == 0


def _separated(p: Polytope, q: Polytope) -> bool:
    for a, b in ((p, q), (q, p)):
        for h in a.halfspaces:
            if all(h.value(v) >= h.offset for v in b.vertices):
                return True
    return False


def overlap_volume(p: Polytope, q: Polytope) -> Fraction:
    if p.is_empty or q.is_empty or _separated(p, q):
        return Fraction(0)
    inter = p.intersect(q)
    return inter.volume() if inter.is_full_dimensional else Fraction(0)


def validate_cell_union(cells: Sequence[Polytope]) -> CellUnionReport:
    """Total volume and pairwise interior overlaps of a list of cells."""
    if cells and any(c.dim != cells[0].dim for c in cells):
        raise PolytopeError("cells of different dimension")
    total = sum((c.volume() for c in cells), Fraction(0))
    report = CellUnionReport(total, Fraction(0))
    for i, j in combinations(range(len(cells)), 2):
        ov = overlap_volume(cells[i], cells[j])
        if ov:
            report.overlaps.append((i, j, ov))
            report.max_overlap = max(report.max_overlap, ov)
    return report


@dataclass(frozen=True)
class CellUnion:
    cells: tuple[Polytope, ...]

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        if self.cells and any(c.dim != self.cells[0].dim for c in self.cells):
            raise PolytopeError("cells of different dimension")

    def validate(self) -> CellUnionReport:
        return validate_cell_union(self.cells)
