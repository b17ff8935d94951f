"""Weight valuations on a coordinatized variety and delta maps on the co-weight plane."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Mapping, Sequence

from .exactmath import AffineFunction, as_rational
from .polytope import Halfspace, Polytope, integrate_polynomial


class ValuationError(ValueError):
    pass


class ChartError(ValuationError):
    """The chart denominator does not attain the minimal shifted weight."""


class GFunctionError(ValuationError):
    def __init__(self, coordinate: str, expected: Fraction, got: Fraction):
        super().__init__(f"G-function gives {got} at the image of {coordinate}, shifted weight is {expected}")
        self.coordinate = coordinate


@dataclass(frozen=True)
class WeightVector:
    coordinates: tuple[str, ...]
    values: tuple[Fraction, ...]
    lattice: tuple[Fraction, Fraction] | None = None

    def __post_init__(self):
        object.__setattr__(self, "coordinates", tuple(self.coordinates))
        object.__setattr__(self, "values", tuple(as_rational(v) for v in self.values))
        if len(self.coordinates) != len(self.values):
            raise ValuationError("one weight per coordinate is required")
        if self.lattice is not None:
            object.__setattr__(self, "lattice", tuple(as_rational(v) for v in self.lattice))

    def __getitem__(self, name: str) -> Fraction:
        try:
            return self.values[self.coordinates.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def as_dict(self) -> dict[str, Fraction]:
        return dict(zip(self.coordinates, self.values))


def combine(terms: Iterable[tuple[object, WeightVector]], lattice=None) -> WeightVector:
    """Rational linear combination sum(c * w)."""
    terms = [(as_rational(c), w) for c, w in terms]
    coords = terms[0][1].coordinates
    if any(w.coordinates != coords for _, w in terms):
        raise ValuationError("weights on different coordinates")
    values = [sum((c * w.values[i] for c, w in terms), Fraction(0)) for i in range(len(coords))]
    return WeightVector(coords, tuple(values), lattice)


def lattice_weight(a, b, eta: WeightVector, zeta: WeightVector) -> WeightVector:
    """The weight a*eta + b*zeta, remembering (a, b)."""
    return combine([(a, eta), (b, zeta)], lattice=(a, b))


@dataclass(frozen=True)
class Chart:
    name: str
    denominator: str
    coordinates: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "coordinates", tuple(self.coordinates))
        if self.denominator in self.coordinates:
            raise ValuationError(f"chart {self.name}: denominator is also a chart coordinate")


@dataclass(frozen=True)
class CoordinateSystem:
    """Ambient coordinates with their images in the Okounkov body."""

    names: tuple[str, ...]
    images: Mapping[str, tuple[Fraction, ...]]
    body: Polytope
    degree: Fraction
    body_variables: tuple[str, ...] = ("w", "x", "y", "z")

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(
            self, "images", {k: tuple(as_rational(c) for c in v) for k, v in dict(self.images).items()}
        )
        object.__setattr__(self, "degree", as_rational(self.degree))
        object.__setattr__(self, "body_variables", tuple(self.body_variables))
        d = len(self.body_variables)
        if set(self.images) != set(self.names):
            raise ValuationError("every coordinate needs an image point")
        if any(len(p) != d for p in self.images.values()):
            raise ValuationError(f"image points must have {d} coordinates")
        if self.body.dim != d:
            raise ValuationError("Okounkov body dimension does not match the image points")
        origins = [n for n in self.names if not any(self.images[n])]
        if len(origins) != 1:
            raise ValuationError(f"exactly one coordinate must map to the origin, found {origins}")
        for k in range(d):
            e = tuple(Fraction(int(i == k)) for i in range(d))
            hits = [n for n in self.names if self.images[n] == e]
            if len(hits) != 1:
                raise ValuationError(f"basis vector e{k + 1} must be the image of exactly one coordinate, found {hits}")

    @property
    def origin_coordinate(self) -> str:
        return next(n for n in self.names if not any(self.images[n]))

    @property
    def basis_coordinates(self) -> tuple[str, ...]:
        d = len(self.body_variables)
        out = []
        for k in range(d):
            e = tuple(Fraction(int(i == k)) for i in range(d))
            out.append(next(n for n in self.names if self.images[n] == e))
        return tuple(out)

    @property
    def chart(self) -> Chart:
        return Chart("body", self.origin_coordinate, self.basis_coordinates)


def shift_weight(w: WeightVector) -> tuple[WeightVector, frozenset[str]]:
    low = min(w.values)
    shifted = WeightVector(w.coordinates, tuple(v - low for v in w.values), w.lattice)
    return shifted, frozenset(n for n, v in zip(w.coordinates, w.values) if v == low)


def log_discrepancy(shifted: WeightVector, chart: Chart) -> Fraction:
    if shifted[chart.denominator] != min(shifted.values):
        raise ChartError(
            f"chart {chart.name}: denominator {chart.denominator} has shifted weight "
            f"{shifted[chart.denominator]}, minimum is {min(shifted.values)}"
        )
    return sum((shifted[c] for c in chart.coordinates), Fraction(0))


def g_function(shifted: WeightVector, cs: CoordinateSystem) -> AffineFunction:
    """Affine function on the Okounkov body interpolating the shifted weights."""
    const = shifted[cs.origin_coordinate]
    coeffs = tuple(shifted[n] - const for n in cs.basis_coordinates)
    G = AffineFunction(cs.body_variables, coeffs, const)
    for name in cs.names:
        got = G(cs.images[name])
        if got != shifted[name]:
            raise GFunctionError(name, shifted[name], got)
    return G


def s_invariant(G: AffineFunction, cs: CoordinateSystem) -> Fraction:
    vol = cs.body.volume()
    return cs.degree * integrate_polynomial(cs.body, G.as_polynomial()) / vol


# delta maps ------------------------------------------------------------------


def primitive(v: Sequence[Fraction]) -> tuple[int, ...]:
    den = reduce(lambda a, b: a * b // gcd(a, b), (Fraction(c).denominator for c in v), 1)
    ints = [int(Fraction(c) * den) for c in v]
    g = reduce(gcd, (abs(c) for c in ints)) or 1
    return tuple(c // g for c in ints)


def _angle_key(v: Sequence[int]):
    # half-plane index, then an exact monotone proxy for the angle within it
    x, y = v
    upper = y > 0 or (y == 0 and x > 0)
    return (0 if upper else 1, Fraction(-x, abs(x) + abs(y)) if upper else Fraction(x, abs(x) + abs(y)))


def _cross(u, v) -> Fraction:
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class DeltaRegion:
    name: str
    cone: tuple[Halfspace, ...]
    A: AffineFunction
    S: AffineFunction
    chart: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "cone", tuple(self.cone))
        for h in self.cone:
            if h.offset != 0 or h.dim != 2:
                raise ValuationError(f"region {self.name}: cone halfspaces must be homogeneous in (a, b)")
        if not (self.A.is_homogeneous and self.S.is_homogeneous):
            raise ValuationError(f"region {self.name}: A and S must be homogeneous")

    def contains(self, p: Sequence) -> bool:
        return all(h.contains(p) for h in self.cone)

    def extreme_rays(self) -> tuple[tuple[int, ...], ...]:
        rays = set()
        for h in self.cone:
            n = h.normal
            for d in ((-n[1], n[0]), (n[1], -n[0])):
                if self.contains(d):
                    rays.add(primitive(d))
        return tuple(sorted(rays, key=_angle_key))

    def ratio(self, p: Sequence) -> Fraction:
        s = self.S(p)
        if s <= 0:
            raise ValuationError(f"region {self.name}: S is not positive at {tuple(p)}")
        return self.A(p) / s


@dataclass(frozen=True)
class DeltaMap:
    regions: tuple[DeltaRegion, ...]
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "scale", as_rational(self.scale))

    def regions_at(self, p: Sequence) -> list[DeltaRegion]:
        return [r for r in self.regions if r.contains(p)]

    def all_rays(self) -> list[tuple[int, ...]]:
        rays = {ray for r in self.regions for ray in r.extreme_rays()}
        return sorted(rays, key=_angle_key)

    def validate(self) -> list[str]:
        """Problems found: pointedness, positivity, coverage, boundary agreement."""
        problems = []
        for r in self.regions:
            rays = r.extreme_rays()
            if len(rays) != 2:
                problems.append(f"region {r.name}: cone is not pointed with two extreme rays ({rays})")
                continue
            inside = (rays[0][0] + rays[1][0], rays[0][1] + rays[1][1])
            if not r.contains(inside) or _cross(rays[0], rays[1]) == 0:
                problems.append(f"region {r.name}: degenerate cone")
                continue
            for f, label in ((r.A, "A"), (r.S, "S")):
                if any(f(ray) < 0 for ray in rays) or f(inside) <= 0:
                    problems.append(f"region {r.name}: {label} is not positive on the interior")
        rays = self.all_rays()
        probes = list(rays)
        for i, u in enumerate(rays):
            v = rays[(i + 1) % len(rays)]
            if len(rays) == 1 or _cross(u, v) <= 0:
                probes.append((-u[1], u[0]))
            else:
                probes.append((u[0] + v[0], u[1] + v[1]))
        for p in probes or [(1, 0)]:
            if not self.regions_at(p):
                problems.append(f"direction {tuple(p)} is not covered by any region")
        for ray in rays:
            try:
                values = {r.name: self.scale * r.ratio(ray) for r in self.regions_at(ray)}
            except ValuationError as exc:
                problems.append(str(exc))
                continue
            if len(set(values.values())) > 1:
                problems.append(f"regions disagree on ray {ray}: {values}")
        return problems

    def delta_at(self, p: Sequence) -> Fraction:
        p = tuple(as_rational(c) for c in p)
        if not any(p):
            raise ValuationError("delta is undefined at the origin")
        hits = self.regions_at(p)
        if not hits:
            raise ValuationError(f"no region contains {p}")
        values = {self.scale * r.ratio(p) for r in hits}
        if len(values) > 1:
            raise ValuationError(f"regions disagree at {p}: {sorted(values)}")
        return values.pop()

    def minimize(self, regions: Sequence[str] | None = None) -> tuple[Fraction, list[tuple[int, ...]]]:
        chosen = [r for r in self.regions if regions is None or r.name in regions]
        if regions is not None and len(chosen) != len(set(regions)):
            raise ValuationError(f"unknown regions in {list(regions)}")
        best = None
        where: list[tuple[int, ...]] = []
        for r in chosen:
            for ray in r.extreme_rays():
                v = self.scale * r.ratio(ray)
                if best is None or v < best:
                    best, where = v, [ray]
                elif v == best and ray not in where:
                    where.append(ray)
        if best is None:
            raise ValuationError("no regions to minimize over")
        return best, sorted(where, key=_angle_key)


def delta_at(m: DeltaMap, point: Sequence) -> Fraction:
    return m.delta_at(point)


def minimize_delta(m: DeltaMap, regions: Sequence[str] | None = None):
    return m.minimize(regions)


@dataclass
class DeltaCrossCheck:
    region: str
    point: tuple[Fraction, Fraction]
    A_map: Fraction
    A_weights: Fraction
    S_map: Fraction
    S_weights: Fraction

    @property
    def passed(self) -> bool:
        return self.A_map == self.A_weights and self.S_map == self.S_weights


def region_samples(region: DeltaRegion, count: int = 3) -> list[tuple[Fraction, Fraction]]:
    """Rational interior points p = k*r1 + (count+1-k)*r2."""
    r1, r2 = region.extreme_rays()
    return [
        (Fraction(k * r1[0] + (count + 1 - k) * r2[0]), Fraction(k * r1[1] + (count + 1 - k) * r2[1]))
        for k in range(1, count + 1)
    ]


def cross_check_delta_map(
    m: DeltaMap,
    cs: CoordinateSystem,
    basis: tuple[WeightVector, WeightVector],
    charts: Mapping[str, Chart],
    samples_per_region: int = 3,
) -> list[DeltaCrossCheck]:
    """Recompute A and S from weights at interior samples of each region.

    Map values of S are in the map's normalization: the true S-invariant
    equals S_map / scale, since delta = scale * A / S_map = A / S_true.
    """
    eta, zeta = basis
    out = []
    for r in m.regions:
        if r.chart is None:
            continue
        chart = charts[r.chart]
        for p in region_samples(r, samples_per_region):
            shifted, _ = shift_weight(lattice_weight(p[0], p[1], eta, zeta))
            A = log_discrepancy(shifted, chart)
            S = s_invariant(g_function(shifted, cs), cs)
            out.append(DeltaCrossCheck(r.name, p, r.A(p), A, r.S(p), S * m.scale))
    return out
