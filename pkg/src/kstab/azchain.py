"""Refinement chains: S-invariants of filtration steps and chain lower bounds."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .exactmath import Polynomial, as_rational
from .intersect import DivisorExpression, IntersectionForm, expand_power
from .polytope import CellUnionReport, Halfspace, Polytope, integrate_polynomial, validate_cell_union


class ChainError(ValueError):
    pass


@dataclass(frozen=True)
class VolumePiece:
    cell: Polytope
    volume: Polynomial
    clause: str = ""


@dataclass(frozen=True)
class PiecewiseVolume:
    """Volume function of filtration parameters, one polynomial per convex cell."""

    name: str
    parameters: tuple[str, ...]
    pieces: tuple[VolumePiece, ...]
    piece_dim: int

    def __post_init__(self):
        params = tuple(self.parameters)
        object.__setattr__(self, "parameters", params)
        pieces = []
        for p in self.pieces:
            if p.cell.dim != len(params):
                raise ChainError(f"{self.name}: cell dimension {p.cell.dim} but {len(params)} parameters")
            extra = [v for v in p.volume.free_variables() if v not in params]
            if extra:
                raise ChainError(f"{self.name}: volume uses unknown parameters {extra}")
            pieces.append(VolumePiece(p.cell, p.volume.with_variables(params), p.clause))
        object.__setattr__(self, "pieces", tuple(pieces))

    @property
    def arity(self) -> int:
        return len(self.parameters)

    def integral(self, weight: Polynomial | None = None) -> Fraction:
        total = Fraction(0)
        for p in self.pieces:
            f = p.volume if weight is None else p.volume * weight.with_variables(self.parameters)
            total += integrate_polynomial(p.cell, f.with_variables(self.parameters))
        return total

    def scaled(self, k) -> "PiecewiseVolume":
        k = as_rational(k)
        return PiecewiseVolume(
            self.name, self.parameters, tuple(VolumePiece(p.cell, p.volume * k, p.clause) for p in self.pieces), self.piece_dim
        )

    def cell_report(self) -> CellUnionReport:
        return validate_cell_union([p.cell for p in self.pieces])

    def negative_samples(self) -> list[tuple[str, tuple[Fraction, ...], Fraction]]:
        """Spot-check vol >= 0 at vertices, barycenters and fixed interior mixtures."""
        bad = []
        for p in self.pieces:
            verts = p.cell.vertices
            if not verts:
                continue
            points = list(verts) + [p.cell.interior_point()]
            center = p.cell.interior_point()
            for v in verts:
                for w in (Fraction(1, 4), Fraction(3, 4)):
                    points.append(tuple(w * a + (1 - w) * b for a, b in zip(v, center)))
            for x in points:
                value = p.volume.evaluate(x)
                if value < 0:
                    bad.append((p.clause, x, value))
        return bad


def _check_piece_dim(pv: PiecewiseVolume, n: int) -> int:
    k = n - pv.arity + 1
    if pv.piece_dim != k:
        raise ChainError(f"{pv.name}: piece_dim {pv.piece_dim} but n - m + 1 = {k} for n = {n}, m = {pv.arity}")
    return k


def s_first(pv: PiecewiseVolume, V, n: int) -> Fraction:
    """(n/V) * integral of u * vol(u) du over the pieces."""
    if pv.arity != 1:
        raise ChainError(f"{pv.name}: a first step needs one parameter, got {pv.arity}")
    if pv.piece_dim != n - 1:
        raise ChainError(f"{pv.name}: a first step needs restricted volumes of dimension {n - 1}, got {pv.piece_dim}")
    u = Polynomial.variable(pv.parameters[0])
    return Fraction(n) / as_rational(V) * pv.integral(u)


def s_refine(pv: PiecewiseVolume, V, n: int) -> Fraction:
    """(n!/V) * sum over pieces of the integral of vol / k!, k = n - m + 1."""
    if pv.arity < 2:
        raise ChainError(f"{pv.name}: a refinement step needs at least two parameters")
    k = _check_piece_dim(pv, n)
    return Fraction(factorial(n), factorial(k)) / as_rational(V) * pv.integral()


@dataclass(frozen=True)
class FiltrationStep:
    name: str
    A: Fraction
    volume: PiecewiseVolume
    kind: str = "refine"
    adjustments: tuple[tuple[Fraction, Fraction], ...] = ()

    def __post_init__(self):
        if self.kind not in ("first", "refine"):
            raise ChainError(f"step {self.name}: kind must be 'first' or 'refine'")
        object.__setattr__(self, "A", as_rational(self.A))
        object.__setattr__(
            self, "adjustments", tuple((as_rational(c), as_rational(o)) for c, o in self.adjustments)
        )


def adjusted_log_discrepancy(step: FiltrationStep) -> Fraction:
    value = step.A - sum((c * o for c, o in step.adjustments), Fraction(0))
    if value <= 0:
        raise ChainError(f"step {step.name}: adjusted log discrepancy {value} is not positive")
    return value


@dataclass(frozen=True)
class Chain:
    name: str
    n: int
    V: Fraction
    steps: tuple[FiltrationStep, ...]
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "V", as_rational(self.V))
        object.__setattr__(self, "scale", as_rational(self.scale))
        object.__setattr__(self, "steps", tuple(self.steps))
        prev: tuple[str, ...] = ()
        for i, s in enumerate(self.steps):
            params = s.volume.parameters
            if i == 0 and s.kind != "first":
                raise ChainError(f"chain {self.name}: the first step must be a first step")
            if i > 0 and s.kind != "refine":
                raise ChainError(f"chain {self.name}: step {s.name} must be a refinement step")
            if params[: len(prev)] != prev or len(params) != len(prev) + 1:
                raise ChainError(f"chain {self.name}: step {s.name} parameters {params} do not extend {prev}")
            prev = params

    def step(self, name: str) -> FiltrationStep:
        for s in self.steps:
            if s.name == name:
                return s
        raise KeyError(f"chain {self.name} has no step {name!r}")


def step_s(chain: Chain, step: FiltrationStep) -> Fraction:
    if step.kind == "first":
        return s_first(step.volume, chain.V, chain.n)
    return s_refine(step.volume, chain.V, chain.n)


@dataclass(frozen=True)
class StepRatio:
    step: str
    A: Fraction
    S: Fraction
    ratio: Fraction


@dataclass(frozen=True)
class ChainBound:
    bound: Fraction
    ratios: tuple[StepRatio, ...]


def chain_bound(chain: Chain) -> ChainBound:
    """min over steps of scale * adjusted A / S."""
    ratios = []
    for step in chain.steps:
        A = adjusted_log_discrepancy(step)
        S = step_s(chain, step)
        if S <= 0:
            raise ChainError(f"step {step.name}: S = {S} is not positive")
        ratios.append(StepRatio(step.name, A, S, chain.scale * A / S))
    return ChainBound(min(r.ratio for r in ratios), tuple(ratios))


def parametric_z_volume(a, b, form: IntersectionForm | None = None, names=("s1", "h")) -> tuple[PiecewiseVolume, Polynomial]:
    """Two-cell volume data for S(W; Z), Z ~ a*s1 + b*h on the P^1-bundle E_W.

    vol(W_(1,t) - sZ) is the expansion of ((1 - s a) s1 + (t - s b) h)^4.
    """
    a, b = as_rational(a), as_rational(b)
    if not 1 <= b <= a:
        raise ChainError(f"need 1 <= b <= a, got a = {a}, b = {b}")
    if form is None:
        from .scenario import load_scenario

        form = load_scenario("m5").forms["E_W"]
    params = ("t", "s")
    t, s = (Polynomial.variable(v, params) for v in params)
    vol = expand_power(form, DivisorExpression({names[0]: 1 - s * a, names[1]: t - s * b})).with_variables(params)
    one, zero = Fraction(1), Fraction(0)
    c1 = Polytope(
        [
            Halfspace((-one, zero), 0),
            Halfspace((a, zero), b),  # t <= b/a
            Halfspace((zero, -one), 0),
            Halfspace((-one, b), 0),  # b s <= t
        ],
        2,
    )
    cells = [VolumePiece(c1, vol, "t <= b/a")]
    if a != b:
        c2 = Polytope(
            [
                Halfspace((-a, zero), -b),  # t >= b/a
                Halfspace((one, zero), 1),
                Halfspace((zero, -one), 0),
                Halfspace((one, a - b), 1),  # (a-b) s <= 1 - t
            ],
            2,
        )
        cells.append(VolumePiece(c2, vol, "t >= b/a"))
    return PiecewiseVolume("Z", params, tuple(cells), 4), vol


def parametric_z_s(a, b, form: IntersectionForm | None = None) -> Fraction:
    """S(W; Z) for Z ~ a*s1 + b*h, normalized as a refinement of a fivefold of volume 5."""
    pv, _ = parametric_z_volume(a, b, form)
    return s_refine(pv, 5, 5)
