"""K-semistability walls in a pair coefficient, beta invariants and the cone bound."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exactmath import Polynomial, RootInterval, as_rational, real_roots


class StabilityError(ValueError):
    pass


@dataclass(frozen=True)
class RatioFunction:
    """numerator(c) / denominator(c) on a closed validity interval."""

    numerator: Polynomial
    denominator: Polynomial
    interval: tuple[Fraction, Fraction]
    name: str = ""
    variable: str = "c"

    def __post_init__(self):
        v = (self.variable,)
        num = Polynomial.coerce(self.numerator, v)
        den = Polynomial.coerce(self.denominator, v)
        for p in (num, den):
            extra = [x for x in p.free_variables() if x != self.variable]
            if extra:
                raise StabilityError(f"ratio {self.name}: unexpected variables {extra}")
        object.__setattr__(self, "numerator", num.with_variables(v))
        object.__setattr__(self, "denominator", den.with_variables(v))
        lo, hi = (as_rational(x) for x in self.interval)
        if lo > hi:
            raise StabilityError(f"ratio {self.name}: empty validity interval")
        object.__setattr__(self, "interval", (lo, hi))
        if den.is_zero() or real_roots(self._coeffs(self.denominator), lo, hi):
            raise StabilityError(f"ratio {self.name}: denominator vanishes on [{lo}, {hi}]")

    @classmethod
    def parse(cls, numerator: str, denominator: str, interval, name: str = "", variable: str = "c") -> "RatioFunction":
        v = (variable,)
        return cls(Polynomial.parse(numerator, v), Polynomial.parse(denominator, v), interval, name, variable)

    def _coeffs(self, p: Polynomial) -> list[Fraction]:
        return p.univariate_coefficients(self.variable)

    def __call__(self, c) -> Fraction:
        c = as_rational(c)
        return self.numerator.evaluate((c,)) / self.denominator.evaluate((c,))

    def excess(self) -> Polynomial:
        """numerator - denominator, whose sign decides ratio >= 1 where den > 0."""
        return self.numerator - self.denominator


Root = Fraction | RootInterval


def wall_of(f: RatioFunction) -> Root | None:
    """The unique c in the validity interval with f(c) = 1, or None."""
    lo, hi = f.interval
    diff = f.excess()
    coeffs = f._coeffs(diff)
    if not any(coeffs):
        raise StabilityError(f"ratio {f.name} is identically 1")
    roots = real_roots(coeffs, lo, hi)
    if len(roots) > 1:
        raise StabilityError(f"ratio {f.name} crosses 1 at {len(roots)} points in [{lo}, {hi}]")
    if not roots:
        return None
    root = roots[0]
    if isinstance(root, Fraction) and f(root) != 1:
        raise StabilityError(f"ratio {f.name}: wall {root} does not satisfy f = 1")
    return root


def _root_value(r: Root) -> Fraction:
    return r if isinstance(r, Fraction) else (r.lo + r.hi) / 2


@dataclass(frozen=True)
class Interval:
    lo: Root | None
    hi: Root | None

    @property
    def empty(self) -> bool:
        return self.lo is None

    def __str__(self) -> str:
        if self.empty:
            return "empty"
        return f"[{self.lo}, {self.hi}]"


def kss_domain(ratios: Sequence[RatioFunction], lo, hi) -> Interval:
    """Subinterval of [lo, hi] on which every ratio is >= 1.

    The range is cut at every wall; each breakpoint and each open gap is
    tested exactly. An irrational breakpoint belongs to the domain when an
    adjacent gap does (the ratios are continuous).
    """
    lo, hi = as_rational(lo), as_rational(hi)
    points: list[Root] = [lo, hi]
    for f in ratios:
        if not (f.interval[0] <= lo and hi <= f.interval[1]):
            raise StabilityError(f"ratio {f.name} is not valid on [{lo}, {hi}]")
        points.extend(real_roots(f._coeffs(f.excess()), lo, hi))
    points = sorted(set(points), key=_root_value)

    def ok(c: Fraction) -> bool:
        return all(f(c) >= 1 for f in ratios)

    gaps = [ok((_root_value(p) + _root_value(q)) / 2) for p, q in zip(points, points[1:])]
    marks = []
    for i, p in enumerate(points):
        if isinstance(p, Fraction):
            marks.append(ok(p))
        else:
            marks.append((i > 0 and gaps[i - 1]) or (i < len(gaps) and gaps[i]))
    runs: list[list[Root]] = []
    prev_good = False
    for i, p in enumerate(points):
        if marks[i]:
            if prev_good and runs:
                runs[-1][1] = p
            else:
                runs.append([p, p])
        prev_good = marks[i] and i < len(gaps) and gaps[i]
    if not runs:
        return Interval(None, None)
    if len(runs) > 1:
        raise StabilityError(f"K-semistable domain is not an interval: {runs}")
    return Interval(*runs[0])


def beta(A, S) -> Fraction:
    return as_rational(A) - as_rational(S)


@dataclass(frozen=True)
class ConeBoundInput:
    r: Fraction
    n: int
    deltaX: Fraction
    deltaV: Fraction

    def __post_init__(self):
        for k in ("r", "deltaX", "deltaV"):
            object.__setattr__(self, k, as_rational(getattr(self, k)))
        if not 0 < self.r < self.n:
            raise StabilityError(f"need 0 < r < n, got r = {self.r}, n = {self.n}")


@dataclass(frozen=True)
class OpenInterval:
    lo: Fraction
    hi: Fraction
    terms: tuple[Fraction, Fraction]

    @property
    def empty(self) -> bool:
        return self.lo >= self.hi


def cone_bound(inp: ConeBoundInput) -> OpenInterval:
    """(max{(r+1)(1-dX), (1-r/n) - (r/n)(n+1)(dV-1)}, 1-r/n)."""
    upper = 1 - inp.r / inp.n
    t1 = (inp.r + 1) * (1 - inp.deltaX)
    t2 = upper - inp.r / inp.n * (inp.n + 1) * (inp.deltaV - 1)
    return OpenInterval(max(t1, t2), upper, (t1, t2))


def min_cone_deltaV(inp: ConeBoundInput) -> Fraction:
    """Smallest deltaV for which the first term decides the lower endpoint."""
    upper = 1 - inp.r / inp.n
    t1 = (inp.r + 1) * (1 - inp.deltaX)
    return 1 + (upper - t1) * inp.n / (inp.r * (inp.n + 1))
