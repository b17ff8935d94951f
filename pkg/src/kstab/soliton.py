"""Duistermaat-Heckman measures, the H-functional and weighted invariants.

Every integral against the weight exp(-u' xi) is reduced exactly to an
:class:`ExpPolyExpression` in xi; only the final evaluation is numeric.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import factorial

import mpmath

from .azchain import Chain, ChainError, FiltrationStep, PiecewiseVolume, adjusted_log_discrepancy
from .exactmath import (
    ExpPolyExpression,
    Polynomial,
    as_rational,
    integrate_poly_exp,
    solve_root_bracketed,
    working_precision,
)
from .polytope import pushforward


class SolitonError(ValueError):
    pass


def _mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _density_pieces(pv: PiecewiseVolume, weight: Polynomial | None = None):
    """(lo, hi, density in the first parameter) for every piece of pv."""
    first = pv.parameters[0]
    out = []
    for piece in pv.pieces:
        f = piece.volume if weight is None else piece.volume * weight.with_variables(pv.parameters)
        for d in pushforward(piece.cell, f.with_variables(pv.parameters), axis=0, name=first):
            out.append((d.lo, d.hi, d.density))
    return out


@dataclass(frozen=True)
class DHMeasure:
    """normalization * vol(u) du pushed forward along u' = alpha*u + beta."""

    base: PiecewiseVolume
    alpha: Fraction
    beta: Fraction
    polytope: tuple[Fraction, Fraction]
    normalization: Fraction = Fraction(1)

    def __post_init__(self):
        if self.base.arity != 1:
            raise SolitonError("the DH measure needs a univariate volume function")
        for k in ("alpha", "beta", "normalization"):
            object.__setattr__(self, k, as_rational(getattr(self, k)))
        object.__setattr__(self, "polytope", tuple(as_rational(x) for x in self.polytope))
        if self.alpha <= 0 or self.normalization <= 0:
            raise SolitonError("alpha and the normalization constant must be positive")
        lows = [lo for lo, _, _ in self.pieces]
        highs = [hi for _, hi, _ in self.pieces]
        if not lows:
            raise SolitonError("the DH measure has empty support")
        image = (self.alpha * min(lows) + self.beta, self.alpha * max(highs) + self.beta)
        if image != self.polytope:
            raise SolitonError(f"moment polytope {self.polytope} is not the image {image} of the support")
        for lo, hi, dens in self.pieces:
            for x in (lo, hi, (lo + hi) / 2):
                if dens.evaluate([x]) < 0:
                    raise SolitonError(f"negative density at u = {x}")

    @cached_property
    def pieces(self):
        return _density_pieces(self.base)

    @property
    def variable(self) -> str:
        return self.base.parameters[0]

    def reparam(self) -> Polynomial:
        """u' as a polynomial in the base variable."""
        return Polynomial.variable(self.variable) * self.alpha + self.beta

    def weighted(self, pieces, extra: Polynomial | None = None) -> ExpPolyExpression:
        """Closed form of sum over pieces of the integral of dens*extra*exp(-u' xi)."""
        total = ExpPolyExpression()
        for lo, hi, dens in pieces:
            f = dens if extra is None else dens * extra
            total = total + integrate_poly_exp(f, -self.alpha, (lo, hi))
        return total.shift(-self.beta)

    @cached_property
    def mass(self) -> ExpPolyExpression:
        return self.weighted(self.pieces) * self.normalization

    @cached_property
    def moment(self) -> ExpPolyExpression:
        """The un-normalized first moment of u'; its zero is the soliton candidate."""
        return self.weighted(self.pieces, self.reparam())

    def rescaled(self, factor) -> "DHMeasure":
        return DHMeasure(self.base, self.alpha, self.beta, self.polytope, self.normalization * as_rational(factor))


def h_functional(m: DHMeasure, xi):
    """log of the integral of exp(-u' xi) against the DH measure."""
    value = m.mass.evaluate(xi)
    with mpmath.workdps(working_precision()):
        return mpmath.log(_mp(value))


def h_derivative(m: DHMeasure, xi):
    """dH/dxi = -(first moment) / mass, with the normalization cancelled."""
    num = m.moment.evaluate(xi)
    den = m.weighted(m.pieces).evaluate(xi)
    if isinstance(num, Fraction) and isinstance(den, Fraction):
        return -num / den
    with mpmath.workdps(working_precision()):
        return -_mp(num) / _mp(den)


def solve_soliton_candidate(m: DHMeasure, tol=None):
    """Unique zero of the first moment of u' under exp(-u' xi) DH.

    The moment is strictly decreasing in xi, so the bracket is grown from
    xi = 0 in the downhill direction until the sign changes.
    """
    lo_u = min(lo for lo, _, _ in m.pieces)
    hi_u = max(hi for _, hi, _ in m.pieces)
    if hi_u <= lo_u:
        raise SolitonError("degenerate DH measure")
    digits = working_precision()
    if tol is None:
        tol = mpmath.mpf(10) ** (-(digits - 5))
    moment = m.moment
    f0 = moment.value_at_zero()
    if f0 == 0:
        return mpmath.mpf(0)
    direction = 1 if f0 > 0 else -1
    with mpmath.workdps(digits):
        step = mpmath.mpf(1)

        def f(x):
            return moment.evaluate(x, digits)

        for _ in range(200):
            edge = direction * step
            if mpmath.sign(f(edge)) != (1 if f0 > 0 else -1):
                break
            step *= 2
        else:
            raise SolitonError("could not bracket the soliton candidate")
        bracket = (mpmath.mpf(0), edge) if direction > 0 else (edge, mpmath.mpf(0))
        return solve_root_bracketed(f, bracket, tol=tol, max_iter=2000)


def weighted_volume(m: DHMeasure, pv: PiecewiseVolume, xi, k: int):
    """Integral of exp(-u' xi) vol(u) / k! du (normalization not applied)."""
    if pv.arity != 1:
        raise SolitonError(f"{pv.name}: weighted volume needs a univariate volume function")
    if pv.parameters[0] != m.variable:
        raise SolitonError(f"{pv.name}: parameter {pv.parameters[0]} does not match {m.variable}")
    return (m.weighted(_density_pieces(pv)) * Fraction(1, factorial(k))).evaluate(xi)


@dataclass
class SolitonProblem:
    measure: DHMeasure
    chain: Chain
    polarization: Fraction
    candidate: object = None

    def __post_init__(self):
        self.polarization = as_rational(self.polarization)
        first = self.chain.steps[0].volume
        if first.parameters[0] != self.measure.variable:
            raise SolitonError("the chain and the DH measure use different first parameters")

    def solve(self):
        if self.candidate is None:
            xi = solve_soliton_candidate(self.measure)
            moment = abs(self.measure.moment.evaluate(xi))
            mass = self.measure.weighted(self.measure.pieces).evaluate(xi)
            if moment > mpmath.mpf("1e-12") * mass:
                raise SolitonError(f"candidate {xi} leaves first moment {moment}")
            self.candidate = xi
        return self.candidate

    def xi(self, xi=None):
        return self.solve() if xi is None else xi

    def vg_expression(self) -> ExpPolyExpression:
        n = self.chain.n
        first = self.chain.steps[0].volume
        return self.measure.weighted(_density_pieces(first)) * Fraction(1, factorial(n - 1))

    def weighted_total_volume(self, xi=None):
        return self.vg_expression().evaluate(self.xi(xi))

    def step_expression(self, step: FiltrationStep) -> ExpPolyExpression:
        """Numerator of S^g for the step, before division by v^g."""
        n = self.chain.n
        pv = step.volume
        if step.kind == "first":
            if pv.arity != 1:
                raise ChainError(f"{pv.name}: a first step needs one parameter")
            u = Polynomial.variable(pv.parameters[0])
            return self.measure.weighted(_density_pieces(pv), u) * Fraction(1, factorial(n - 1))
        k = n - pv.arity + 1
        if pv.piece_dim != k:
            raise ChainError(f"{pv.name}: piece_dim {pv.piece_dim} but n - m + 1 = {k}")
        return self.measure.weighted(_density_pieces(pv)) * Fraction(1, factorial(k))

    def weighted_s(self, step: FiltrationStep, xi=None):
        x = self.xi(xi)
        num = self.step_expression(step).evaluate(x)
        den = self.vg_expression().evaluate(x)
        if isinstance(num, Fraction) and isinstance(den, Fraction):
            return num / den
        with mpmath.workdps(working_precision()):
            return _mp(num) / _mp(den)


def weighted_s_first(problem: SolitonProblem, step: FiltrationStep, xi=None):
    if step.kind != "first":
        raise ChainError(f"step {step.name} is not a first step")
    return problem.weighted_s(step, xi)


def weighted_s_refine(problem: SolitonProblem, step: FiltrationStep, xi=None):
    if step.kind != "refine":
        raise ChainError(f"step {step.name} is not a refinement step")
    return problem.weighted_s(step, xi)


@dataclass(frozen=True)
class WeightedRatio:
    step: str
    A: Fraction
    S: object
    ratio: object


def weighted_chain_bound(problem: SolitonProblem, xi=None):
    """min over steps of (1/r) * A / S^g, with r the anticanonical degree."""
    ratios = []
    for step in problem.chain.steps:
        A = adjusted_log_discrepancy(step)
        S = problem.weighted_s(step, xi)
        if S <= 0:
            raise ChainError(f"step {step.name}: weighted S = {S} is not positive")
        if isinstance(S, Fraction):
            ratio = A / (problem.polarization * S)
        else:
            with mpmath.workdps(working_precision()):
                ratio = _mp(A) / (_mp(problem.polarization) * S)
        ratios.append(WeightedRatio(step.name, A, S, ratio))
    return min(r.ratio for r in ratios), tuple(ratios)
