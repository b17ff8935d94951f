from fractions import Fraction as F

import mpmath
import pytest

from kstab.azchain import PiecewiseVolume, VolumePiece, step_s
from kstab.exactmath import Polynomial
from kstab.polytope import Polytope
from kstab.scenario import load_scenario
from kstab.soliton import (
    DHMeasure,
    SolitonError,
    h_derivative,
    h_functional,
    solve_soliton_candidate,
    weighted_chain_bound,
    weighted_volume,
)


def mp(x):
    return mpmath.mpf(x.numerator) / x.denominator if isinstance(x, F) else mpmath.mpf(x)


def quad_root(m: DHMeasure):
    """Oracle: mpmath quadrature of the first moment, then findroot."""
    v = m.variable
    pieces = []
    for piece in m.base.pieces:
        (lo,), (hi,) = sorted(piece.cell.vertices)
        coeffs = [mp(c) for c in piece.volume.univariate_coefficients(v)][::-1]
        pieces.append((mp(lo), mp(hi), coeffs))
    a, b = mp(m.alpha), mp(m.beta)

    def moment(xi):
        return sum(
            mpmath.quad(lambda u: (a * u + b) * mpmath.polyval(c, u) * mpmath.exp(-(a * u + b) * xi), [lo, hi])
            for lo, hi, c in pieces
        )

    return mpmath.findroot(moment, 0.1)


@pytest.fixture(scope="module")
def problems():
    return {name: load_scenario(name).soliton_problem() for name in ("m4", "m5")}


def test_h_at_zero():
    m = load_scenario("m4").dh_measure()
    assert m.mass.value_at_zero() == F(81 * 5, 4)
    with mpmath.workdps(30):
        assert abs(h_functional(m, 0) - mpmath.log(mpmath.mpf(405) / 4)) < mpmath.mpf("1e-25")


def test_weighted_volume_at_zero_is_the_plain_volume():
    sc = load_scenario("m4")
    m = sc.dh_measure()
    assert weighted_volume(m, sc.volumes["W_ES"], 0, 3) == F(5, 24)


def test_symmetric_measure_has_zero_candidate():
    cell = Polytope.box([0], [1])
    base = PiecewiseVolume("toy", ("u",), (VolumePiece(cell, Polynomial.constant(1, ("u",))),), 1)
    m = DHMeasure(base, 2, -1, (-1, 1))
    assert solve_soliton_candidate(m) == 0


def test_measure_checks_its_polytope():
    cell = Polytope.box([0], [1])
    base = PiecewiseVolume("toy", ("u",), (VolumePiece(cell, Polynomial.constant(1, ("u",))),), 1)
    with pytest.raises(SolitonError):
        DHMeasure(base, 2, -1, (-1, 2))


@pytest.mark.parametrize("name", ["m4", "m5"])
def test_candidate_matches_quadrature_oracle(problems, name):
    p = problems[name]
    xi = p.solve()
    with mpmath.workdps(30):
        ref = quad_root(p.measure)
        assert abs(xi - ref) < mpmath.mpf("1e-22")
    assert abs(h_derivative(p.measure, xi)) < mpmath.mpf("1e-24")


@pytest.mark.parametrize("name", ["m4", "m5"])
def test_candidate_ignores_the_normalization(problems, name):
    p = problems[name]
    for k in (F(1, 81), F(7, 3), 1000):
        assert solve_soliton_candidate(p.measure.rescaled(k)) == p.solve()


@pytest.mark.parametrize("name", ["m4", "m5"])
def test_h_is_convex(problems, name):
    m = problems[name].measure
    xs = [mpmath.mpf(k) / 4 for k in range(-8, 9)]
    ds = [h_derivative(m, x) for x in xs]
    assert all(a < b for a, b in zip(ds, ds[1:]))


def test_reparametrization_consistency():
    # the moment of u' equals alpha * moment of u + beta * mass
    m = load_scenario("m4").dh_measure()
    u = Polynomial.variable(m.variable)
    first = m.weighted(m.pieces, u)
    zero = m.weighted(m.pieces)
    xi = F(1, 3)
    with mpmath.workdps(30):
        rhs = mp(m.alpha) * first.evaluate(xi) + mp(m.beta) * zero.evaluate(xi)
        assert abs(m.moment.evaluate(xi) - rhs) < mpmath.mpf("1e-25")


def test_weighted_invariants_at_zero_are_the_plain_ones():
    sc = load_scenario("m5")
    p = sc.soliton_problem()
    chain = p.chain
    for st in chain.steps:
        assert p.weighted_s(st, 0) == step_s(chain, st)


@pytest.mark.parametrize("name", ["m4", "m5"])
def test_weighted_chain_bound_is_one(problems, name):
    bound, _ = weighted_chain_bound(problems[name])
    assert abs(bound - 1) < 1e-12
