from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kstab.azchain import (
    Chain,
    ChainError,
    FiltrationStep,
    PiecewiseVolume,
    VolumePiece,
    adjusted_log_discrepancy,
    chain_bound,
    parametric_z_s,
    s_first,
    s_refine,
    step_s,
)
from kstab.exactmath import Polynomial
from kstab.polytope import Polytope
from kstab.scenario import load_scenario


def hyperplane_volume(n, cuts=(0, 1)):
    """vol(H - uH) on P^n restricted to a hyperplane: (1-u)^(n-1), split at the given cuts."""
    u = Polynomial.variable("u", ("u",))
    vol = (Polynomial.constant(1, ("u",)) - u) ** (n - 1)
    cells = [VolumePiece(Polytope.box([lo], [hi]), vol) for lo, hi in zip(cuts, cuts[1:])]
    return PiecewiseVolume("H", ("u",), tuple(cells), n - 1)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_hyperplane_on_projective_space(n):
    assert s_first(hyperplane_volume(n), 1, n) == F(1, n + 1)


@given(st.integers(2, 6), st.fractions(min_value=F(1, 10), max_value=F(9, 10)))
def test_splitting_a_cell_changes_nothing(n, cut):
    assert s_first(hyperplane_volume(n, (0, cut, 1)), 1, n) == F(1, n + 1)


@given(st.integers(2, 5), st.fractions(min_value=F(1, 7), max_value=7))
def test_scaling_volume_and_degree_together(n, k):
    pv = hyperplane_volume(n)
    assert s_first(pv.scaled(k), k, n) == s_first(pv, 1, n)


def test_larger_volume_gives_larger_s():
    pv = hyperplane_volume(3)
    u = Polynomial.variable("u", ("u",))
    bigger = PiecewiseVolume("H", ("u",), tuple(VolumePiece(p.cell, p.volume + u) for p in pv.pieces), 2)
    assert s_first(bigger, 1, 3) > s_first(pv, 1, 3)


def test_piece_dimension_is_checked():
    pv = hyperplane_volume(3)
    with pytest.raises(ChainError):
        s_first(pv, 1, 4)
    with pytest.raises(ChainError):
        s_refine(pv, 1, 3)


def test_adjusted_log_discrepancy():
    vol = hyperplane_volume(3)
    assert adjusted_log_discrepancy(FiltrationStep("a", 1, vol, "first")) == 1
    assert adjusted_log_discrepancy(FiltrationStep("a", 1, vol, "first", ((F(2, 9), 1),))) == F(7, 9)
    with pytest.raises(ChainError):
        adjusted_log_discrepancy(FiltrationStep("a", 1, vol, "first", ((2, 1),)))


def test_chain_shape_is_checked():
    vol = hyperplane_volume(3)
    with pytest.raises(ChainError):
        Chain("bad", 3, 1, (FiltrationStep("a", 1, vol, "refine"),))
    with pytest.raises(ChainError):
        Chain("bad", 3, 1, (FiltrationStep("a", 1, vol, "first"), FiltrationStep("b", 1, vol, "refine")))


def test_scenario_step_values():
    m4, m5 = load_scenario("m4"), load_scenario("m5")
    c4 = m4.chain("plain")
    assert [step_s(c4, s) for s in c4.steps] == [F(18, 25), F(1, 5), F(1, 5)]
    c5 = m5.chain("plain")
    assert [step_s(c5, s) for s in c5.steps] == [F(8, 15), F(23, 30), F(154, 405), F(221, 2430)]


def test_scenario_chain_bounds():
    m4, m5 = load_scenario("m4"), load_scenario("m5")
    assert chain_bound(m4.chain("plain")).bound == F(25, 9)
    assert [r.ratio for r in chain_bound(m4.chain("pair")).ratios] == [1, F(9, 5), F(7, 5)]
    assert [r.ratio for r in chain_bound(m5.chain("plain")).ratios] == [F(15, 4), F(90, 23), F(405, 77), F(2430, 221)]
    pair = chain_bound(m5.chain("pair"))
    assert [r.ratio for r in pair.ratios] == [1, 1, F(405, 308), F(567, 221)]
    assert pair.bound == 1


@settings(max_examples=12, deadline=None)
@given(st.integers(1, 6).flatmap(lambda a: st.tuples(st.just(a), st.integers(1, a))))
def test_parametric_z(ab):
    a, b = ab
    assert parametric_z_s(a, b) == F(1, 6 * a)


def test_parametric_z_rejects_bad_parameters():
    with pytest.raises(ChainError):
        parametric_z_s(1, 2)
