from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kstab.azchain import step_s
from kstab.exactmath import RootInterval
from kstab.scenario import load_scenario
from kstab.stability import (
    ConeBoundInput,
    RatioFunction,
    StabilityError,
    beta,
    cone_bound,
    kss_domain,
    min_cone_deltaV,
    wall_of,
)


@pytest.mark.parametrize("name, walls", [("m4", [F(1, 9), F(7, 8)]), ("m5", [F(1, 8), F(4, 5)])])
def test_walls_and_domain(name, walls):
    sc = load_scenario(name)
    assert [wall_of(f) for f in sc.ratios] == walls
    d = kss_domain(sc.ratios, *sc.kss_range)
    assert (d.lo, d.hi) == tuple(walls)
    assert str(d) == f"[{walls[0]}, {walls[1]}]"


@pytest.mark.parametrize("name, bound, threshold", [("m4", (F(1, 9), F(7, 8)), F(20, 9)), ("m5", (F(1, 8), F(4, 5)), F(25, 16))])
def test_cone_bound(name, bound, threshold):
    inp = load_scenario(name).cone
    b = cone_bound(inp)
    assert (b.lo, b.hi) == bound and not b.empty
    assert min_cone_deltaV(inp) == threshold


@given(st.fractions(min_value=F(1, 10), max_value=F(39, 10)), st.fractions(min_value=F(1, 2), max_value=1),
       st.fractions(min_value=1, max_value=4))
def test_cone_threshold_is_where_the_terms_meet(r, dX, dV):
    inp = ConeBoundInput(r, 4, dX, dV)
    at = ConeBoundInput(r, 4, dX, min_cone_deltaV(inp))
    t1, t2 = cone_bound(at).terms
    assert t1 == t2
    t1, t2 = cone_bound(inp).terms
    assert (t1 >= t2) == (dV >= min_cone_deltaV(inp))


def test_cone_input_checked():
    with pytest.raises(StabilityError):
        ConeBoundInput(4, 4, 1, 1)


def test_beta_is_negative():
    for name, value in (("m4", F(-4, 25)), ("m5", F(-2, 15))):
        sc = load_scenario(name)
        chain, step = sc.beta_step
        st_ = sc.chain(chain).step(step)
        assert beta(st_.A, sc.polarization * step_s(sc.chain(chain), st_)) == value


def test_irrational_wall_is_isolated():
    f = RatioFunction.parse("2*c^2", "1", (0, 1), "sq")
    w = wall_of(f)
    assert isinstance(w, RootInterval)
    assert 2 * w.lo**2 < 1 < 2 * w.hi**2
    d = kss_domain([f], 0, 1)
    assert d.lo == w and d.hi == 1


def test_no_wall_and_empty_domain():
    f = RatioFunction.parse("1", "2", (0, 1))
    assert wall_of(f) is None
    assert kss_domain([f], 0, 1).empty


def test_bad_ratio_functions():
    with pytest.raises(StabilityError):
        RatioFunction.parse("1", "c - 1/2", (0, 1))
    with pytest.raises(StabilityError):
        wall_of(RatioFunction.parse("1", "1", (0, 1)))
    with pytest.raises(StabilityError):
        wall_of(RatioFunction.parse("8*c^2 - 6*c + 2", "1", (0, 1)))
    with pytest.raises(StabilityError):
        kss_domain([RatioFunction.parse("1", "1 + c", (0, 1))], 0, 2)
