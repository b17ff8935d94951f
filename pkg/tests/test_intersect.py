from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kstab.exactmath import Polynomial, multinomial
from kstab.intersect import (
    DivisorExpression,
    IntersectionError,
    IntersectionForm,
    expand_power,
    monomial_key,
    restricted_volume_from_table,
)
from kstab.scenario import load_scenario

UV = ("u", "v")


def es_form():
    return load_scenario("m4").forms["E_S"]


def test_es_expansion_matches_the_displayed_polynomial():
    expr = DivisorExpression({"H": Polynomial.parse("2-u", UV), "F": Polynomial.parse("-(1-u+v)", UV)})
    got = expand_power(es_form(), expr).with_variables(UV)
    want = Polynomial.parse("(2-u)^3 - 9*(2-u)*(1-u+v)^2 + 10*(1-u+v)^3", UV).with_variables(UV)
    assert got == want


def test_ew_expansion_is_4t_minus_4t_cubed():
    form = load_scenario("m5").forms["E_W"]
    got = expand_power(form, DivisorExpression({"s1": 1, "h": Polynomial.variable("t")}))
    assert got.with_variables(("t",)) == Polynomial.parse("4*t - 4*t^3", ("t",))


def test_single_class_power():
    form = IntersectionForm("P3", 3, ("D",), {("D", "D", "D"): 1})
    a = Polynomial.variable("a")
    assert expand_power(form, DivisorExpression({"D": a})) == a * a * a


def test_fixed_part_regimes():
    sc = load_scenario("m4")
    recs = {r.clause: r for r in sc.piece_records if r.volume == "W_ES"}
    low = restricted_volume_from_table(sc.forms[recs["0<=u<=1"].form], recs["0<=u<=1"].divisor, recs["0<=u<=1"].fixed)
    high = restricted_volume_from_table(sc.forms[recs["1<=u<=2"].form], recs["1<=u<=2"].divisor, recs["1<=u<=2"].fixed)
    assert low.with_variables(("u",)) == Polynomial.parse("3*u - 2*u^3", ("u",))
    assert high.with_variables(("u",)) == Polynomial.parse("(2-u)^3", ("u",))
    assert recs["1<=u<=2"].fixed is not None


def test_zero_expression_gives_zero():
    assert restricted_volume_from_table(es_form(), DivisorExpression({})).is_zero()


def test_missing_entry_is_named():
    with pytest.raises(IntersectionError, match="F"):
        IntersectionForm("bad", 2, ("H", "F"), {("H", "H"): 1, ("H", "F"): 0})


def test_unknown_class_rejected():
    with pytest.raises(IntersectionError):
        expand_power(es_form(), DivisorExpression({"Q": 1}))


def test_table_is_keyed_by_multisets():
    form = es_form()
    assert monomial_key(["F", "H", "H"]) == monomial_key(["H", "F", "H"])
    for perm in (["H", "H", "F"], ["H", "F", "H"], ["F", "H", "H"]):
        assert form.value(perm) == form.value(["H", "H", "F"])


rationals = st.fractions(min_value=-4, max_value=4, max_denominator=5)


@settings(max_examples=40)
@given(rationals, rationals, rationals)
def test_homogeneity(x, y, k):
    form = es_form()
    expr = DivisorExpression({"H": x, "F": y})
    assert expand_power(form, expr.scale(k)) == expand_power(form, expr) * k**3


@settings(max_examples=30)
@given(rationals, rationals, rationals, rationals)
def test_multinomial_agrees_with_expansion(a1, b1, a2, b2):
    form = es_form()
    A = {"H": a1, "F": b1}
    B = {"H": a2, "F": b2}
    total = DivisorExpression({k: A[k] + B[k] for k in A})
    # sum over monomials of the four summands a1 H, b1 F, a2 H, b2 F
    terms = [("H", a1), ("F", b1), ("H", a2), ("F", b2)]
    value = F(0)
    for i in range(4):
        for j in range(4 - i):
            for k in range(4 - i - j):
                m = 3 - i - j - k
                exps = (i, j, k, m)
                classes = [c for (c, _), e in zip(terms, exps) for _ in range(e)]
                coeff = 1
                for (_, x), e in zip(terms, exps):
                    coeff *= x**e
                value += multinomial(exps) * coeff * form.value(classes)
    assert expand_power(form, total).constant_value() == value
