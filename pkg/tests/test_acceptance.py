"""End-to-end reproduction checks, one test per acceptance criterion.

Expected values are written out here rather than read from the package, so
the bundled data and the verify table are checked, not trusted.
"""

import random
from fractions import Fraction as F

import mpmath
import pytest

from kstab.azchain import chain_bound, parametric_z_s, step_s
from kstab.exactmath import Polynomial, integrate_poly_exp
from kstab.intersect import restricted_volume_from_table
from kstab.polytope import Halfspace, Polytope, integrate_polynomial
from kstab.scenario import load_scenario
from kstab.soliton import h_derivative, solve_soliton_candidate, weighted_chain_bound
from kstab.stability import beta, cone_bound, kss_domain, wall_of
from kstab.valuation import g_function, s_invariant, shift_weight

PAPER_XI0 = "0.16838665311714196"
PAPER_ETA0 = "0.1693945440748772"
PAPER_VG = {"m4": "0.2055698662861948", "m5": "0.04119805228615477"}


@pytest.fixture(scope="module")
def m4():
    return load_scenario("m4")


@pytest.fixture(scope="module")
def m5():
    return load_scenario("m5")


@pytest.fixture(scope="module")
def solved(m4, m5):
    out = {}
    for sc in (m4, m5):
        p = sc.soliton_problem()
        p.solve()
        out[sc.name] = p
    return out


def close(got, want, tol):
    with mpmath.workdps(40):
        g = mpmath.mpf(got.numerator) / got.denominator if isinstance(got, F) else mpmath.mpf(got)
        w = mpmath.mpf(want.numerator) / want.denominator if isinstance(want, F) else mpmath.mpf(want)
        return abs(g - w) <= mpmath.mpf(tol)


def check_all(results):
    failed = [f"{name}: got {got}, want {want}" for name, got, want, ok in results if not ok]
    assert not failed, "\n".join(failed)


def exact(name, got, want):
    return (name, got, want, got == want)


def numeric(name, got, want, tol):
    return (name, got, want, close(got, want, tol))


def okounkov_s(sc, combination):
    shifted, _ = shift_weight(sc.weight(combination))
    return s_invariant(g_function(shifted, sc.coordinates), sc.coordinates)


def expansion(sc, volume, clause):
    (rec,) = [r for r in sc.piece_records if r.volume == volume and r.clause == clause]
    return restricted_volume_from_table(sc.forms[rec.form], rec.divisor, rec.fixed)


def same_poly(p, text, variables):
    return p.with_variables(variables) == Polynomial.parse(text, variables).with_variables(variables)


@pytest.mark.criterion(1, "Okounkov body volume")
def test_criterion_01_okounkov_volume(m4):
    check_all([exact("vol", m4.coordinates.body.volume(), F(5, 24))])


@pytest.mark.criterion(2, "S-invariants from the Okounkov body")
def test_criterion_02_s_invariants(m4):
    sz, smz = okounkov_s(m4, {"zeta": 1}), okounkov_s(m4, {"zeta": -1})
    check_all(
        [
            exact("S(zeta)", sz, F(48, 5)),
            exact("S(-zeta)", smz, F(42, 5)),
            exact("complement", (sz + smz) / m4.polarization, 6),
        ]
    )


@pytest.mark.criterion(3, "delta map values, minimum and properties")
def test_criterion_03_delta_map(m4):
    m = m4.delta_map
    homogeneous = all(
        m.delta_at((k * a, k * b)) == m.delta_at((a, b))
        for a, b in ((1, 0), (0, 1), (-1, -1), (3, -2), (-5, 7), (2, 9), (-4, 1))
        for k in (F(1, 3), F(2), F(7, 5), F(100))
    )
    check_all(
        [
            exact("delta(0,1)", m.delta_at((0, 1)), F(25, 24)),
            exact("delta(0,-1)", m.delta_at((0, -1)), F(20, 21)),
            exact("delta(-1,-1)", m.delta_at((-1, -1)), F(25, 27)),
            exact("minimum", m.minimize(), (F(25, 27), [(-1, -1)])),
            exact("boundary consistency", m.validate(), []),
            exact("homogeneity", homogeneous, True),
        ]
    )


EL_DISPLAYS = {
    "0<=s<=t": "4*(1 - t)*((1 - t)^2*t + 3*(1 - t)*t^2 + 2*t^3 - s^3)",
    "t<=s<=1": "4*(s - t)*(3*(1 - s)^2*t + 3*(1 - s)*t^2 + t^3) + 4*(1 - s)*t*((1 - s)^2 + 3*(1 - s)*t + t^2)",
    "1<=s<=1+t": "4*(1 - t)*(1 + t - s)^3",
}
EC_A = "6*r*(1 - t - r)*(s - r) + 3*(1 - t)*(s - r)^2"
EC_B = "3*(1 - t)*(1 - t + s - 2*r)^2"
EC_DISPLAYS = {"A": EC_A, "B": EC_B, "C1": "6*(s - t)*(1 - s)*t + 3*(1 - t)*t^2", "C2": "3*(1 - t)*(1 + t - s)^2"}


@pytest.mark.criterion(4, "intersection expansions")
def test_criterion_04_expansions(m4, m5):
    results = [
        exact(
            "E_S",
            same_poly(expansion(m4, "F_step", "Delta_1"), "(2-u)^3 - 9*(2-u)*(1-u+v)^2 + 10*(1-u+v)^3", ("u", "v")),
            True,
        ),
        exact("E_W", same_poly(expansion(m5, "W_EW", "0<=t<=1"), "4*t - 4*t^3", ("t",)), True),
    ]
    for clause, text in EL_DISPLAYS.items():
        results.append(exact(f"E_l {clause}", same_poly(expansion(m5, "El_step", clause), text, ("t", "s")), True))
    ec = [r for r in m5.piece_records if r.volume == "EC_step"]
    assert len(ec) == 8
    for rec in ec:
        text = EC_DISPLAYS[rec.clause.split("[")[0]]
        got = restricted_volume_from_table(m5.forms[rec.form], rec.divisor, rec.fixed)
        results.append(exact(f"E_C {rec.clause}", same_poly(got, text, ("t", "s", "r")), True))
    check_all(results)


@pytest.mark.criterion(5, "S-invariants of chain steps")
def test_criterion_05_step_s(m4, m5):
    want = {
        "m4": {"E_S": F(18, 25), "F": F(1, 5), "C": F(1, 5)},
        "m5": {"E_W": F(8, 15), "E_l": F(23, 30), "E_C": F(154, 405), "C~": F(221, 2430)},
    }
    results = []
    for sc in (m4, m5):
        chain = sc.chain("plain")
        for step, value in want[sc.name].items():
            results.append(exact(f"{sc.name} {step}", step_s(chain, chain.step(step)), value))
    check_all(results)


@pytest.mark.criterion(6, "chain bounds and S(W; Z)")
def test_criterion_06_chain_bounds(m4, m5):
    plain = chain_bound(m4.chain("plain"))
    m4_pair = chain_bound(m4.chain("pair"))
    m5_pair = chain_bound(m5.chain("pair"))
    results = [
        exact("M4 ratios", [r.ratio for r in plain.ratios], [F(25, 9), 5, 5]),
        exact("M4 bound", plain.bound, F(25, 9)),
        exact("M4 pair ratios", [r.ratio for r in m4_pair.ratios], [1, F(9, 5), F(7, 5)]),
        exact("M4 pair bound", m4_pair.bound, 1),
        exact("M5 pair ratios", [r.ratio for r in m5_pair.ratios], [1, 1, F(405, 308), F(567, 221)]),
        exact("M5 pair bound", m5_pair.bound, 1),
    ]
    for a, b in ((1, 1), (2, 1), (3, 2), (5, 3)):
        results.append(exact(f"S(W;Z) a={a} b={b}", parametric_z_s(a, b), F(1, 6 * a)))
    check_all(results)


@pytest.mark.criterion(7, "walls and K-semistable domains")
def test_criterion_07_walls(m4, m5):
    results = []
    for sc, walls in ((m4, [F(1, 9), F(7, 8)]), (m5, [F(1, 8), F(4, 5)])):
        d = kss_domain(sc.ratios, *sc.kss_range)
        results.append(exact(f"{sc.name} walls", [wall_of(f) for f in sc.ratios], walls))
        results.append(exact(f"{sc.name} domain", [d.lo, d.hi], walls))
    check_all(results)


@pytest.mark.criterion(8, "cone bound")
def test_criterion_08_cone_bound(m4, m5):
    results = []
    for sc, inputs, want in (
        (m4, (F(1, 2), 4, F(25, 27)), (F(1, 9), F(7, 8))),
        (m5, (F(1), 5, F(15, 16)), (F(1, 8), F(4, 5))),
    ):
        inp = sc.cone
        results.append(exact(f"{sc.name} inputs", (inp.r, inp.n, inp.deltaX), inputs))
        b = cone_bound(inp)
        results.append(exact(f"{sc.name} interval", (b.lo, b.hi), want))
    check_all(results)


@pytest.mark.criterion(9, "beta invariants are negative")
def test_criterion_09_beta(m4, m5):
    results = []
    for sc, want in ((m4, F(-4, 25)), (m5, F(-2, 15))):
        chain_name, step_name = sc.beta_step
        chain = sc.chain(chain_name)
        st = chain.step(step_name)
        value = beta(st.A, sc.polarization * step_s(chain, st))
        results.append(exact(f"{sc.name} beta", value, want))
        results.append(exact(f"{sc.name} sign", value < 0, True))
    check_all(results)


@pytest.mark.criterion(10, "automorphism constraint spaces")
def test_criterion_10_automorphisms(m4, m5):
    check_all(
        [
            exact("M4 dim", len(m4.automorphisms.computed_space()), 8),
            exact("M5 dim", len(m5.automorphisms.computed_space()), 15),
        ]
    )


@pytest.mark.criterion(11, "soliton candidates")
def test_criterion_11_soliton_candidates(solved):
    results = [
        numeric("xi0", solved["m4"].solve(), PAPER_XI0, "1e-11"),
        numeric("eta0", solved["m5"].solve(), PAPER_ETA0, "1e-12"),
    ]
    for name, p in solved.items():
        xi = p.solve()
        results.append(numeric(f"{name} H'", h_derivative(p.measure, xi), 0, "1e-12"))
        same = all(solve_soliton_candidate(p.measure.rescaled(k)) == xi for k in (F(1, 81), F(7, 3), 1000))
        results.append(exact(f"{name} normalization invariance", same, True))
    check_all(results)


@pytest.mark.criterion(12, "weighted volumes")
def test_criterion_12_weighted_volumes(solved):
    check_all([numeric(f"{n} v^g", solved[n].weighted_total_volume(), PAPER_VG[n], "1e-12") for n in ("m4", "m5")])


WEIGHTED_S = {
    "m4": [("E_S", F(2, 3), "1e-9"), ("F", "0.179638", "1e-6"), ("C", "0.211933", "1e-6")],
    "m5": [
        ("E_W", F(1, 2), "1e-9"),
        ("E_l", F(3, 4), "1e-9"),
        ("E_C", "0.390484", "1e-6"),
        ("C~", "0.089469", "1e-6"),
    ],
}


@pytest.mark.criterion(13, "weighted S-invariants")
def test_criterion_13_weighted_s(solved):
    results = []
    for name, rows in WEIGHTED_S.items():
        p = solved[name]
        for step, want, tol in rows:
            results.append(numeric(f"{name} S^g {step}", p.weighted_s(p.chain.step(step)), want, tol))
    check_all(results)


@pytest.mark.criterion(14, "weighted chain minima")
def test_criterion_14_weighted_chains(solved):
    check_all([numeric(f"{n} minimum", weighted_chain_bound(solved[n])[0], 1, "1e-9") for n in ("m4", "m5")])


def random_poly(rng, variables, degree):
    terms = {}
    for _ in range(4):
        exps = [0] * len(variables)
        for _ in range(rng.randint(0, degree)):
            exps[rng.randrange(len(variables))] += 1
        terms[tuple(exps)] = F(rng.randint(-9, 9), rng.randint(1, 5))
    return Polynomial(variables, {k: v for k, v in terms.items() if v})


def split_additivity(m4, count=100):
    rng = random.Random(20)
    body = m4.coordinates.body
    variables = m4.coordinates.body_variables
    center = body.interior_point()
    for _ in range(count):
        f = random_poly(rng, variables, 2)
        normal = tuple(F(rng.randint(-3, 3)) for _ in variables)
        if not any(normal):
            normal = (F(1),) + normal[1:]
        offset = sum((a * c for a, c in zip(normal, center)), F(0)) + F(rng.randint(-2, 2), 11)
        total = F(0)
        for h in (Halfspace(normal, offset), Halfspace(tuple(-a for a in normal), -offset)):
            part = Polytope(list(body.halfspaces) + [h], 4)
            if part.is_full_dimensional:
                total += integrate_polynomial(part, f)
        if total != integrate_polynomial(body, f):
            return False
    return True


def quadrature_agreement(count=100):
    rng = random.Random(21)
    for _ in range(count):
        coeffs = [F(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(rng.randint(1, 5))]
        slope = F(rng.randint(-4, 4), rng.randint(1, 3))
        lo = F(rng.randint(-4, 2), 2)
        hi = lo + F(rng.randint(1, 6), 2)
        xi = F(rng.randint(-20, 20), 10)
        expr = integrate_poly_exp(Polynomial.from_coefficients(coeffs, "u"), slope, (lo, hi))
        with mpmath.workdps(30):
            c = [mpmath.mpf(x.numerator) / x.denominator for x in reversed(coeffs)]
            k = mpmath.mpf(slope.numerator) / slope.denominator * mpmath.mpf(xi.numerator) / xi.denominator
            a, b = (mpmath.mpf(x.numerator) / x.denominator for x in (lo, hi))
            ref = mpmath.quad(lambda u: mpmath.polyval(c, u) * mpmath.exp(k * u), [a, b])
            scale = mpmath.quad(lambda u: abs(mpmath.polyval(c, u)) * mpmath.exp(k * u), [a, b])
            got = expr.evaluate(xi)
            got = mpmath.mpf(got.numerator) / got.denominator if isinstance(got, F) else got
            if abs(got - ref) > mpmath.mpf("1e-12") * scale + mpmath.mpf("1e-25"):
                return False
    return True


@pytest.mark.criterion(15, "property suites")
def test_criterion_15_properties(m4, m5, solved):
    results = [
        exact("split additivity", split_additivity(m4), True),
        exact("quadrature", quadrature_agreement(), True),
    ]
    for name, p in solved.items():
        agree = all(p.weighted_s(st, F(0)) == step_s(p.chain, st) for st in p.chain.steps)
        results.append(exact(f"{name} xi = 0", agree, True))
    for sc in (m4, m5):
        for pv in sc.volumes.values():
            report = pv.cell_report()
            results.append(exact(f"{sc.name} {pv.name} overlap", report.max_overlap, 0))
    check_all(results)
