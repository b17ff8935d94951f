"""Scenario bundles: JSON documents carrying all geometric input data.

Numbers are integers or "p/q" strings, never floats. Every record may carry
a ``provenance`` string. Loading builds the typed objects and runs the
validation suite; a bundle loads only if every mandatory check passes.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .azchain import Chain, FiltrationStep, PiecewiseVolume, VolumePiece
from .exactmath import (
    AffineFunction,
    Polynomial,
    as_rational,
    constrained_matrix_space,
    format_rational,
    parse_inequalities,
    preserves_pencil,
    rank,
)
from .intersect import DivisorExpression, IntersectionError, IntersectionForm, monomial_key, restricted_volume_from_table
from .polytope import Halfspace, Polytope, PolytopeError, convex_hull
from .soliton import DHMeasure, SolitonProblem
from .stability import ConeBoundInput, RatioFunction
from .valuation import (
    Chart,
    CoordinateSystem,
    DeltaMap,
    DeltaRegion,
    ValuationError,
    WeightVector,
    combine,
    cross_check_delta_map,
    shift_weight,
)

SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    pass


class ScenarioParseError(ScenarioError):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""
    mandatory: bool = True


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str = "", mandatory: bool = True) -> None:
        self.checks.append(Check(name, bool(passed), detail, mandatory))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.mandatory)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def __str__(self) -> str:
        lines = []
        for c in self.checks:
            status = "ok" if c.passed else ("FAIL" if c.mandatory else "warn")
            lines.append(f"{status:5} {c.name}" + (f"  ({c.detail})" if c.detail else ""))
        return "\n".join(lines)


class ScenarioValidationError(ScenarioError):
    def __init__(self, name: str, report: ValidationReport):
        failed = [c for c in report.failures() if c.mandatory]
        super().__init__(f"scenario {name!r} failed validation: " + "; ".join(f"{c.name}: {c.detail}" for c in failed))
        self.report = report


@dataclass(frozen=True)
class PieceRecord:
    """Intersection-theoretic description of one volume piece."""

    volume: str
    clause: str
    form: str | None
    divisor: DivisorExpression | None
    fixed: DivisorExpression | None
    stated: Polynomial | None


@dataclass(frozen=True)
class AutomorphismData:
    forms: tuple[tuple[tuple[Fraction, ...], ...], ...]
    parameters: tuple[str, ...]
    display: tuple[tuple[Polynomial, ...], ...]
    expected_dim: int

    def display_basis(self) -> list[list[list[Fraction]]]:
        """The displayed matrix specialized at each unit parameter vector."""
        out = []
        for k in range(len(self.parameters)):
            point = [Fraction(int(i == k)) for i in range(len(self.parameters))]
            out.append([[p.evaluate(point) for p in row] for row in self.display])
        return out

    def computed_space(self):
        forms = [list(map(list, K)) for K in self.forms]
        return constrained_matrix_space(forms[0], forms[1] if len(forms) > 1 else None)


@dataclass(frozen=True)
class SolitonConfig:
    volume: str
    chain: str
    alpha: Fraction
    beta: Fraction
    polytope: tuple[Fraction, Fraction]
    normalization: Fraction


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    n: int
    V: Fraction
    polarization: Fraction
    coordinate_names: tuple[str, ...]
    coordinates: CoordinateSystem | None
    weights: Mapping[str, WeightVector]
    charts: Mapping[str, Chart]
    delta_map: DeltaMap | None
    delta_basis: tuple[str, str] | None
    forms: Mapping[str, IntersectionForm]
    volumes: Mapping[str, PiecewiseVolume]
    piece_records: tuple[PieceRecord, ...]
    chains: Mapping[str, Chain]
    beta_step: tuple[str, str] | None
    ratios: tuple[RatioFunction, ...]
    kss_range: tuple[Fraction, Fraction] | None
    cone: ConeBoundInput | None
    automorphisms: AutomorphismData | None
    soliton: SolitonConfig | None
    checks: Mapping[str, Fraction]
    document: Mapping[str, Any] = field(compare=False, repr=False, default_factory=dict)
    report: ValidationReport | None = field(compare=False, repr=False, default=None)

    def chain(self, name: str) -> Chain:
        try:
            return self.chains[name]
        except KeyError:
            raise ScenarioError(f"scenario {self.name} has no chain {name!r}") from None

    def dh_measure(self) -> DHMeasure:
        if self.soliton is None:
            raise ScenarioError(f"scenario {self.name} has no soliton configuration")
        s = self.soliton
        return DHMeasure(self.volumes[s.volume], s.alpha, s.beta, s.polytope, s.normalization)

    def soliton_problem(self) -> SolitonProblem:
        return SolitonProblem(self.dh_measure(), self.chain(self.soliton.chain), self.polarization)

    def weight(self, combination: Mapping[str, Any]) -> WeightVector:
        return combine([(as_rational(c), self.weights[k]) for k, c in combination.items()])


# parsing helpers -------------------------------------------------------------


class _Reader:
    """Typed access to a JSON node, tracking its path for error messages."""

    def __init__(self, node, where: str):
        self.node = node
        self.where = where

    def fail(self, message: str):
        raise ScenarioParseError(self.where, message)

    def child(self, key, required=True, default=None) -> "_Reader":
        if isinstance(key, int):
            if not isinstance(self.node, list) or key >= len(self.node):
                self.fail(f"missing item {key}")
            return _Reader(self.node[key], f"{self.where}[{key}]")
        if not isinstance(self.node, dict):
            self.fail("expected an object")
        if key not in self.node:
            if required:
                self.fail(f"missing field {key!r}")
            return _Reader(default, f"{self.where}.{key}")
        return _Reader(self.node[key], f"{self.where}.{key}")

    def has(self, key) -> bool:
        return isinstance(self.node, dict) and key in self.node and self.node[key] is not None

    def keys(self, allowed: set[str]) -> None:
        if not isinstance(self.node, dict):
            self.fail("expected an object")
        extra = sorted(set(self.node) - allowed - {"provenance", "note"})
        if extra:
            self.fail(f"unknown field(s) {extra}")

    def items(self):
        if not isinstance(self.node, dict):
            self.fail("expected an object")
        return [(k, _Reader(v, f"{self.where}.{k}")) for k, v in self.node.items()]

    def list(self) -> list["_Reader"]:
        if not isinstance(self.node, list):
            self.fail("expected an array")
        return [_Reader(v, f"{self.where}[{i}]") for i, v in enumerate(self.node)]

    def str(self) -> str:
        if not isinstance(self.node, str):
            self.fail("expected a string")
        return self.node

    def int(self) -> int:
        if isinstance(self.node, bool) or not isinstance(self.node, int):
            self.fail("expected an integer")
        return self.node

    def rational(self) -> Fraction:
        if isinstance(self.node, float):
            self.fail("floating-point literals are not allowed; write \"p/q\"")
        try:
            return as_rational(self.node)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            self.fail(f"not an exact rational: {exc}")

    def polynomial(self, variables) -> Polynomial:
        try:
            if isinstance(self.node, list):
                return Polynomial.from_terms(variables, self.node)
            if isinstance(self.node, int) and not isinstance(self.node, bool):
                return Polynomial.constant(self.node, variables)
            return Polynomial.parse(self.str(), variables)
        except ScenarioParseError:
            raise
        except (ValueError, SyntaxError, TypeError, KeyError) as exc:
            self.fail(f"bad polynomial: {exc}")

    def halfspaces(self, variables) -> list[Halfspace]:
        """Either a list of inequality strings or {"halfspaces": [{normal, offset}]}."""
        if isinstance(self.node, dict):
            self.keys({"halfspaces"})
            out = []
            for h in self.child("halfspaces").list():
                h.keys({"normal", "offset"})
                normal = tuple(x.rational() for x in h.child("normal").list())
                if len(normal) != len(variables):
                    h.fail(f"normal needs {len(variables)} entries")
                out.append(Halfspace(normal, h.child("offset").rational()))
            return out
        out = []
        for item in self.list():
            try:
                for p in parse_inequalities(item.str(), variables):
                    out.append(Halfspace.from_polynomial(p, variables))
            except ScenarioParseError:
                raise
            except (ValueError, SyntaxError) as exc:
                item.fail(f"bad inequality: {exc}")
        return out


def _rat_str(q: Fraction) -> str:
    return format_rational(q)


# loading ---------------------------------------------------------------------


def _parse_forms(r: _Reader, report: ValidationReport) -> dict[str, IntersectionForm]:
    forms = {}
    for name, f in r.items():
        f.keys({"degree", "basis", "table", "aliases", "cross_checks"})
        degree = f.child("degree").int()
        basis = tuple(b.str() for b in f.child("basis").list())
        table = {}
        for row in f.child("table").list():
            row.keys({"classes", "value"})
            key = monomial_key([c.str() for c in row.child("classes").list()])
            if key in table:
                row.fail(f"duplicate entry {'*'.join(key)}")
            table[key] = row.child("value").rational()
        aliases = {}
        if f.has("aliases"):
            for alias, combo in f.child("aliases").items():
                aliases[alias] = {k: v.rational() for k, v in combo.items()}
        try:
            form = IntersectionForm(name, degree, basis, table, aliases)
        except IntersectionError as exc:
            f.fail(str(exc))
        forms[name] = form
        report.add(f"form {name}: table complete", True, f"{len(table)} entries")
        if f.has("cross_checks"):
            for cc in f.child("cross_checks").list():
                cc.keys({"classes", "value"})
                classes = [c.str() for c in cc.child("classes").list()]
                want = cc.child("value").rational()
                try:
                    got = form.value(classes)
                except IntersectionError as exc:
                    cc.fail(str(exc))
                report.add(f"form {name}: {'*'.join(classes)} = {want}", got == want, f"table gives {got}")
    return forms


def _parse_volumes(r: _Reader, forms, report: ValidationReport):
    volumes = {}
    records = []
    for name, v in r.items():
        v.keys({"parameters", "piece_dim", "pieces", "nonnegativity"})
        params = tuple(p.str() for p in v.child("parameters").list())
        piece_dim = v.child("piece_dim").int()
        advisory = v.has("nonnegativity") and v.child("nonnegativity").str() == "advisory"
        pieces = []
        for pr in v.child("pieces").list():
            pr.keys({"clause", "cell", "form", "divisor", "fixed", "volume"})
            clause = pr.child("clause").str() if pr.has("clause") else ""
            try:
                cell = Polytope(pr.child("cell").halfspaces(params), len(params))
            except PolytopeError as exc:
                pr.child("cell").fail(str(exc))
            if not cell.is_full_dimensional:
                pr.child("cell").fail("cell is not full-dimensional")
            stated = pr.child("volume").polynomial(params).with_variables(params) if pr.has("volume") else None
            form_name = divisor = fixed = None
            computed = None
            if pr.has("divisor"):
                form_name = pr.child("form").str()
                if form_name not in forms:
                    pr.child("form").fail(f"unknown intersection form {form_name!r}")
                form = forms[form_name]
                divisor = DivisorExpression({k: x.polynomial(params) for k, x in pr.child("divisor").items()})
                if pr.has("fixed"):
                    fixed = DivisorExpression({k: x.polynomial(params) for k, x in pr.child("fixed").items()})
                if form.degree != piece_dim:
                    pr.fail(f"form {form_name} has degree {form.degree} but piece_dim is {piece_dim}")
                try:
                    computed = restricted_volume_from_table(form, divisor, fixed).with_variables(params)
                except IntersectionError as exc:
                    pr.child("divisor").fail(str(exc))
            if stated is None and computed is None:
                pr.fail("a piece needs a volume or a divisor")
            if stated is not None and computed is not None:
                report.add(
                    f"volume {name}/{clause}: table expansion matches stated polynomial",
                    stated == computed,
                    "" if stated == computed else f"table gives {computed}, stated {stated}",
                )
            poly = stated if stated is not None else computed
            pieces.append(VolumePiece(cell, poly, clause))
            records.append(PieceRecord(name, clause, form_name, divisor, fixed, stated))
        pv = PiecewiseVolume(name, params, tuple(pieces), piece_dim)
        union = pv.cell_report()
        report.add(f"volume {name}: cells interior-disjoint", union.passed, f"max overlap {union.max_overlap}")
        bad = pv.negative_samples()
        report.add(
            f"volume {name}: nonnegative at sample points",
            not bad,
            f"{len(bad)} negative samples" + (" (advisory)" if advisory else "") if bad else "",
            mandatory=not advisory,
        )
        volumes[name] = pv
    return volumes, tuple(records)


def _parse_chains(r: _Reader, n: int, V: Fraction, volumes) -> dict[str, Chain]:
    chains = {}
    for name, c in r.items():
        c.keys({"scale", "steps"})
        steps = []
        for s in c.child("steps").list():
            s.keys({"name", "kind", "A", "volume", "adjustments"})
            vol = s.child("volume").str()
            if vol not in volumes:
                s.child("volume").fail(f"unknown volume {vol!r}")
            adj = []
            if s.has("adjustments"):
                for a in s.child("adjustments").list():
                    a.keys({"c", "ord"})
                    adj.append((a.child("c").rational(), a.child("ord").rational()))
            try:
                steps.append(FiltrationStep(s.child("name").str(), s.child("A").rational(), volumes[vol], s.child("kind").str(), tuple(adj)))
            except ValueError as exc:
                s.fail(str(exc))
        try:
            chains[name] = Chain(name, n, V, tuple(steps), c.child("scale").rational())
        except ValueError as exc:
            c.fail(str(exc))
    return chains


def _parse_coordinates(r: _Reader, report: ValidationReport, checks):
    r.keys({"names", "body_variables", "images", "body"})
    names = tuple(x.str() for x in r.child("names").list())
    if len(set(names)) != len(names):
        r.child("names").fail("repeated coordinate name")
    if not r.has("images"):
        return names, None
    variables = tuple(x.str() for x in r.child("body_variables").list())
    images = {}
    for k, pts in r.child("images").items():
        images[k] = tuple(x.rational() for x in pts.list())
    if r.child("body").str() != "hull_of_images":
        r.child("body").fail("only 'hull_of_images' is supported")
    try:
        body = convex_hull(list(images.values()))
    except PolytopeError as exc:
        r.child("images").fail(str(exc))
    return names, (variables, images, body)


def _load_document(doc: Mapping[str, Any], origin: str) -> Scenario:
    report = ValidationReport()
    root = _Reader(doc, origin)
    root.keys(
        {
            "schema_version", "name", "description", "n", "V", "polarization", "coordinates", "weights",
            "weight_checks", "charts", "checks", "delta_map", "forms", "volumes", "chains", "beta", "ratios",
            "cone", "automorphisms", "soliton",
        }
    )
    version = root.child("schema_version").int()
    if version != SCHEMA_VERSION:
        root.child("schema_version").fail(f"unsupported schema version {version}")
    name = root.child("name").str()
    description = root.child("description").str() if root.has("description") else ""
    n = root.child("n").int()
    V = root.child("V").rational()
    polarization = root.child("polarization").rational()

    checks = {}
    if root.has("checks"):
        for k, c in root.child("checks").items():
            c.keys({"value"})
            checks[k] = c.child("value").rational()

    names, body_data = _parse_coordinates(root.child("coordinates"), report, checks)
    coords = None
    if body_data is not None:
        variables, images, body = body_data
        if set(images) != set(names):
            root.child("coordinates").fail("images must cover exactly the coordinate names")
        try:
            coords = CoordinateSystem(names, images, body, polarization, variables)
        except ValuationError as exc:
            root.child("coordinates").fail(str(exc))
        if "okounkov_volume" in checks:
            vol = body.volume()
            report.add("Okounkov body volume", vol == checks["okounkov_volume"], f"computed {vol}")
        vol_identity = body.volume() * _factorial(len(variables))
        report.add("Okounkov volume times d! equals V", vol_identity == V, f"{vol_identity} vs {V}")

    weights = {}
    if root.has("weights"):
        for k, w in root.child("weights").items():
            w.keys({"values"})
            values = tuple(x.rational() for x in w.child("values").list())
            if len(values) != len(names):
                w.fail(f"need {len(names)} weights")
            weights[k] = WeightVector(names, values)
    if root.has("weight_checks"):
        for wc in root.child("weight_checks").list():
            wc.keys({"combination", "shifted"})
            combo = {k: x.rational() for k, x in wc.child("combination").items()}
            unknown = [k for k in combo if k not in weights]
            if unknown:
                wc.fail(f"unknown weights {unknown}")
            want = tuple(x.rational() for x in wc.child("shifted").list())
            got = shift_weight(combine([(c, weights[k]) for k, c in combo.items()]))[0].values
            label = " + ".join(f"({format_rational(c)}){k}" for k, c in combo.items())
            report.add(f"shifted weight of {label}", got == want, "" if got == want else f"got {[str(x) for x in got]}")

    charts = {}
    if root.has("charts"):
        for k, c in root.child("charts").items():
            c.keys({"denominator", "coordinates"})
            ch = Chart(k, c.child("denominator").str(), tuple(x.str() for x in c.child("coordinates").list()))
            for x in (ch.denominator,) + ch.coordinates:
                if x not in names:
                    c.fail(f"unknown coordinate {x!r}")
            charts[k] = ch

    delta_map = None
    delta_basis = None
    if root.has("delta_map"):
        d = root.child("delta_map")
        d.keys({"basis", "variables", "scale", "regions"})
        dvars = tuple(x.str() for x in d.child("variables").list())
        delta_basis = tuple(x.str() for x in d.child("basis").list())
        if len(delta_basis) != 2 or any(b not in weights for b in delta_basis):
            d.child("basis").fail("need two known weight names")
        regions = []
        for rg in d.child("regions").list():
            rg.keys({"name", "cone", "A", "S", "chart"})
            chart = rg.child("chart").str() if rg.has("chart") else None
            if chart is not None and chart not in charts:
                rg.child("chart").fail(f"unknown chart {chart!r}")
            try:
                regions.append(
                    DeltaRegion(
                        rg.child("name").str(),
                        tuple(rg.child("cone").halfspaces(dvars)),
                        AffineFunction.from_polynomial(rg.child("A").polynomial(dvars), dvars),
                        AffineFunction.from_polynomial(rg.child("S").polynomial(dvars), dvars),
                        chart,
                    )
                )
            except ValueError as exc:
                rg.fail(str(exc))
        delta_map = DeltaMap(tuple(regions), d.child("scale").rational())
        problems = delta_map.validate()
        report.add("delta map covers the plane and agrees on boundaries", not problems, "; ".join(problems))
        if coords is not None:
            try:
                cc = cross_check_delta_map(delta_map, coords, (weights[delta_basis[0]], weights[delta_basis[1]]), charts)
                bad = [c for c in cc if not c.passed]
                report.add(
                    "delta map agrees with weights (charts minimal, G consistent)",
                    not bad,
                    f"{len(cc)} samples" if not bad else f"mismatch in {bad[0].region} at {bad[0].point}",
                )
            except ValuationError as exc:
                report.add("delta map agrees with weights (charts minimal, G consistent)", False, str(exc))

    forms = _parse_forms(root.child("forms"), report) if root.has("forms") else {}
    volumes, records = _parse_volumes(root.child("volumes"), forms, report) if root.has("volumes") else ({}, ())
    chains = _parse_chains(root.child("chains"), n, V, volumes) if root.has("chains") else {}

    beta_step = None
    if root.has("beta"):
        b = root.child("beta")
        b.keys({"chain", "step"})
        beta_step = (b.child("chain").str(), b.child("step").str())
        if beta_step[0] not in chains or beta_step[1] not in [s.name for s in chains[beta_step[0]].steps]:
            b.fail(f"unknown chain step {beta_step}")

    ratios: tuple[RatioFunction, ...] = ()
    kss_range = None
    if root.has("ratios"):
        rr = root.child("ratios")
        rr.keys({"range", "functions"})
        kss_range = tuple(x.rational() for x in rr.child("range").list())
        out = []
        for f in rr.child("functions").list():
            f.keys({"name", "numerator", "denominator", "interval"})
            try:
                out.append(
                    RatioFunction(
                        f.child("numerator").polynomial(("c",)),
                        f.child("denominator").polynomial(("c",)),
                        tuple(x.rational() for x in f.child("interval").list()),
                        f.child("name").str(),
                    )
                )
            except ValueError as exc:
                f.fail(str(exc))
        ratios = tuple(out)

    cone = None
    if root.has("cone"):
        c = root.child("cone")
        c.keys({"r", "n", "deltaX", "deltaV"})
        try:
            cone = ConeBoundInput(c.child("r").rational(), c.child("n").int(), c.child("deltaX").rational(), c.child("deltaV").rational())
        except ValueError as exc:
            c.fail(str(exc))

    aut = None
    if root.has("automorphisms"):
        a = root.child("automorphisms")
        a.keys({"forms", "display", "expected_dim"})
        mats = tuple(tuple(tuple(x.rational() for x in row.list()) for row in K.list()) for K in a.child("forms").list())
        disp = a.child("display")
        disp.keys({"parameters", "matrix"})
        params = tuple(x.str() for x in disp.child("parameters").list())
        display = tuple(tuple(x.polynomial(params).with_variables(params) for x in row.list()) for row in disp.child("matrix").list())
        aut = AutomorphismData(mats, params, display, a.child("expected_dim").int())
        basis = aut.display_basis()
        ok = all(preserves_pencil(Q, mats) for Q in basis)
        report.add("displayed automorphism matrices satisfy the constraints", ok)
        flat = [[x for row in Q for x in row] for Q in basis]
        report.add(
            "displayed automorphism parameters are independent",
            rank(flat) == len(params),
            f"rank {rank(flat)} of {len(params)}",
        )
        dim = len(aut.computed_space())
        report.add(
            "automorphism constraint space has the expected dimension",
            dim == aut.expected_dim == len(params),
            f"computed {dim}, expected {aut.expected_dim}, displayed {len(params)}",
        )

    soliton = None
    if root.has("soliton"):
        s = root.child("soliton")
        s.keys({"volume", "chain", "alpha", "beta", "polytope", "normalization"})
        soliton = SolitonConfig(
            s.child("volume").str(),
            s.child("chain").str(),
            s.child("alpha").rational(),
            s.child("beta").rational(),
            tuple(x.rational() for x in s.child("polytope").list()),
            s.child("normalization").rational(),
        )
        if soliton.volume not in volumes:
            s.child("volume").fail(f"unknown volume {soliton.volume!r}")
        if soliton.chain not in chains:
            s.child("chain").fail(f"unknown chain {soliton.chain!r}")
        try:
            DHMeasure(volumes[soliton.volume], soliton.alpha, soliton.beta, soliton.polytope, soliton.normalization)
            report.add("DH measure: moment polytope is the image of the support", True)
        except ValueError as exc:
            report.add("DH measure: moment polytope is the image of the support", False, str(exc))

    scenario = Scenario(
        name=name,
        description=description,
        n=n,
        V=V,
        polarization=polarization,
        coordinate_names=names,
        coordinates=coords,
        weights=weights,
        charts=charts,
        delta_map=delta_map,
        delta_basis=delta_basis,
        forms=forms,
        volumes=volumes,
        piece_records=records,
        chains=chains,
        beta_step=beta_step,
        ratios=ratios,
        kss_range=kss_range,
        cone=cone,
        automorphisms=aut,
        soliton=soliton,
        checks=checks,
        document=doc,
        report=report,
    )
    if not report.passed:
        raise ScenarioValidationError(name, report)
    return scenario


def _factorial(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


_TOKEN = re.compile(r'"(?:\\.|[^"\\])*"|-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?')


def _float_position(text: str) -> tuple[int, int] | None:
    """Line and column of the first non-integer number literal outside strings."""
    for m in _TOKEN.finditer(text):
        tok = m.group()
        if not tok.startswith('"') and any(c in tok for c in ".eE"):
            line = text.count("\n", 0, m.start()) + 1
            return line, m.start() - (text.rfind("\n", 0, m.start()) + 1) + 1
    return None


def _reject_floats(text: str, origin: str):
    def bad_float(s):
        pos = _float_position(text)
        where = f"{origin}:{pos[0]}:{pos[1]}" if pos else origin
        raise ScenarioParseError(where, f"floating-point literal {s} is not allowed; write \"p/q\"")

    try:
        return json.loads(text, parse_float=bad_float)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{origin}:{exc.lineno}:{exc.colno}", exc.msg) from None


# registry --------------------------------------------------------------------

_BUILTIN_FILES = {"m4": "m4.json", "m5": "m5.json"}
_REGISTERED: dict[str, Mapping[str, Any]] = {}


def list_builtins() -> list[str]:
    return sorted(set(_BUILTIN_FILES) | set(_REGISTERED))


def register_builtin(name: str, source: str | Path | Mapping[str, Any]) -> None:
    """Make a bundle loadable by name."""
    if isinstance(source, Mapping):
        doc = dict(source)
    else:
        path = Path(source)
        doc = _reject_floats(path.read_text(), str(path))
    _REGISTERED[name] = doc
    _load_builtin.cache_clear()


@lru_cache(maxsize=None)
def _load_builtin(name: str) -> Scenario:
    if name in _REGISTERED:
        return _load_document(_REGISTERED[name], name)
    text = resources.files("kstab").joinpath("data", _BUILTIN_FILES[name]).read_text()
    return _load_document(_reject_floats(text, name), name)


def load_scenario(source: str | Path | Mapping[str, Any]) -> Scenario:
    """Load a builtin by name, a JSON file by path, or an already-parsed document."""
    if isinstance(source, Mapping):
        return _load_document(source, "<document>")
    if isinstance(source, str) and source in list_builtins():
        return _load_builtin(source)
    path = Path(source)
    if not path.exists():
        raise ScenarioError(f"no builtin or file named {str(source)!r} (builtins: {', '.join(list_builtins())})")
    return _load_document(_reject_floats(path.read_text(), str(path)), str(path))


def loads_scenario(text: str, origin: str = "<string>") -> Scenario:
    return _load_document(_reject_floats(text, origin), origin)


def _canonical(node):
    """Normalize fraction strings to lowest terms; leave other strings alone."""
    if isinstance(node, dict):
        return {k: _canonical(v) for k, v in node.items()}
    if isinstance(node, list):
        return [_canonical(v) for v in node]
    if isinstance(node, str):
        try:
            return _rat_str(as_rational(node))
        except (ValueError, ZeroDivisionError, TypeError):
            return node
    return node


def serialize(scenario: Scenario) -> str:
    """JSON text that reloads to an equal scenario."""
    return json.dumps(_canonical(scenario.document), indent=1, ensure_ascii=False) + "\n"
