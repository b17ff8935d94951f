"""Command-line front end.

Exit codes: 0 success, 1 usage or computation error, 2 verification failure.
Exact values print as fractions; reals print with 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import verify
from .azchain import chain_bound, step_s
from .exactmath import RootInterval, as_rational
from .scenario import ScenarioError, load_scenario
from .soliton import h_derivative, weighted_chain_bound
from .stability import ConeBoundInput, cone_bound, kss_domain, min_cone_deltaV, wall_of
from .valuation import g_function, s_invariant, shift_weight
from .verify import format_real


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _value(v):
    """Record encoding: exact rationals as "p/q", reals as 17-digit strings."""
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, RootInterval):
        return {"lo": _value(v.lo), "hi": _value(v.hi)}
    if isinstance(v, (list, tuple)):
        return [_value(x) for x in v]
    if isinstance(v, dict):
        return {k: _value(x) for k, x in v.items()}
    if isinstance(v, str):
        return v
    return format_real(v)


def _text(v) -> str:
    v = _value(v)
    if isinstance(v, dict) and set(v) == {"lo", "hi"}:
        return f"({v['lo']}, {v['hi']})"
    if isinstance(v, list):
        return " ".join(_text(x) for x in v)
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


class Output:
    """Collects (key, value) results and renders them in the chosen format."""

    def __init__(self, fmt: str):
        self.fmt = fmt
        self.records: list[dict] = []

    def add(self, key: str, value, **extra) -> None:
        self.records.append({"key": key, "value": value, **extra})

    def render(self) -> str:
        if self.fmt == "records":
            lines = [json.dumps({k: _value(v) for k, v in r.items()}, sort_keys=True, ensure_ascii=False) for r in self.records]
        elif len(self.records) == 1:
            lines = [_text(self.records[0]["value"])]
        else:
            width = max(len(r["key"]) for r in self.records)
            lines = [f"{r['key']:<{width}}  {_text(r['value'])}" for r in self.records]
        return "\n".join(lines) + ("\n" if lines else "")


def _rational_pair(text: str) -> tuple[Fraction, Fraction]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"expected a,b but got {text!r}")
    return tuple(as_rational(p.strip()) for p in parts)


def _combination(text: str) -> dict[str, Fraction]:
    """'zeta' or 'eta=-1/5,zeta=-1/5'."""
    out = {}
    for part in text.split(","):
        name, _, coeff = part.partition("=")
        out[name.strip()] = as_rational(coeff.strip()) if coeff else Fraction(1)
    return out


def cmd_okounkov(sc, args, out: Output) -> None:
    if sc.coordinates is None:
        raise ScenarioError(f"scenario {sc.name} has no Okounkov body")
    body = sc.coordinates.body
    out.add("volume", body.volume())
    for w in args.weight or []:
        combo = _combination(w)
        missing = [k for k in combo if k not in sc.weights]
        if missing:
            raise UsageError(f"unknown weights {missing}")
        shifted, _ = shift_weight(sc.weight(combo))
        G = g_function(shifted, sc.coordinates)
        S = s_invariant(G, sc.coordinates)
        out.add(f"{w}: G", str(G))
        out.add(f"{w}: integral of G", S * body.volume() / sc.polarization)
        out.add(f"{w}: S(-K)", S)


def cmd_delta_map(sc, args, out: Output) -> None:
    m = sc.delta_map
    if m is None:
        raise ScenarioError(f"scenario {sc.name} has no delta map")
    for p in args.at or []:
        point = _rational_pair(p)
        out.add(f"delta({_text(list(point)).replace(' ', ',')})", m.delta_at(point))
    if args.minimize or not args.at:
        value, rays = m.minimize(args.regions)
        out.add("minimum", value)
        out.add("rays", [f"({a},{b})" for a, b in rays])


def cmd_s(sc, args, out: Output) -> None:
    chain = sc.chain(args.chain)
    steps = [chain.step(args.step)] if args.step else chain.steps
    for st in steps:
        out.add(st.name, step_s(chain, st))


def cmd_chain(sc, args, out: Output) -> None:
    b = chain_bound(sc.chain(args.chain))
    if args.format == "records" or args.ratios:
        for r in b.ratios:
            out.add(r.step, r.ratio, A=r.A, S=r.S)
    out.add("bound", b.bound)


def cmd_walls(sc, args, out: Output) -> None:
    if not sc.ratios:
        raise ScenarioError(f"scenario {sc.name} has no ratio functions")
    walls = [wall_of(f) for f in sc.ratios]
    if args.domain:
        d = kss_domain(sc.ratios, *sc.kss_range)
        out.add("domain", None if d.empty else [d.lo, d.hi])
    elif args.format == "records":
        for f, w in zip(sc.ratios, walls):
            out.add(f.name, w)
    else:
        out.add("walls", walls)


def cmd_cone_bound(sc, args, out: Output) -> None:
    base = sc.cone
    if base is None and None in (args.r, args.n, args.delta_x, args.delta_v):
        raise ScenarioError(f"scenario {sc.name} has no cone data; pass --r --n --delta-x --delta-v")
    inp = ConeBoundInput(
        as_rational(args.r) if args.r else base.r,
        int(args.n) if args.n else base.n,
        as_rational(args.delta_x) if args.delta_x else base.deltaX,
        as_rational(args.delta_v) if args.delta_v else base.deltaV,
    )
    b = cone_bound(inp)
    out.add("lower", b.lo)
    out.add("upper", b.hi)
    out.add("empty", b.empty)
    out.add("deltaV threshold", min_cone_deltaV(inp))


def cmd_aut_dim(sc, args, out: Output) -> None:
    if sc.automorphisms is None:
        raise ScenarioError(f"scenario {sc.name} has no automorphism data")
    out.add("dim", len(sc.automorphisms.computed_space()))


def cmd_soliton(sc, args, out: Output) -> None:
    p = sc.soliton_problem()
    xi = p.solve()
    everything = not (args.candidate or args.vg or args.weighted_s or args.weighted_chain)
    if args.candidate or everything:
        out.add("candidate", xi)
    if everything:
        out.add("H'(candidate)", h_derivative(p.measure, xi))
    if args.vg or everything:
        out.add("v^g", p.weighted_total_volume())
    if args.weighted_s or everything:
        for st in p.chain.steps:
            out.add(f"S^g {st.name}", p.weighted_s(st))
    if args.weighted_chain or everything:
        out.add("weighted chain", weighted_chain_bound(p)[0])


def cmd_verify(args) -> tuple[str, int]:
    try:
        rows = verify.run(args.scenario, args.only, args.tol)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    if not rows:
        raise UsageError(f"no verify rows for scenario {args.scenario!r}")
    if args.format == "records":
        lines = [
            json.dumps(
                {
                    "id": r.id,
                    "criterion": r.criterion,
                    "scenario": r.scenario,
                    "check": r.citation,
                    "expected": r.expected,
                    "computed": r.computed,
                    "status": "pass" if r.passed else "fail",
                    **({"error": r.error} if r.error else {}),
                },
                sort_keys=True,
                ensure_ascii=False,
            )
            for r in rows
        ]
    else:
        w_id = max(len("id"), *(len(r.id) for r in rows))
        w_exp = max(len("paper value"), *(len(r.expected) for r in rows))
        w_got = max(len("computed"), *(len(r.computed) for r in rows))
        lines = [f"{'id':<{w_id}}  {'paper value':<{w_exp}}  {'computed':<{w_got}}  status"]
        for r in rows:
            status = "pass" if r.passed else "FAIL"
            lines.append(f"{r.id:<{w_id}}  {r.expected:<{w_exp}}  {r.computed:<{w_got}}  {status}")
        failed = sum(not r.passed for r in rows)
        lines.append(f"{len(rows) - failed}/{len(rows)} rows pass")
    code = 0 if all(r.passed for r in rows) else 2
    return "\n".join(lines) + "\n", code


COMMANDS = {
    "okounkov": cmd_okounkov,
    "delta-map": cmd_delta_map,
    "s": cmd_s,
    "chain": cmd_chain,
    "walls": cmd_walls,
    "cone-bound": cmd_cone_bound,
    "aut-dim": cmd_aut_dim,
    "soliton": cmd_soliton,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kstab", description="Exact K-stability invariants from scenario bundles.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text, scenario_required=True):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", required=scenario_required, help="builtin name or path to a JSON bundle")
        p.add_argument("--format", choices=("table", "records"), default="table")
        return p

    p = add("okounkov", "Okounkov body volume, G-functions and S-invariants")
    p.add_argument("--weight", action="append", help="weight combination, e.g. zeta or eta=1,zeta=-1")
    p = add("delta-map", "evaluate or minimize the delta map")
    p.add_argument("--at", action="append", metavar="A,B", help="evaluate at the ray (a, b)")
    p.add_argument("--minimize", action="store_true")
    p.add_argument("--regions", nargs="+", help="restrict minimization to these regions")
    p = add("s", "S-invariant of a chain step")
    p.add_argument("--chain", default="plain")
    p.add_argument("--step")
    p = add("chain", "chain lower bound")
    p.add_argument("--chain", default="plain")
    p.add_argument("--ratios", action="store_true", help="also print per-step ratios")
    p = add("walls", "walls and the K-semistable domain")
    p.add_argument("--domain", action="store_true")
    p = add("cone-bound", "interval from the cone construction")
    p.add_argument("--r")
    p.add_argument("--n")
    p.add_argument("--delta-x")
    p.add_argument("--delta-v")
    add("aut-dim", "dimension of the automorphism constraint space")
    p = add("soliton", "soliton candidate and weighted invariants")
    p.add_argument("--candidate", action="store_true")
    p.add_argument("--vg", action="store_true")
    p.add_argument("--weighted-s", action="store_true")
    p.add_argument("--weighted-chain", action="store_true")
    p = add("verify", "run the reproduction checks", scenario_required=False)
    p.add_argument("--only", help="a row id, or a criterion number for all its rows")
    p.add_argument("--tol", help="override the tolerance of numeric rows")
    return parser


def run(argv: Sequence[str]) -> tuple[int, str, str]:
    """(exit code, stdout, stderr) for one invocation."""
    try:
        args = build_parser().parse_args(list(argv))
        if args.command == "verify":
            text, code = cmd_verify(args)
            return code, text, ""
        sc = load_scenario(args.scenario)
        out = Output(args.format)
        COMMANDS[args.command](sc, args, out)
        return 0, out.render(), ""
    except UsageError as exc:
        return 1, "", f"{exc}\n"
    except (ScenarioError, ValueError, ArithmeticError, KeyError) as exc:
        return 1, "", f"error: {exc}\n"


def main(argv: Sequence[str] | None = None) -> int:
    code, out, err = run(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
