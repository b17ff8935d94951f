"""Exact rationals and sparse multivariate polynomials."""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Iterable, Mapping, Sequence, Union

Rational = Fraction
Number = Union[int, Fraction]


def as_rational(value) -> Fraction:
    """Coerce an int, Fraction or "p/q" string to a Fraction.

    Floats are rejected: every scenario number must be exact.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if any(ch in text for ch in ".eE"):
            raise ValueError(f"decimal literal {value!r} is not allowed; use p/q")
        return Fraction(text)
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _unify(a: Sequence[str], b: Sequence[str]) -> tuple[str, ...]:
    out = list(a)
    for name in b:
        if name not in out:
            out.append(name)
    return tuple(out)


class Polynomial:
    """Sparse polynomial with Fraction coefficients.

    ``variables`` fixes the meaning of each exponent slot; arithmetic
    between polynomials over different variable lists works on the union.
    Instances are treated as immutable.
    """

    __slots__ = ("variables", "terms", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple, Number] | None = None):
        self.variables = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ValueError(f"repeated variable in {self.variables}")
        n = len(self.variables)
        clean: dict[tuple, Fraction] = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != n:
                raise ValueError(f"exponent {exps} does not match variables {self.variables}")
            if any(e < 0 for e in exps):
                raise ValueError("negative exponent")
            c = as_rational(coeff)
            if c:
                clean[exps] = clean.get(exps, Fraction(0)) + c
                if not clean[exps]:
                    del clean[exps]
        self.terms = clean
        self._hash = None

    # construction -----------------------------------------------------------
    @classmethod
    def constant(cls, c: Number, variables: Sequence[str] = ()) -> "Polynomial":
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def variable(cls, name: str, variables: Sequence[str] | None = None) -> "Polynomial":
        variables = tuple(variables) if variables is not None else (name,)
        if name not in variables:
            variables = variables + (name,)
        exps = tuple(1 if v == name else 0 for v in variables)
        return cls(variables, {exps: 1})

    @classmethod
    def parse(cls, text: str, variables: Sequence[str] = ()) -> "Polynomial":
        """Parse an arithmetic expression such as ``"4*(1-t)*(1+t-s)^3"``.

        Both ``^`` and ``**`` denote powers. Division is only allowed by
        constants. Names not in ``variables`` are appended in order of
        first appearance.
        """
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ValueError(f"cannot parse polynomial {text!r}: {exc.msg}") from None
        poly = _PolyBuilder(tuple(variables)).visit(tree.body)
        names = _unify(variables, poly.variables)
        return poly.with_variables(names)

    @classmethod
    def coerce(cls, value, variables: Sequence[str] = ()) -> "Polynomial":
        if isinstance(value, Polynomial):
            return value
        if isinstance(value, AffineFunction):
            return value.as_polynomial()
        if isinstance(value, str):
            return cls.parse(value, variables)
        return cls.constant(as_rational(value), variables)

    # structure --------------------------------------------------------------
    def with_variables(self, variables: Sequence[str]) -> "Polynomial":
        """Re-express over ``variables``; dropped names must not occur."""
        variables = tuple(variables)
        if variables == self.variables:
            return self
        index = {v: i for i, v in enumerate(variables)}
        used = self.free_variables()
        missing = [v for v in used if v not in index]
        if missing:
            raise ValueError(f"variables {missing} occur but are not in {variables}")
        positions = [(index[v], i) for i, v in enumerate(self.variables) if v in index]
        out = {}
        for exps, c in self.terms.items():
            new = [0] * len(variables)
            for j, i in positions:
                new[j] = exps[i]
            out[tuple(new)] = c
        return Polynomial(variables, out)

    def free_variables(self) -> tuple[str, ...]:
        used = set()
        for exps in self.terms:
            used.update(i for i, e in enumerate(exps) if e)
        return tuple(v for i, v in enumerate(self.variables) if i in used)

    def degree(self, var: str | None = None) -> int:
        """Total degree, or the degree in ``var``; the zero polynomial has degree -1."""
        if not self.terms:
            return -1
        if var is None:
            return max(sum(e) for e in self.terms)
        if var not in self.variables:
            return 0
        i = self.variables.index(var)
        return max(e[i] for e in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return next(iter(self.terms.values()), Fraction(0))

    def univariate_coefficients(self, var: str | None = None) -> list[Fraction]:
        """Coefficient list, lowest degree first, of a polynomial in one variable."""
        free = self.free_variables()
        if var is None:
            if len(free) > 1:
                raise ValueError(f"{self} is not univariate")
            var = free[0] if free else (self.variables[0] if self.variables else "x")
        elif any(v != var for v in free):
            raise ValueError(f"{self} depends on variables other than {var}")
        i = self.variables.index(var) if var in self.variables else None
        deg = max(self.degree(var), 0)
        coeffs = [Fraction(0)] * (deg + 1)
        for exps, c in self.terms.items():
            coeffs[exps[i] if i is not None else 0] += c
        return coeffs

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[Number], var: str) -> "Polynomial":
        return cls((var,), {(k,): c for k, c in enumerate(coeffs)})

    # arithmetic -------------------------------------------------------------
    def _aligned(self, other) -> tuple["Polynomial", "Polynomial"]:
        if not isinstance(other, Polynomial):
            other = Polynomial.coerce(other, self.variables)
        names = _unify(self.variables, other.variables)
        return self.with_variables(names), other.with_variables(names)

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other, self.variables)
        elif not isinstance(other, Polynomial):
            return NotImplemented
        a, b = self._aligned(other)
        out = dict(a.terms)
        for exps, c in b.terms.items():
            out[exps] = out.get(exps, 0) + c
        return Polynomial(a.variables, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other, self.variables)
        elif not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Polynomial(self.variables, {e: c * other for e, c in self.terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        a, b = self._aligned(other)
        out: dict[tuple, Fraction] = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                key = tuple(x + y for x, y in zip(e1, e2))
                out[key] = out.get(key, 0) + c1 * c2
        return Polynomial(a.variables, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = Polynomial.constant(1, self.variables)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        a, b = self._aligned(other)
        return a.terms == b.terms

    def __hash__(self):
        if self._hash is None:
            names = sorted(self.free_variables())
            canon = self.with_variables(names)
            self._hash = hash((tuple(names), frozenset(canon.terms.items())))
        return self._hash

    # calculus and evaluation -----------------------------------------------
    def evaluate(self, point: Mapping[str, Number] | Sequence[Number]):
        """Evaluate at a point given by name or positionally.

        Returns a Fraction for rational input; other numeric types
        (e.g. mpmath values) pass through the same arithmetic.
        """
        if isinstance(point, Mapping):
            values = []
            for v in self.variables:
                if v in point:
                    values.append(point[v])
                elif v in self.free_variables():
                    raise KeyError(f"no value for variable {v}")
                else:
                    values.append(0)
        else:
            values = list(point)
            if len(values) != len(self.variables):
                raise ValueError(f"expected {len(self.variables)} values, got {len(values)}")
        total = Fraction(0)
        for exps, c in self.terms.items():
            term = c
            for x, e in zip(values, exps):
                if e:
                    term = term * x**e
            total = total + term
        return total

    __call__ = evaluate

    def substitute(self, mapping: Mapping[str, object]) -> "Polynomial":
        """Replace variables by polynomials or numbers."""
        subs = {k: Polynomial.coerce(v) for k, v in mapping.items()}
        kept = [v for v in self.variables if v not in subs]
        names = tuple(kept)
        for p in subs.values():
            names = _unify(names, p.variables)
        result = Polynomial.constant(0, names)
        cache: dict[tuple[str, int], Polynomial] = {}
        for exps, c in self.terms.items():
            term = Polynomial.constant(c, names)
            for v, e in zip(self.variables, exps):
                if not e:
                    continue
                if v in subs:
                    key = (v, e)
                    if key not in cache:
                        cache[key] = subs[v] ** e
                    term = term * cache[key]
                else:
                    term = term * Polynomial.variable(v, names) ** e
            result = result + term
        return result

    def diff(self, var: str) -> "Polynomial":
        if var not in self.variables:
            return Polynomial(self.variables)
        i = self.variables.index(var)
        out = {}
        for exps, c in self.terms.items():
            if exps[i]:
                new = list(exps)
                new[i] -= 1
                out[tuple(new)] = c * exps[i]
        return Polynomial(self.variables, out)

    def integrate(self, var: str, lo=None, hi=None) -> "Polynomial":
        """Antiderivative in ``var``, or the definite integral when bounds are given."""
        names = self.variables if var in self.variables else self.variables + (var,)
        p = self.with_variables(names)
        i = names.index(var)
        out = {}
        for exps, c in p.terms.items():
            new = list(exps)
            new[i] += 1
            out[tuple(new)] = c / new[i]
        anti = Polynomial(names, out)
        if lo is None and hi is None:
            return anti
        return anti.substitute({var: hi}) - anti.substitute({var: lo})

    # presentation -----------------------------------------------------------
    def to_terms(self) -> list[dict]:
        return [
            {"coeff": format_rational(c), "exponents": list(e)}
            for e, c in sorted(self.terms.items(), reverse=True)
        ]

    @classmethod
    def from_terms(cls, variables: Sequence[str], terms: Iterable[Mapping]) -> "Polynomial":
        out: dict[tuple, Fraction] = {}
        for t in terms:
            exps = tuple(t["exponents"])
            out[exps] = out.get(exps, 0) + as_rational(t["coeff"])
        return cls(variables, out)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for exps, c in sorted(self.terms.items(), key=lambda kv: (-sum(kv[0]), [-e for e in kv[0]])):
            mono = "*".join(
                v if e == 1 else f"{v}^{e}" for v, e in zip(self.variables, exps) if e
            )
            mag = abs(c)
            if not mono:
                body = format_rational(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{format_rational(mag)}*{mono}"
            parts.append(("- " if c < 0 else "+ ") + body)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __repr__(self):
        return f"Polynomial({str(self)!r}, variables={self.variables})"


class _PolyBuilder(ast.NodeVisitor):
    def __init__(self, variables: tuple[str, ...]):
        self.variables = variables

    def generic_visit(self, node):
        raise ValueError(f"unsupported syntax in polynomial: {ast.dump(node)}")

    def visit_Constant(self, node):
        if isinstance(node.value, bool) or not isinstance(node.value, int):
            raise ValueError(f"only integer literals are allowed, got {node.value!r}")
        return Polynomial.constant(node.value, self.variables)

    def visit_Name(self, node):
        return Polynomial.variable(node.id, self.variables)

    def visit_UnaryOp(self, node):
        operand = self.visit(node.operand)
        if isinstance(node.op, ast.USub):
            return -operand
        if isinstance(node.op, ast.UAdd):
            return operand
        return self.generic_visit(node)

    def visit_BinOp(self, node):
        left = self.visit(node.left)
        right = self.visit(node.right)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            if not right.is_constant() or right.is_zero():
                raise ValueError("division is only allowed by a non-zero constant")
            return left / right.constant_value()
        if isinstance(node.op, ast.Pow):
            if not right.is_constant():
                raise ValueError("exponent must be a constant")
            k = right.constant_value()
            if k.denominator != 1 or k < 0:
                raise ValueError("exponent must be a non-negative integer")
            return left ** int(k)
        return self.generic_visit(node)


@dataclass(frozen=True)
class AffineFunction:
    """c_0 + sum_i c_i x_i with exact coefficients."""

    variables: tuple[str, ...]
    coefficients: tuple[Fraction, ...]
    constant: Fraction = field(default=Fraction(0))

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "coefficients", tuple(as_rational(c) for c in self.coefficients))
        object.__setattr__(self, "constant", as_rational(self.constant))
        if len(self.variables) != len(self.coefficients):
            raise ValueError("one coefficient per variable is required")

    @classmethod
    def from_polynomial(cls, p: Polynomial, variables: Sequence[str] | None = None) -> "AffineFunction":
        if p.degree() > 1:
            raise ValueError(f"{p} is not affine")
        variables = tuple(variables) if variables is not None else p.variables
        p = p.with_variables(variables)
        n = len(variables)
        coeffs = [p.terms.get(tuple(1 if j == i else 0 for j in range(n)), Fraction(0)) for i in range(n)]
        return cls(variables, tuple(coeffs), p.terms.get((0,) * n, Fraction(0)))

    @classmethod
    def parse(cls, text: str, variables: Sequence[str]) -> "AffineFunction":
        return cls.from_polynomial(Polynomial.parse(text, variables), variables)

    def as_polynomial(self) -> Polynomial:
        n = len(self.variables)
        terms = {(0,) * n: self.constant}
        for i, c in enumerate(self.coefficients):
            terms[tuple(1 if j == i else 0 for j in range(n))] = c
        return Polynomial(self.variables, terms)

    def evaluate(self, point: Sequence[Number]) -> Fraction:
        if len(point) != len(self.variables):
            raise ValueError(f"expected {len(self.variables)} values")
        return self.constant + sum((c * x for c, x in zip(self.coefficients, point)), Fraction(0))

    __call__ = evaluate

    @property
    def is_homogeneous(self) -> bool:
        return self.constant == 0

    def __add__(self, other: "AffineFunction") -> "AffineFunction":
        if isinstance(other, (int, Fraction)):
            return AffineFunction(self.variables, self.coefficients, self.constant + other)
        if other.variables != self.variables:
            raise ValueError("affine functions over different variables")
        return AffineFunction(
            self.variables,
            tuple(a + b for a, b in zip(self.coefficients, other.coefficients)),
            self.constant + other.constant,
        )

    def __mul__(self, k: Number) -> "AffineFunction":
        return AffineFunction(self.variables, tuple(c * k for c in self.coefficients), self.constant * k)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __str__(self):
        return str(self.as_polynomial())


def multinomial(exps: Sequence[int]) -> int:
    out = factorial(sum(exps))
    for e in exps:
        out //= factorial(e)
    return out


def parse_inequalities(text: str, variables: Sequence[str] = ()) -> list[Polynomial]:
    """Parse a (possibly chained) comparison into polynomials ``p`` meaning ``p <= 0``.

    Strict and non-strict comparisons are treated alike; regions are
    closed up since boundaries carry no measure. ``==`` is rejected.
    """
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval").body
    except SyntaxError as exc:
        raise ValueError(f"cannot parse inequality {text!r}: {exc.msg}") from None
    if not isinstance(tree, ast.Compare):
        raise ValueError(f"{text!r} is not a comparison")
    builder = _PolyBuilder(tuple(variables))
    sides = [builder.visit(tree.left)] + [builder.visit(c) for c in tree.comparators]
    out = []
    for op, left, right in zip(tree.ops, sides, sides[1:]):
        if isinstance(op, (ast.LtE, ast.Lt)):
            out.append(left - right)
        elif isinstance(op, (ast.GtE, ast.Gt)):
            out.append(right - left)
        else:
            raise ValueError(f"unsupported comparison in {text!r}")
    names = tuple(variables)
    for p in out:
        names = _unify(names, p.variables)
    return [p.with_variables(names) for p in out]
