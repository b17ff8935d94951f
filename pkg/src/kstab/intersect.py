"""Intersection forms on named divisor classes and top-power expansions."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import factorial
from typing import Mapping, Sequence

from .exactmath import Polynomial, as_rational


class IntersectionError(ValueError):
    pass


Monomial = tuple[str, ...]  # sorted multiset of class names


def monomial_key(classes: Sequence[str] | Mapping[str, int]) -> Monomial:
    if isinstance(classes, Mapping):
        items = []
        for name, k in classes.items():
            items.extend([name] * int(k))
        classes = items
    return tuple(sorted(classes))


def describe(mono: Monomial) -> str:
    counts = Counter(mono)
    return "*".join(n if k == 1 else f"{n}^{k}" for n, k in sorted(counts.items()))


@dataclass(frozen=True)
class IntersectionForm:
    """Symmetric multilinear form of ``degree`` arguments on ``basis``.

    ``table`` is keyed by sorted multisets of basis names and must be
    complete. ``aliases`` name derived classes as integer/rational
    combinations of the basis (for instance a strict transform).
    """

    name: str
    degree: int
    basis: tuple[str, ...]
    table: Mapping[Monomial, Fraction]
    aliases: Mapping[str, Mapping[str, Fraction]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple(self.basis))
        if len(set(self.basis)) != len(self.basis):
            raise IntersectionError(f"{self.name}: repeated basis class")
        clean: dict[Monomial, Fraction] = {}
        for key, value in dict(self.table).items():
            mono = monomial_key(key)
            if len(mono) != self.degree:
                raise IntersectionError(f"{self.name}: entry {describe(mono)} has degree {len(mono)}, expected {self.degree}")
            unknown = [c for c in mono if c not in self.basis]
            if unknown:
                raise IntersectionError(f"{self.name}: entry {describe(mono)} uses unknown classes {unknown}")
            if mono in clean:
                raise IntersectionError(f"{self.name}: duplicate entry {describe(mono)}")
            clean[mono] = as_rational(value)
        missing = [m for m in combinations_with_replacement(sorted(self.basis), self.degree) if m not in clean]
        if missing:
            raise IntersectionError(
                f"{self.name}: missing intersection number(s) " + ", ".join(describe(m) for m in missing)
            )
        object.__setattr__(self, "table", clean)
        aliases = {}
        for alias, combo in dict(self.aliases).items():
            if alias in self.basis:
                raise IntersectionError(f"{self.name}: alias {alias} shadows a basis class")
            combo = {k: as_rational(v) for k, v in combo.items()}
            bad = [k for k in combo if k not in self.basis]
            if bad:
                raise IntersectionError(f"{self.name}: alias {alias} uses unknown classes {bad}")
            aliases[alias] = combo
        object.__setattr__(self, "aliases", aliases)

    def classes(self) -> tuple[str, ...]:
        return self.basis + tuple(self.aliases)

    def to_basis(self, name: str) -> dict[str, Fraction]:
        if name in self.basis:
            return {name: Fraction(1)}
        if name in self.aliases:
            return dict(self.aliases[name])
        raise IntersectionError(f"{self.name}: unknown class {name!r}")

    def value(self, classes: Sequence[str] | Mapping[str, int]) -> Fraction:
        """Intersection number of a product of (basis or alias) classes."""
        mono = list(monomial_key(classes)) if isinstance(classes, Mapping) else list(classes)
        if len(mono) != self.degree:
            raise IntersectionError(f"{self.name}: need {self.degree} classes, got {len(mono)}")
        expansions = [self.to_basis(c) for c in mono]
        total = Fraction(0)
        for choice in product(*(e.items() for e in expansions)):
            coeff = Fraction(1)
            for _, c in choice:
                coeff *= c
            if coeff:
                total += coeff * self.table[monomial_key([n for n, _ in choice])]
        return total

    def __eq__(self, other):
        if not isinstance(other, IntersectionForm):
            return NotImplemented
        return (self.name, self.degree, self.basis, dict(self.table), dict(self.aliases)) == (
            other.name,
            other.degree,
            other.basis,
            dict(other.table),
            dict(other.aliases),
        )

    __hash__ = None


@dataclass(frozen=True)
class DivisorExpression:
    """Linear combination of classes with polynomial coefficients."""

    coefficients: Mapping[str, Polynomial]

    def __post_init__(self):
        object.__setattr__(
            self, "coefficients", {k: Polynomial.coerce(v) for k, v in dict(self.coefficients).items()}
        )

    @classmethod
    def parse(cls, mapping: Mapping[str, object], variables: Sequence[str] = ()) -> "DivisorExpression":
        return cls({k: Polynomial.coerce(v, variables) for k, v in mapping.items()})

    def in_basis(self, form: IntersectionForm) -> dict[str, Polynomial]:
        out: dict[str, Polynomial] = {}
        for name, coeff in self.coefficients.items():
            for b, c in form.to_basis(name).items():
                out[b] = out.get(b, Polynomial.constant(0)) + coeff * c
        return out

    def __sub__(self, other: "DivisorExpression") -> "DivisorExpression":
        merged = dict(self.coefficients)
        for k, v in other.coefficients.items():
            merged[k] = merged.get(k, Polynomial.constant(0)) - v
        return DivisorExpression(merged)

    def __add__(self, other: "DivisorExpression") -> "DivisorExpression":
        merged = dict(self.coefficients)
        for k, v in other.coefficients.items():
            merged[k] = merged.get(k, Polynomial.constant(0)) + v
        return DivisorExpression(merged)

    def scale(self, k) -> "DivisorExpression":
        return DivisorExpression({n: c * as_rational(k) for n, c in self.coefficients.items()})

    def __eq__(self, other):
        if not isinstance(other, DivisorExpression):
            return NotImplemented
        keys = set(self.coefficients) | set(other.coefficients)
        zero = Polynomial.constant(0)
        return all(self.coefficients.get(k, zero) == other.coefficients.get(k, zero) for k in keys)

    __hash__ = None


def expand_power(form: IntersectionForm, expr: DivisorExpression) -> Polynomial:
    """``expr ** degree`` contracted against the form, as a polynomial."""
    coeffs = expr.in_basis(form)
    names = [b for b in form.basis if b in coeffs and not coeffs[b].is_zero()]
    n = form.degree
    total = Polynomial.constant(0)
    powers: dict[tuple[str, int], Polynomial] = {}

    def power(b: str, k: int) -> Polynomial:
        if (b, k) not in powers:
            powers[(b, k)] = coeffs[b] ** k
        return powers[(b, k)]

    for mono in combinations_with_replacement(names, n):
        value = form.table[monomial_key(mono)]
        if not value:
            continue
        counts = Counter(mono)
        mult = factorial(n)
        for k in counts.values():
            mult //= factorial(k)
        term = Polynomial.constant(value * mult)
        for b, k in counts.items():
            term = term * power(b, k)
        total = total + term
    return total


def restricted_volume_from_table(
    form: IntersectionForm, expr: DivisorExpression, fixed_part: DivisorExpression | None = None
) -> Polynomial:
    """Volume of the mobile part ``expr - fixed_part``."""
    mobile = expr if fixed_part is None else expr - fixed_part
    return expand_power(form, mobile)
