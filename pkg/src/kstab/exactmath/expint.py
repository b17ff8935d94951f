"""Closed-form integrals of polynomial times exponential.

An :class:`ExpPolyExpression` is a finite sum of terms
``c * xi**p * exp(q * xi)`` with rational ``c`` and ``q`` and integer
``p`` (possibly negative). Antiderivatives of ``u**k * exp(s*u*xi)``
produce the negative powers of ``xi``; they cancel in the limit
``xi -> 0``, which is evaluated exactly by Laurent expansion.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction
from math import factorial
from typing import Mapping

import mpmath

from .poly import Polynomial, as_rational

DEFAULT_PRECISION = 30


def working_precision() -> int:
    """Decimal digits for numeric evaluation (env KSTAB_PRECISION, minimum 30)."""
    raw = os.environ.get("KSTAB_PRECISION")
    if not raw:
        return DEFAULT_PRECISION
    try:
        digits = int(raw)
    except ValueError:
        raise ValueError(f"KSTAB_PRECISION must be an integer, got {raw!r}") from None
    return max(digits, DEFAULT_PRECISION)


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


class ExpPolyExpression:
    """Sum of ``c * xi**p * exp(q*xi)`` keyed by ``(q, p)``.

    Terms with equal ``(q, p)`` merge on construction. The pure rational
    part is the ``(0, 0)`` term.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple, object] | None = None):
        clean: dict[tuple[Fraction, int], Fraction] = {}
        for (slope, power), coeff in (terms or {}).items():
            key = (as_rational(slope), int(power))
            c = clean.get(key, Fraction(0)) + as_rational(coeff)
            if c:
                clean[key] = c
            else:
                clean.pop(key, None)
        self.terms = clean

    @classmethod
    def rational(cls, value) -> "ExpPolyExpression":
        return cls({(0, 0): value})

    @property
    def rational_part(self) -> Fraction:
        return self.terms.get((Fraction(0), 0), Fraction(0))

    @property
    def slopes(self) -> list[Fraction]:
        return sorted({q for q, _ in self.terms})

    def __add__(self, other: "ExpPolyExpression") -> "ExpPolyExpression":
        if not isinstance(other, ExpPolyExpression):
            return NotImplemented
        merged = dict(self.terms)
        for k, c in other.terms.items():
            merged[k] = merged.get(k, 0) + c
        return ExpPolyExpression(merged)

    def __neg__(self):
        return ExpPolyExpression({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, k) -> "ExpPolyExpression":
        k = as_rational(k)
        return ExpPolyExpression({key: c * k for key, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, ExpPolyExpression):
            return NotImplemented
        return self.terms == other.terms

    def shift(self, delta) -> "ExpPolyExpression":
        """Multiply by ``exp(delta * xi)``."""
        d = as_rational(delta)
        return ExpPolyExpression({(q + d, p): c for (q, p), c in self.terms.items()})

    def value_at_zero(self) -> Fraction:
        """Exact value at xi = 0 (the constant Laurent coefficient).

        Raises if the negative powers of xi do not cancel, which would mean
        the expression is singular at 0.
        """
        min_power = min((p for _, p in self.terms), default=0)
        for m in range(1, -min_power + 1):
            residue = self._laurent_coefficient(-m)
            if residue:
                raise ArithmeticError(f"expression has a pole of order {m} at xi = 0")
        return self._laurent_coefficient(0)

    def _laurent_coefficient(self, j: int) -> Fraction:
        # xi**p * exp(q xi) = sum_k q**k / k! * xi**(p+k)
        total = Fraction(0)
        for (q, p), c in self.terms.items():
            k = j - p
            if k < 0:
                continue
            total += c * q**k / factorial(k)
        return total

    def evaluate(self, xi, digits: int | None = None):
        """Value at ``xi``.

        Exact ``xi == 0`` returns a Fraction; anything else returns an
        ``mpmath.mpf`` computed with enough guard digits to absorb the
        cancellation between terms.
        """
        if _is_exact(xi) and xi == 0:
            return self.value_at_zero()
        digits = digits or working_precision()
        x = float(xi)
        if x == 0.0:
            # numerically zero but not exactly: fall back to the exact limit
            v = self.value_at_zero()
            with mpmath.workdps(digits):
                return mpmath.mpf(v.numerator) / v.denominator
        # estimate the largest term magnitude to size the guard digits
        largest = 0.0
        for (q, p), c in self.terms.items():
            mag = math.log10(abs(float(c))) + p * math.log10(abs(x)) + float(q) * x / math.log(10)
            largest = max(largest, mag)
        guard = int(math.ceil(largest)) + 10
        with mpmath.workdps(digits + guard):
            xv = mpmath.mpf(xi) if not _is_exact(xi) else mpmath.mpf(xi.numerator) / xi.denominator
            total = mpmath.mpf(0)
            for (q, p), c in sorted(self.terms.items()):
                total += (mpmath.mpf(c.numerator) / c.denominator) * xv**p * mpmath.exp(
                    (mpmath.mpf(q.numerator) / q.denominator) * xv
                )
        with mpmath.workdps(digits):
            return +total

    __call__ = evaluate

    def __repr__(self):
        body = " + ".join(f"{c}*xi^{p}*e^({q}xi)" for (q, p), c in sorted(self.terms.items()))
        return f"ExpPolyExpression({body or '0'})"


def integrate_poly_exp(q: Polynomial, slope, interval) -> ExpPolyExpression:
    """Closed form of the integral of q(u) * exp(slope * u * xi) over [a, b].

    ``q`` must be univariate. With ``c = slope * xi`` the antiderivative is
    ``exp(c u) * sum_k (-1)**k q^(k)(u) / c**(k+1)``; each derivative value
    at an endpoint is an exact rational, so the result is a finite sum of
    rational multiples of ``xi**(-k-1) * exp(slope * endpoint * xi)``.
    """
    lo, hi = (as_rational(x) for x in interval)
    if lo > hi:
        raise ValueError(f"interval [{lo}, {hi}] is reversed")
    coeffs = q.univariate_coefficients()
    var = "u"
    poly = Polynomial.from_coefficients(coeffs, var)
    s = as_rational(slope)
    if s == 0:
        return ExpPolyExpression.rational(poly.integrate(var, lo, hi).constant_value())
    terms: dict[tuple[Fraction, int], Fraction] = {}
    deriv = poly
    k = 0
    while not deriv.is_zero():
        for endpoint, sign in ((hi, 1), (lo, -1)):
            value = deriv.evaluate([endpoint])
            if value:
                key = (s * endpoint, -(k + 1))
                terms[key] = terms.get(key, 0) + sign * (-1) ** k * value / s ** (k + 1)
        deriv = deriv.diff(var)
        k += 1
    return ExpPolyExpression(terms)
