"""Root finding: a safeguarded bracketing solver and exact univariate isolation."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Callable, Sequence


class BracketError(ValueError):
    """The function does not change sign over the bracket."""


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def solve_root_bracketed(f: Callable, bracket: Sequence, tol=1e-14, max_iter: int = 500):
    """Root of a continuous function with a sign change on ``bracket``.

    Bisection keeps the bracket valid; a secant (regula falsi, Illinois
    variant) proposal is taken whenever it lands strictly inside and the
    previous step shrank the bracket by at least half. The arithmetic type
    of the endpoints is preserved, so mpmath inputs give mpmath output.
    """
    lo, hi = bracket
    if not lo < hi:
        raise BracketError(f"bracket [{lo}, {hi}] is empty")
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if _sign(flo) == _sign(fhi):
        raise BracketError(f"f has the same sign at {lo} and {hi}")
    use_secant = True
    side = 0
    for _ in range(max_iter):
        width = hi - lo
        if width <= tol:
            break
        x = None
        if use_secant:
            x = hi - fhi * (hi - lo) / (fhi - flo)
            if not lo < x < hi:
                x = None
        if x is None:
            x = lo + (hi - lo) / 2
        fx = f(x)
        if fx == 0:
            return x
        if _sign(fx) == _sign(flo):
            lo, flo = x, fx
            if side == -1:
                fhi = fhi / 2
            side = -1
        else:
            hi, fhi = x, fx
            if side == 1:
                flo = flo / 2
            side = 1
        # any step that failed to halve the bracket is followed by a bisection
        use_secant = hi - lo <= width / 2
    return lo + (hi - lo) / 2


# exact univariate tools -----------------------------------------------------
# Polynomials here are coefficient lists, lowest degree first.


def _trim(p: list[Fraction]) -> list[Fraction]:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def poly_eval(p: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_divmod(a, b):
    a, b = _trim([Fraction(x) for x in a]), _trim([Fraction(x) for x in b])
    if not b:
        raise ZeroDivisionError("division by the zero polynomial")
    quot = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    rem = list(a)
    while len(rem) >= len(b) and rem:
        shift = len(rem) - len(b)
        f = rem[-1] / b[-1]
        quot[shift] = f
        for i, c in enumerate(b):
            rem[i + shift] -= f * c
        rem = _trim(rem)
    return _trim(quot), rem


def poly_derivative(p):
    return [k * c for k, c in enumerate(p)][1:]


def sturm_sequence(p) -> list[list[Fraction]]:
    p = _trim([Fraction(x) for x in p])
    seq = [p, _trim(poly_derivative(p))]
    while seq[-1]:
        _, r = poly_divmod(seq[-2], seq[-1])
        seq.append([-c for c in r])
    return seq[:-1]


def _variations(seq, x) -> int:
    signs = [s for s in (_sign(poly_eval(q, x)) for q in seq) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _squarefree(p):
    p = _trim([Fraction(x) for x in p])
    d = _trim(poly_derivative(p))
    if not d:
        return p
    g = p
    h = d
    while h:
        g, h = h, poly_divmod(g, h)[1]
    if len(g) <= 1:
        return p
    return poly_divmod(p, g)[0]


@dataclass(frozen=True)
class RootInterval:
    """An irrational root known to lie in [lo, hi]."""

    lo: Fraction
    hi: Fraction

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2


def real_roots(p, lo: Fraction, hi: Fraction, width=Fraction(1, 10**12)):
    """Distinct real roots of p in [lo, hi], ascending.

    Rational roots are returned exactly; irrational ones as
    :class:`RootInterval` objects of width at most ``width``.
    """
    p = _squarefree(p)
    lo, hi = Fraction(lo), Fraction(hi)
    if len(p) <= 1:
        return []
    found: list = []
    for x in (lo, hi):
        if poly_eval(p, x) == 0 and x not in found:
            found.append(x)
    seq = sturm_sequence(p)

    def count(a, b):  # roots in (a, b]
        return _variations(seq, a) - _variations(seq, b)

    stack = [(lo, hi)]
    intervals = []
    while stack:
        a, b = stack.pop()
        n = count(a, b) - (1 if poly_eval(p, b) == 0 else 0)
        if n == 0:
            continue
        if n == 1:
            intervals.append((a, b))
            continue
        m = (a + b) / 2
        if poly_eval(p, m) == 0:
            found.append(m)
        stack.append((a, m))
        stack.append((m, b))
    for a, b in intervals:
        root = _refine(p, a, b, width)
        if root is not None and root not in found:
            found.append(root)
    return sorted(found, key=lambda r: r if isinstance(r, Fraction) else r.midpoint)


def _refine(p, a: Fraction, b: Fraction, width: Fraction):
    # exactly one root in the open interval (a, b); a and b are not roots
    if len(_trim(p)) == 2:
        return -p[0] / p[1]
    if len(_trim(p)) == 3:
        exact = _quadratic_root_in(p, a, b)
        if exact is not None:
            return exact
    sa = _sign(poly_eval(p, a))
    while b - a > width:
        m = (a + b) / 2
        sm = _sign(poly_eval(p, m))
        if sm == 0:
            return m
        if sm == sa:
            a = m
        else:
            b = m
    guess = ((a + b) / 2).limit_denominator(10**6)
    if a <= guess <= b and poly_eval(p, guess) == 0:
        return guess
    return RootInterval(a, b)


def _quadratic_root_in(p, a, b):
    c0, c1, c2 = p
    disc = c1 * c1 - 4 * c2 * c0
    if disc < 0:
        return None
    num, den = disc.numerator, disc.denominator
    rn, rd = _isqrt_exact(num), _isqrt_exact(den)
    if rn is None or rd is None:
        return None
    root = Fraction(rn, rd)
    for cand in ((-c1 + root) / (2 * c2), (-c1 - root) / (2 * c2)):
        if a < cand < b:
            return cand
    return None


def _isqrt_exact(n: int):
    r = isqrt(n)
    return r if r * r == n else None
