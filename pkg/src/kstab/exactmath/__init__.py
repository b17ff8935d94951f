"""Exact arithmetic layer: rationals, polynomials, linear algebra, exp-poly integrals."""

from .expint import ExpPolyExpression, integrate_poly_exp, working_precision
from .linalg import det, nullspace, rank, rref, solve
from .matspace import constrained_matrix_space, preserves_pencil
from .poly import (
    AffineFunction,
    Polynomial,
    Rational,
    as_rational,
    format_rational,
    multinomial,
    parse_inequalities,
)
from .roots import BracketError, RootInterval, real_roots, solve_root_bracketed

__all__ = [
    "AffineFunction",
    "BracketError",
    "ExpPolyExpression",
    "Polynomial",
    "Rational",
    "RootInterval",
    "as_rational",
    "constrained_matrix_space",
    "det",
    "format_rational",
    "integrate_poly_exp",
    "multinomial",
    "nullspace",
    "parse_inequalities",
    "preserves_pencil",
    "rank",
    "real_roots",
    "rref",
    "solve",
    "solve_root_bracketed",
    "working_precision",
]
