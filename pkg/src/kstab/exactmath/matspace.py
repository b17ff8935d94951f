"""Linear spaces of trace-free matrices preserving a pencil of skew forms."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .linalg import nullspace, rank


def _as_square(m, name: str) -> list[list[Fraction]]:
    rows = [[Fraction(x) for x in row] for row in m]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError(f"{name} is not square")
    for i in range(n):
        for j in range(n):
            if rows[i][j] != -rows[j][i]:
                raise ValueError(f"{name} is not skew-symmetric at ({i}, {j})")
    return rows


def constrained_matrix_space(J: Sequence[Sequence], J2: Sequence[Sequence] | None = None) -> list[list[list[Fraction]]]:
    """Basis of {Q in sl_n : Q^T K + K Q in span(J, J2) for K in {J, J2}}.

    Zero forms impose nothing. The unknowns are the n^2 entries of Q plus
    one coefficient per independent spanning form and per constraint;
    since the spanning forms are independent, the projection of the
    solution space onto the Q-entries is injective, so its dimension is
    the answer.
    """
    forms = [_as_square(J, "J")]
    if J2 is not None:
        K2 = _as_square(J2, "J2")
        if len(K2) != len(forms[0]):
            raise ValueError(f"J is {len(forms[0])}x{len(forms[0])} but J2 is {len(K2)}x{len(K2)}")
        forms.append(K2)
    n = len(forms[0])
    nonzero = [K for K in forms if any(any(r) for r in K)]
    flat = [[x for row in K for x in row] for K in nonzero]
    span: list[list[list[Fraction]]] = []
    for K, f in zip(nonzero, flat):
        if rank([g for g in ([x for row in S for x in row] for S in span)] + [f]) > len(span):
            span.append(K)
    constrained: list[list[list[Fraction]]] = []
    for K in nonzero:
        if K not in constrained:
            constrained.append(K)

    nq = n * n
    nmu = len(span) * len(constrained)
    width = nq + nmu
    rows: list[list[Fraction]] = []
    # trace zero
    rows.append([Fraction(int(k // n == k % n)) for k in range(nq)] + [Fraction(0)] * nmu)
    for c, K in enumerate(constrained):
        # (Q^T K + K Q)_{ij} = sum_l q_{li} K_{lj} + K_{il} q_{lj}; skew, so i < j suffices
        for i in range(n):
            for j in range(i + 1, n):
                row = [Fraction(0)] * width
                for l in range(n):
                    row[l * n + i] += K[l][j]
                    row[l * n + j] += K[i][l]
                for b, S in enumerate(span):
                    row[nq + c * len(span) + b] = -S[i][j]
                rows.append(row)
    basis = nullspace(rows, width)
    return [[vec[r * n:(r + 1) * n] for r in range(n)] for vec in basis]


def preserves_pencil(Q, forms) -> bool:
    """Check the defining constraints of :func:`constrained_matrix_space` directly."""
    n = len(Q)
    Q = [[Fraction(x) for x in row] for row in Q]
    if sum(Q[i][i] for i in range(n)) != 0:
        return False
    nonzero = [[[Fraction(x) for x in row] for row in K] for K in forms if any(any(r) for r in K)]
    span = [[x for row in K for x in row] for K in nonzero]
    r0 = rank(span) if span else 0
    for K in nonzero:
        M = [
            [sum(Q[l][i] * K[l][j] + K[i][l] * Q[l][j] for l in range(n)) for j in range(n)]
            for i in range(n)
        ]
        flat = [x for row in M for x in row]
        if any(flat) and rank(span + [flat]) > r0:
            return False
        if not span and any(flat):
            return False
    return True
