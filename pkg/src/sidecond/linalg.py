"""Exact Gaussian elimination over the rationals."""

from __future__ import annotations

from typing import Sequence

from .polycore import Q


def rref(rows: Sequence[Sequence]) -> tuple:
    """Reduced row echelon form of an augmented matrix.

    Returns ``(matrix, pivots)`` where ``pivots`` lists (column, row) pairs.
    The last column is treated like any other; callers decide its meaning.
    """
    M = [[Q(x) for x in row] for row in rows]
    if not M:
        return M, []
    ncols = len(M[0])
    pivots = []
    r = 0
    for c in range(ncols):
        if r == len(M):
            break
        pr = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if pr is None:
            continue
        M[r], M[pr] = M[pr], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                fct = M[i][c]
                M[i] = [a - fct * b for a, b in zip(M[i], M[r])]
        pivots.append((c, r))
        r += 1
    return M, pivots


def solve(A: Sequence[Sequence], b: Sequence) -> list | None:
    """One exact solution of A x = b (free unknowns set to zero), or None."""
    n = len(A[0]) if A else 0
    aug = [list(row) + [rhs] for row, rhs in zip(A, b)]
    if not aug:
        return [Q(0)] * n
    M, pivots = rref(aug)
    if any(c == n for c, _ in pivots):
        return None
    x = [Q(0)] * n
    for c, r in pivots:
        x[c] = M[r][n]
    return x
