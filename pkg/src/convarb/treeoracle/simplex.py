"""Dense exact-rational simplex for ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0``.

The slack basis is feasible because ``b >= 0``, so no phase I is needed.
Pivoting follows Bland's rule, which rules out cycling on the heavily
degenerate programs the oracle produces.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import DomainError

__all__ = ["LPSolution", "solve_lp"]

_ZERO = Fraction(0)


@dataclass
class LPSolution:
    value: Fraction
    x: list
    duals: list
    pivots: int


def solve_lp(A, b, c, max_pivots: int = 1_000_000) -> LPSolution:
    """Solve the program exactly.

    Parameters
    ----------
    A : list of list of Fraction
        Constraint rows.
    b : list of Fraction
        Nonnegative right-hand sides.
    c : list of Fraction
        Objective coefficients (maximized).

    Returns
    -------
    LPSolution
        ``duals[i]`` is the multiplier of row ``i`` at the optimum.
    """
    m, n = len(A), len(c)
    if any(bi < 0 for bi in b):
        raise DomainError("right-hand side must be nonnegative")
    width = n + m
    rows = []
    for i, row in enumerate(A):
        r = [Fraction(v) for v in row] + [_ZERO] * m + [Fraction(b[i])]
        r[n + i] = Fraction(1)
        rows.append(r)
    obj = [-Fraction(v) for v in c] + [_ZERO] * m + [_ZERO]
    basis = list(range(n, n + m))
    pivots = 0
    while True:
        enter = next((j for j in range(width) if obj[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                ratio = rows[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise DomainError("program is unbounded")
        r = best[1]
        prow = rows[r]
        inv = 1 / prow[enter]
        if inv != 1:
            prow = rows[r] = [v * inv for v in prow]
        nz = [j for j in range(width + 1) if prow[j] != 0]
        for i in range(m):
            f = rows[i][enter]
            if i != r and f != 0:
                row = rows[i]
                for j in nz:
                    row[j] -= f * prow[j]
        f = obj[enter]
        for j in nz:
            obj[j] -= f * prow[j]
        basis[r] = enter
        pivots += 1
        if pivots > max_pivots:
            raise DomainError("pivot limit reached")
    x = [_ZERO] * n
    for i, k in enumerate(basis):
        if k < n:
            x[k] = rows[i][-1]
    return LPSolution(obj[-1], x, obj[n:n + m], pivots)
