"""Exact two-phase tableau simplex over ``fractions.Fraction``.

Solves ``min c.w  s.t.  M w = r, w >= 0``. Pivoting follows Bland's rule
(lowest-index entering column, lowest-index leaving basic variable on ratio
ties), which guarantees termination.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None = None
    x: list[Fraction] | None = None
    pivots: int = 0


class _Tableau:
    def __init__(self, rows: list[list[Fraction]], basis: list[int]):
        self.rows = rows
        self.basis = basis
        self.pivots = 0

    def pivot(self, r: int, col: int, obj: list[Fraction]):
        prow = self.rows[r]
        piv = prow[col]
        if piv != ONE:
            prow = [v / piv if v else v for v in prow]
            self.rows[r] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[col]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
        f = obj[col]
        if f:
            for j in nz:
                obj[j] -= f * prow[j]
        self.basis[r] = col
        self.pivots += 1

    def run(self, obj: list[Fraction], allowed: int, max_pivots: int | None) -> str:
        """Minimize; ``obj`` holds reduced costs (last entry = -objective)."""
        while True:
            col = next((j for j in range(allowed) if obj[j] < 0), None)
            if col is None:
                return "optimal"
            best = None
            for i, row in enumerate(self.rows):
                a = row[col]
                if a > 0:
                    ratio = row[-1] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            self.pivot(best[1], col, obj)
            if max_pivots is not None and self.pivots > max_pivots:
                raise RuntimeError(f"simplex exceeded {max_pivots} pivots")


def solve(
    columns: Sequence[dict[int, Fraction]],
    rhs: Sequence[Fraction],
    cost: Sequence[Fraction],
    max_pivots: int | None = None,
) -> LPResult:
    """Minimize ``cost . w`` subject to ``sum_j columns[j] * w_j = rhs``, ``w >= 0``.

    ``columns[j]`` is a sparse column ``{row: coefficient}``.
    """
    m, n = len(rhs), len(columns)
    width = n + m + 1
    rows = [[ZERO] * width for _ in range(m)]
    for j, col in enumerate(columns):
        for i, v in col.items():
            if v:
                rows[i][j] = Fraction(v)
    for i in range(m):
        rows[i][-1] = Fraction(rhs[i])
        if rows[i][-1] < 0:
            rows[i] = [-v for v in rows[i]]
        rows[i][n + i] = ONE
    tab = _Tableau(rows, [n + i for i in range(m)])

    # phase 1: minimize the sum of artificials
    obj = [ZERO] * width
    for row in rows:
        for j in range(n):
            if row[j]:
                obj[j] -= row[j]
        obj[-1] -= row[-1]
    tab.run(obj, n, max_pivots)
    if obj[-1] != 0:
        return LPResult("infeasible", pivots=tab.pivots)

    # drive zero-level artificials out of the basis, dropping redundant rows
    r = 0
    while r < len(tab.rows):
        if tab.basis[r] >= n:
            row = tab.rows[r]
            col = next((j for j in range(n) if row[j]), None)
            if col is None:
                del tab.rows[r]
                del tab.basis[r]
                continue
            tab.pivot(r, col, obj)
        r += 1

    # phase 2
    obj = [ZERO] * width
    for j in range(n):
        obj[j] = Fraction(cost[j])
    for i, b in enumerate(tab.basis):
        cb = Fraction(cost[b])
        if cb:
            row = tab.rows[i]
            for j, v in enumerate(row):
                if v:
                    obj[j] -= cb * v
    status = tab.run(obj, n, max_pivots)
    if status == "unbounded":
        return LPResult("unbounded", pivots=tab.pivots)
    x = [ZERO] * n
    for i, b in enumerate(tab.basis):
        x[b] = tab.rows[i][-1]
    value = sum((Fraction(cost[j]) * x[j] for j in range(n) if x[j]), ZERO)
    return LPResult("optimal", value, x, tab.pivots)
