"""Dense two-phase simplex for small LPs, generic over ``Fraction`` and ``float``.

Solves ``maximize c.x subject to A x <= b`` with free variables. Each free
variable is split as x = x+ - x-. Bland's rule (smallest entering index,
smallest basic index on ratio ties) guarantees termination, which matters in
exact arithmetic where degenerate pivots are common.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction

from zchannel_regions.polyproj.system import Number

logger = logging.getLogger(__name__)

_MAX_PIVOTS = 50_000


class LPStatus(StrEnum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    """Outcome of one LP; ``ray`` is an improving recession direction when unbounded."""

    status: LPStatus
    value: Number | None = None
    point: tuple[Number, ...] | None = None
    ray: tuple[Number, ...] | None = None
    pivots: int = 0


class _Tableau:
    def __init__(self, exact: bool, tol: float) -> None:
        self.exact = exact
        self.zero: Number = Fraction(0) if exact else 0.0
        self.one: Number = Fraction(1) if exact else 1.0
        self.tol: Number = Fraction(0) if exact else tol
        self.rows: list[list[Number]] = []
        self.basis: list[int] = []
        self.obj: list[Number] = []
        self.pivots = 0

    def num(self, value: Number | int) -> Number:
        if self.exact:
            return value if isinstance(value, Fraction) else Fraction(value)
        return float(value)

    def pivot(self, r: int, j: int) -> None:
        piv = self.rows[r][j]
        row = [v / piv for v in self.rows[r]]
        self.rows[r] = row
        for i, other in enumerate(self.rows):
            if i != r:
                f = other[j]
                if f != 0:
                    self.rows[i] = [a - f * b for a, b in zip(other, row, strict=True)]
        f = self.obj[j]
        if f != 0:
            self.obj = [a - f * b for a, b in zip(self.obj, row, strict=True)]
        self.basis[r] = j
        self.pivots += 1
        if self.pivots > _MAX_PIVOTS:
            raise RuntimeError("simplex exceeded pivot limit")

    def price_out(self) -> None:
        """Zero the objective coefficients of basic columns."""
        for r, j in enumerate(self.basis):
            f = self.obj[j]
            if f != 0:
                row = self.rows[r]
                self.obj = [a - f * b for a, b in zip(self.obj, row, strict=True)]

    def run(self, n_cols: int) -> int | None:
        """Iterate to optimality; return the unbounded entering column, if any."""
        tol = self.tol
        while True:
            entering = next((j for j in range(n_cols) if self.obj[j] < -tol), None)
            if entering is None:
                return None
            candidates = [
                (row[-1] / row[entering], self.basis[i], i)
                for i, row in enumerate(self.rows)
                if row[entering] > tol
            ]
            if not candidates:
                return entering
            _, _, leaving = min(candidates)
            self.pivot(leaving, entering)


def maximize(
    objective: Sequence[Number],
    rows: Sequence[tuple[Sequence[Number], Number]],
    exact: bool,
    tol: float = 1e-9,
) -> LPResult:
    """maximize objective . x  s.t.  a . x <= b for every (a, b) in ``rows``."""
    n = len(objective)
    m = len(rows)
    t = _Tableau(exact, tol)
    n_struct = 2 * n
    negative = [i for i, (_, b) in enumerate(rows) if t.num(b) < 0]
    n_art = len(negative)
    n_cols = n_struct + m + n_art
    art_of_row = {i: n_struct + m + k for k, i in enumerate(negative)}

    for i, (a, b) in enumerate(rows):
        sign = -1 if i in art_of_row else 1
        row = [t.zero] * (n_cols + 1)
        for k in range(n):
            coef = t.num(a[k]) * sign
            row[2 * k] = coef
            row[2 * k + 1] = -coef
        row[n_struct + i] = t.num(sign)
        if i in art_of_row:
            row[art_of_row[i]] = t.one
            t.basis.append(art_of_row[i])
        else:
            t.basis.append(n_struct + i)
        row[-1] = t.num(b) * sign
        t.rows.append(row)

    if n_art:
        # Phase 1: maximize -(sum of artificials)
        t.obj = [t.zero] * (n_cols + 1)
        for col in art_of_row.values():
            t.obj[col] = t.one
        t.price_out()
        t.run(n_cols)
        if t.obj[-1] < -t.tol:
            logger.debug("LP infeasible after phase 1 (%d pivots)", t.pivots)
            return LPResult(LPStatus.INFEASIBLE, pivots=t.pivots)
        _drive_out_artificials(t, n_struct + m)
        for i, row in enumerate(t.rows):
            t.rows[i] = [*row[: n_struct + m], row[-1]]
        n_cols = n_struct + m

    t.obj = [t.zero] * (n_cols + 1)
    for k in range(n):
        c = t.num(objective[k])
        t.obj[2 * k] = -c
        t.obj[2 * k + 1] = c
    t.price_out()
    unbounded_col = t.run(n_cols)

    values = [t.zero] * n_cols
    for r, j in enumerate(t.basis):
        values[j] = t.rows[r][-1]
    point = tuple(values[2 * k] - values[2 * k + 1] for k in range(n))

    if unbounded_col is not None:
        direction = [t.zero] * n_cols
        direction[unbounded_col] = t.one
        for r, j in enumerate(t.basis):
            direction[j] = -t.rows[r][unbounded_col]
        ray = tuple(direction[2 * k] - direction[2 * k + 1] for k in range(n))
        return LPResult(LPStatus.UNBOUNDED, point=point, ray=ray, pivots=t.pivots)

    return LPResult(LPStatus.OPTIMAL, value=t.obj[-1], point=point, pivots=t.pivots)


def _drive_out_artificials(t: _Tableau, first_art: int) -> None:
    """Pivot zero-valued artificials out of the basis; drop rows that are linearly redundant."""
    r = 0
    while r < len(t.rows):
        if t.basis[r] >= first_art:
            row = t.rows[r]
            col = next((j for j in range(first_art) if abs(row[j]) > t.tol), None)
            if col is None:
                del t.rows[r]
                del t.basis[r]
                continue
            t.pivot(r, col)
        r += 1


def is_feasible(
    rows: Sequence[tuple[Sequence[Number], Number]], n_vars: int, exact: bool
) -> bool:
    zero: Number = Fraction(0) if exact else 0.0
    return maximize([zero] * n_vars, rows, exact).status is not LPStatus.INFEASIBLE
