"""Vertex enumeration of small bounded polytopes by active-set combinatorics."""

from __future__ import annotations

import itertools
import logging
from collections.abc import Sequence
from fractions import Fraction

import numpy as np

from zchannel_regions.errors import InfeasibleSystemError, PreconditionError, UnboundedRegionError
from zchannel_regions.polyproj.simplex import LPStatus, maximize
from zchannel_regions.polyproj.system import LinearSystem, Number

logger = logging.getLogger(__name__)

MAX_VERTEX_DIMENSION = 4

Point = tuple[float, ...]


def _solve_exact(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    """Gauss-Jordan on a square rational system; None when singular."""
    n = len(b)
    m = [[*row, rhs] for row, rhs in zip(a, b, strict=True)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [v / p for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col], strict=True)]
    return [m[r][n] for r in range(n)]


def _distance(p: Point, q: Point) -> float:
    return max((abs(a - b) for a, b in zip(p, q, strict=True)), default=0.0)


def check_bounded(sys: LinearSystem, tol: float = 1e-9) -> None:
    """Raise unless every coordinate is bounded above and below on the feasible set."""
    rows = [(r.coeffs, r.rhs) for r in sys.inequality_rows()]
    n = len(sys.variables)
    one: Number = Fraction(1) if sys.exact else 1.0
    zero: Number = Fraction(0) if sys.exact else 0.0
    for i in range(n):
        for sign in (one, -one):
            objective = [sign if j == i else zero for j in range(n)]
            result = maximize(objective, rows, sys.exact, tol)
            if result.status is LPStatus.INFEASIBLE:
                raise InfeasibleSystemError("polytope is empty")
            if result.status is LPStatus.UNBOUNDED:
                ray = tuple(float(d) for d in result.ray or ())
                raise UnboundedRegionError(ray, sys.variables)


def enumerate_vertices(sys: LinearSystem, tol: float = 1e-9) -> list[Point]:
    """All basic feasible solutions, deduplicated at ``tol`` and sorted lexicographically.

    Every d-subset of rows (d = number of variables) is tried as an active set,
    in lexicographic order of row indices; the first subset reaching a vertex
    wins ties.
    """
    d = len(sys.variables)
    if d > MAX_VERTEX_DIMENSION:
        raise PreconditionError(
            "enumerate_vertices", f"{d} variables (at most {MAX_VERTEX_DIMENSION})"
        )
    check_bounded(sys, tol)
    rows = sys.inequality_rows()
    if d == 0:
        return [()]

    found: list[Point] = []
    for subset in itertools.combinations(range(len(rows)), d):
        active = [rows[i] for i in subset]
        if sys.exact:
            sol = _solve_exact(
                [[Fraction(c) for c in r.coeffs] for r in active],
                [Fraction(r.rhs) for r in active],
            )
            if sol is None or not sys.contains(sol, 0.0):
                continue
            point = tuple(float(x) for x in sol)
        else:
            a = np.array([[float(c) for c in r.coeffs] for r in active])
            b = np.array([float(r.rhs) for r in active])
            if abs(np.linalg.det(a)) < 1e-12 or np.linalg.cond(a) > 1e12:
                continue
            x = np.linalg.solve(a, b)
            if not sys.contains(tuple(float(v) for v in x), tol):
                continue
            point = tuple(float(v) for v in x)
        if not any(_distance(point, v) <= tol for v in found):
            found.append(point)

    found.sort()
    logger.debug("Enumerated %d vertices from %d rows", len(found), len(rows))
    return found


def vertex_sets_match(a: Sequence[Point], b: Sequence[Point], tol: float = 1e-9) -> bool:
    """Whether two vertex lists agree as sets, coordinatewise within ``tol``."""

    def covered(xs: Sequence[Point], ys: Sequence[Point]) -> bool:
        return all(
            any(_distance(x, y) <= tol for y in ys) for x in xs
        )

    return covered(a, b) and covered(b, a)
