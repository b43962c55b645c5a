"""Fourier-Motzkin elimination, LP-based redundancy removal and projection."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from fractions import Fraction

from zchannel_regions.errors import InfeasibleSystemError, VariableError
from zchannel_regions.models import Relation
from zchannel_regions.polyproj.simplex import LPStatus, is_feasible, maximize
from zchannel_regions.polyproj.system import LinearSystem, Number, Row

logger = logging.getLogger(__name__)


def _normalize(row: Row) -> Row:
    """Scale so the first nonzero coefficient has magnitude 1."""
    lead = next((c for c in row.coeffs if c != 0), None)
    if lead is None:
        return row
    scale = abs(lead)
    if scale == 1:
        return row
    return Row(tuple(c / scale for c in row.coeffs), row.rhs / scale, row.rel, row.label)


def _trivial_slack(row: Row, tol: Number) -> bool:
    """True for rows ``0 <= b`` with b >= -tol (always satisfied)."""
    return row.is_trivial() and row.rhs >= -tol


def _dedupe(rows: Iterable[Row]) -> list[Row]:
    seen: set[tuple[tuple[Number, ...], Number]] = set()
    out = []
    for row in rows:
        key = (row.coeffs, row.rhs)
        if key not in seen:
            seen.add(key)
            out.append(row)
    return out


def _tol_for(sys: LinearSystem, tol: float) -> Number:
    return Fraction(0) if sys.exact else tol


def fme_eliminate(sys: LinearSystem, victim: str, tol: float = 1e-9) -> LinearSystem:
    """Eliminate ``victim`` by pairing every positive row with every negative row.

    Equalities are expanded to inequality pairs first. Rows are normalized and
    exact duplicates and always-true ``0 <= b`` rows are dropped; no other
    redundancy is removed.
    """
    k = sys.index(victim)
    zero_rows: list[Row] = []
    pos: list[Row] = []
    neg: list[Row] = []
    for row in sys.inequality_rows():
        c = row.coeffs[k]
        if c > 0:
            pos.append(row)
        elif c < 0:
            neg.append(row)
        else:
            zero_rows.append(row)

    def drop(coeffs: Sequence[Number]) -> tuple[Number, ...]:
        return tuple(c for i, c in enumerate(coeffs) if i != k)

    out: list[Row] = [Row(drop(r.coeffs), r.rhs, Relation.LE, r.label) for r in zero_rows]
    for p in pos:
        for n in neg:
            mp, mn = -n.coeffs[k], p.coeffs[k]
            coeffs = [mp * a + mn * b for a, b in zip(p.coeffs, n.coeffs, strict=True)]
            label = "+".join(x for x in (p.label, n.label) if x)
            out.append(Row(drop(coeffs), mp * p.rhs + mn * n.rhs, Relation.LE, label))

    slack = _tol_for(sys, tol)
    rows = _dedupe(_normalize(r) for r in out if not _trivial_slack(r, slack))
    logger.debug(
        "Eliminated %s: %d positive x %d negative + %d zero -> %d rows",
        victim, len(pos), len(neg), len(zero_rows), len(rows),
    )
    variables = tuple(v for v in sys.variables if v != victim)
    return LinearSystem(variables, tuple(rows), sys.mode)


def prune_parallel(sys: LinearSystem) -> LinearSystem:
    """Among rows with identical normalized coefficients keep only the tightest."""
    best: dict[tuple[Number, ...], Row] = {}
    order: list[tuple[Number, ...]] = []
    for row in (_normalize(r) for r in sys.inequality_rows()):
        current = best.get(row.coeffs)
        if current is None:
            order.append(row.coeffs)
            best[row.coeffs] = row
        elif row.rhs < current.rhs:
            best[row.coeffs] = row
    return sys.with_rows(best[c] for c in order)


def remove_redundant(sys: LinearSystem, tol: float = 1e-9) -> LinearSystem:
    """Drop every row implied by the remaining ones (one LP per row).

    A row ``a.x <= b`` is redundant when max a.x over the other rows is at most
    b (+ tol in float mode). Rows are tested in order and removed as found, so
    one copy of duplicated rows survives.
    """
    slack = _tol_for(sys, tol)
    rows = []
    for row in sys.inequality_rows():
        if row.is_trivial():
            if row.rhs < -slack:
                raise InfeasibleSystemError(f"row '0 <= {row.rhs}' can never hold")
            continue
        rows.append(row)

    n = len(sys.variables)
    if not is_feasible([(r.coeffs, r.rhs) for r in rows], n, sys.exact):
        raise InfeasibleSystemError("system has no feasible point; redundancy is undefined")

    kept = list(rows)
    i = 0
    while i < len(kept):
        others = [(r.coeffs, r.rhs) for j, r in enumerate(kept) if j != i]
        result = maximize(kept[i].coeffs, others, sys.exact, tol)
        if result.status is LPStatus.OPTIMAL and result.value is not None:
            if result.value <= kept[i].rhs + slack:
                del kept[i]
                continue
        i += 1
    logger.debug("remove_redundant: %d -> %d rows", len(rows), len(kept))
    return sys.with_rows(kept)


def elimination_counts(sys: LinearSystem, var: str) -> tuple[int, int]:
    k = sys.index(var)
    rows = sys.inequality_rows()
    return (sum(1 for r in rows if r.coeffs[k] > 0), sum(1 for r in rows if r.coeffs[k] < 0))


def project(
    sys: LinearSystem,
    keep: Iterable[str],
    tol: float = 1e-9,
    order: Sequence[str] | None = None,
) -> LinearSystem:
    """Project onto ``keep`` by eliminating every other variable, then remove redundancy.

    Without an explicit ``order`` the next victim is the one minimizing
    (#positive rows x #negative rows), ties broken by declaration order.
    """
    keep_set = set(keep)
    unknown = sorted(keep_set - set(sys.variables))
    if unknown:
        raise VariableError(f"cannot keep unknown variables {unknown}")
    victims = [v for v in sys.variables if v not in keep_set]
    if order is not None:
        if sorted(order) != sorted(victims):
            raise VariableError(f"elimination order {list(order)} != victims {victims}")
        victims = list(order)

    current = sys.expanded()
    chosen: list[str] = []
    while victims:
        if order is None:
            scores = [
                (pos * neg, idx)
                for idx, (pos, neg) in enumerate(elimination_counts(current, v) for v in victims)
            ]
            victim = victims[min(scores)[1]]
        else:
            victim = victims[0]
        victims.remove(victim)
        chosen.append(victim)
        current = prune_parallel(fme_eliminate(current, victim, tol))

    result = remove_redundant(current, tol)
    logger.info(
        "Projected %d-variable system onto %s (order %s): %d rows",
        len(sys.variables), list(result.variables), chosen, len(result.rows),
    )
    return result
