"""Rate regions: labelled halfspaces over rate coordinates, always with R >= 0."""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from zchannel_regions.errors import InfeasibleSystemError, PreconditionError
from zchannel_regions.models import ArithmeticMode, HalfspaceRecord, Relation, RegionDocument
from zchannel_regions.polyproj.system import LinearSystem
from zchannel_regions.polyproj.vertices import Point, enumerate_vertices

logger = logging.getLogger(__name__)

Z_COORDS: tuple[str, str, str] = ("R11", "R21", "R22")
PAIR_COORDS: tuple[str, str] = ("R1", "R2")


@dataclass(frozen=True)
class Halfspace:
    """``coeffs . R <= rhs``; ``raw`` keeps the unclamped bound value."""

    coeffs: tuple[int, ...]
    rhs: float
    label: str
    raw: float | None = None


class RateRegion:
    """Polytope in rate space given by labelled halfspaces plus nonnegativity."""

    def __init__(self, coords: Sequence[str], halfspaces: Iterable[Halfspace]) -> None:
        self.coords: tuple[str, ...] = tuple(coords)
        bounds = list(halfspaces)
        for h in bounds:
            if len(h.coeffs) != len(self.coords):
                raise ValueError(f"halfspace {h.label!r} does not match coords {self.coords}")
        nonneg = [
            Halfspace(
                tuple(-1 if j == i else 0 for j in range(len(self.coords))),
                0.0,
                f"{name} >= 0",
            )
            for i, name in enumerate(self.coords)
        ]
        self.halfspaces: tuple[Halfspace, ...] = (*bounds, *nonneg)
        self._vertices: list[Point] | None = None

    @classmethod
    def from_bounds(
        cls,
        coords: Sequence[str],
        bounds: Iterable[tuple[Sequence[int], float, str]],
    ) -> RateRegion:
        """Region from raw bound values; negative values clamp to 0."""
        return cls(
            coords,
            [Halfspace(tuple(a), max(float(b), 0.0), label, float(b)) for a, b, label in bounds],
        )

    # --- Views ---

    @property
    def bounds(self) -> tuple[Halfspace, ...]:
        """Halfspaces without the nonnegativity rows."""
        return self.halfspaces[: len(self.halfspaces) - len(self.coords)]

    def rhs(self, label: str) -> float:
        for h in self.halfspaces:
            if h.label == label:
                return h.rhs
        raise KeyError(label)

    def to_system(self, mode: ArithmeticMode = ArithmeticMode.FLOAT) -> LinearSystem:
        return LinearSystem.build(
            self.coords,
            [(h.coeffs, h.rhs, Relation.LE, h.label) for h in self.halfspaces],
            mode=mode,
        )

    def vertices(self, tol: float = 1e-9) -> list[Point]:
        if self._vertices is None:
            self._vertices = enumerate_vertices(self.to_system(), tol)
        return self._vertices

    def contains_point(self, point: Sequence[float], tol: float = 1e-9) -> bool:
        return all(
            sum(c * x for c, x in zip(h.coeffs, point, strict=True)) <= h.rhs + tol
            for h in self.halfspaces
        )

    # --- Serialization ---

    def to_document(self, tol: float = 1e-9) -> RegionDocument:
        return RegionDocument(
            coords=list(self.coords),
            halfspaces=[
                HalfspaceRecord(a=[float(c) for c in h.coeffs], b=h.rhs, label=h.label)
                for h in self.halfspaces
            ],
            vertices=[list(v) for v in self.vertices(tol)],
        )

    def to_json(self, tol: float = 1e-9) -> str:
        return json.dumps(self.to_document(tol).model_dump(), sort_keys=True, indent=2) + "\n"

    def __repr__(self) -> str:
        parts = ", ".join(f"{h.label}<={h.rhs:.6g}" for h in self.bounds)
        return f"RateRegion({','.join(self.coords)}: {parts})"


def region_contains(outer: RateRegion, inner: RateRegion, tol: float = 1e-9) -> bool:
    """True iff every vertex of ``inner`` satisfies every halfspace of ``outer``."""
    if outer.coords != inner.coords:
        raise PreconditionError(
            "region_contains", f"coordinates differ: {outer.coords} vs {inner.coords}"
        )
    for vertex in inner.vertices(tol):
        if not outer.contains_point(vertex, tol):
            logger.debug("Vertex %s of inner region lies outside %r", vertex, outer)
            return False
    return True


def slice_polygon(
    facets: Sequence[tuple[Sequence[float], float]],
    axis: int,
    level: float,
    tol: float = 1e-9,
) -> list[tuple[float, float]]:
    """Polygon cut from a 3-D polytope {a . x <= b} at x[axis] = level.

    Vertices are ordered counter-clockwise; an empty cut gives [].
    """
    rows = []
    for coeffs, rhs in facets:
        rest = [float(c) for i, c in enumerate(coeffs) if i != axis]
        rows.append((rest, float(rhs) - float(coeffs[axis]) * level, Relation.LE, ""))
    sys = LinearSystem.build(("x", "y"), rows)
    try:
        points = enumerate_vertices(sys, tol)
    except InfeasibleSystemError:
        return []
    if not points:
        return []
    cx = sum(p[0] for p in points) / len(points)
    cy = sum(p[1] for p in points) / len(points)
    ordered = sorted(points, key=lambda p: math.atan2(p[1] - cy, p[0] - cx))
    return [(p[0], p[1]) for p in ordered]


def region_slice(region: RateRegion, coord: str, level: float) -> list[tuple[float, float]]:
    axis = region.coords.index(coord)
    return slice_polygon([(h.coeffs, h.rhs) for h in region.halfspaces], axis, level)
