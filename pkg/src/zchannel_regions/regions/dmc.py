"""Rate-region evaluators for the discrete memoryless Z channel with state.

Every bound has the Gelfand-Pinsker shape I(aux; output | given) - I(aux; S | given).
Region constructors clamp negative bounds to 0, so achievable regions always
contain the origin.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from zchannel_regions.errors import PreconditionError
from zchannel_regions.models import ArithmeticMode, Relation
from zchannel_regions.polyproj.fme import project, remove_redundant
from zchannel_regions.polyproj.system import LinearSystem
from zchannel_regions.polyproj.vertices import Point, enumerate_vertices, vertex_sets_match
from zchannel_regions.prob.core import JointDistribution, conditional_mutual_information, entropy
from zchannel_regions.regions.region import PAIR_COORDS, Z_COORDS, RateRegion

logger = logging.getLogger(__name__)

SPLIT_VARIABLES: tuple[str, ...] = ("R11", "R21c", "R21p", "R22c", "R22p", "R21", "R22")


def _vars(spec: str) -> list[str]:
    return [s for s in spec.split(",") if s]


def _info(dist: JointDistribution, a: str, b: str, c: str = "") -> float:
    return conditional_mutual_information(dist, _vars(a), _vars(b), _vars(c))


def binned(dist: JointDistribution, aux: str, output: str, given: str = "") -> float:
    """I(aux; output | given) - I(aux; S | given)."""
    return _info(dist, aux, output, given) - _info(dist, aux, "S", given)


def _is_degenerate(dist: JointDistribution, var: str, tol: float = 1e-12) -> bool:
    return dist.size(var) == 1 or entropy(dist, [var]) <= tol


# ============================================================
# Rate-splitting constants and the split-rate system
# ============================================================


@dataclass(frozen=True)
class Theorem1Bounds:
    """The five region constants plus the projection-derived D' (unclamped)."""

    A: float
    B: float
    C: float
    D: float
    E: float
    D_prime: float

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class SplitRateBounds:
    """Right-hand sides of the seven split-rate inequalities (unclamped).

    Each field is named by the auxiliaries decoded and the receiver decoding them.
    The ``binning_*`` fields are the minimum binning rates of each codebook.
    """

    all_at_y1: float  # R11 + R21c + R21p + R22c
    second_sender_at_y1: float  # R21c + R21p + R22c
    w_u1_at_y1: float  # R11 + R21p
    u1_at_y1: float  # R21p
    w_at_y1: float  # R11
    all_at_y2: float  # R21c + R22c + R22p
    u2_at_y2: float  # R22p
    binning_w: float = 0.0
    binning_u: float = 0.0
    binning_u1: float = 0.0
    binning_u2: float = 0.0

    def clamped(self) -> SplitRateBounds:
        values = {k: max(v, 0.0) for k, v in asdict(self).items()}
        return SplitRateBounds(**values)

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


def split_rate_bounds(dist: JointDistribution) -> SplitRateBounds:
    return SplitRateBounds(
        all_at_y1=binned(dist, "W,U,U1", "Y1"),
        second_sender_at_y1=binned(dist, "U,U1", "Y1", "W"),
        w_u1_at_y1=binned(dist, "W,U1", "Y1", "U"),
        u1_at_y1=binned(dist, "U1", "Y1", "W,U"),
        w_at_y1=binned(dist, "W", "Y1", "U,U1"),
        all_at_y2=binned(dist, "U,U2", "Y2"),
        u2_at_y2=binned(dist, "U2", "Y2", "U"),
        binning_w=_info(dist, "W", "S"),
        binning_u=_info(dist, "U", "S"),
        binning_u1=_info(dist, "U1", "S", "U"),
        binning_u2=_info(dist, "U2", "S", "U"),
    )


def theorem1_bounds(dist: JointDistribution) -> Theorem1Bounds:
    """A-E exactly as stated, plus D' = all_at_y1 + u2_at_y2."""
    split = split_rate_bounds(dist)
    bounds = Theorem1Bounds(
        A=binned(dist, "W", "Y1", "U,U1"),
        B=binned(dist, "U1", "Y1", "W,U") + binned(dist, "U,U2", "Y2"),
        C=binned(dist, "U,U1", "Y1", "W") + binned(dist, "U2", "Y2", "U"),
        D=binned(dist, "W,U1", "Y1") + binned(dist, "U2", "Y2", "U"),
        E=binned(dist, "W,U1", "Y1", "U") + binned(dist, "U,U2", "Y2"),
        D_prime=split.all_at_y1 + split.u2_at_y2,
    )
    logger.debug("Theorem-1 constants: %s", bounds)
    return bounds


def state_free_theorem1_bounds(dist: JointDistribution) -> Theorem1Bounds:
    """A-E with every I(.; S | .) term deleted (the stateless Z-channel form)."""
    return Theorem1Bounds(
        A=_info(dist, "W", "Y1", "U,U1"),
        B=_info(dist, "U1", "Y1", "W,U") + _info(dist, "U,U2", "Y2"),
        C=_info(dist, "U,U1", "Y1", "W") + _info(dist, "U2", "Y2", "U"),
        D=_info(dist, "W,U1", "Y1") + _info(dist, "U2", "Y2", "U"),
        E=_info(dist, "W,U1", "Y1", "U") + _info(dist, "U,U2", "Y2"),
        D_prime=_info(dist, "W,U,U1", "Y1") + _info(dist, "U2", "Y2", "U"),
    )


def theorem1_region(dist: JointDistribution, use_d_prime: bool = False) -> RateRegion:
    """R11 <= A; R21+R22 <= min(B, C); R11+R21+R22 <= min(D, E), each clamped at 0."""
    b = theorem1_bounds(dist)
    d_value = b.D_prime if use_d_prime else b.D
    d_name = "D'" if use_d_prime else "D"
    return RateRegion.from_bounds(
        Z_COORDS,
        [
            ((1, 0, 0), b.A, "R11 <= A"),
            ((0, 1, 1), min(b.B, b.C), "R21+R22 <= min(B, C)"),
            ((1, 1, 1), min(d_value, b.E), f"R11+R21+R22 <= min({d_name}, E)"),
        ],
    )


def split_rate_system(
    dist: JointDistribution,
    clamp: bool = True,
    mode: ArithmeticMode = ArithmeticMode.FLOAT,
    limit_denominator: int = 10**12,
) -> LinearSystem:
    """Seven split-rate rows, the two rate couplings as inequality pairs, nonnegativity.

    Variables: (R11, R21c, R21p, R22c, R22p, R21, R22). With ``clamp`` each
    right-hand side is max(value, 0) so the origin stays feasible.
    """
    raw = split_rate_bounds(dist)
    s = raw.clamped() if clamp else raw
    rows: list[tuple[tuple[int, ...], float, Relation, str]] = [
        #  R11 R21c R21p R22c R22p R21 R22
        ((1, 1, 1, 1, 0, 0, 0), s.all_at_y1, Relation.LE, "all_at_y1"),
        ((0, 1, 1, 1, 0, 0, 0), s.second_sender_at_y1, Relation.LE, "second_sender_at_y1"),
        ((1, 0, 1, 0, 0, 0, 0), s.w_u1_at_y1, Relation.LE, "w_u1_at_y1"),
        ((0, 0, 1, 0, 0, 0, 0), s.u1_at_y1, Relation.LE, "u1_at_y1"),
        ((1, 0, 0, 0, 0, 0, 0), s.w_at_y1, Relation.LE, "w_at_y1"),
        ((0, 1, 0, 1, 1, 0, 0), s.all_at_y2, Relation.LE, "all_at_y2"),
        ((0, 0, 0, 0, 1, 0, 0), s.u2_at_y2, Relation.LE, "u2_at_y2"),
        ((0, -1, -1, 0, 0, 1, 0), 0.0, Relation.LE, "R21 = R21c + R21p"),
        ((0, 1, 1, 0, 0, -1, 0), 0.0, Relation.LE, "R21 = R21c + R21p"),
        ((0, 0, 0, -1, -1, 0, 1), 0.0, Relation.LE, "R22 = R22c + R22p"),
        ((0, 0, 0, 1, 1, 0, -1), 0.0, Relation.LE, "R22 = R22c + R22p"),
    ]
    for i, name in enumerate(SPLIT_VARIABLES[:5]):
        coeffs = tuple(-1 if j == i else 0 for j in range(len(SPLIT_VARIABLES)))
        rows.append((coeffs, 0.0, Relation.LE, f"{name} >= 0"))
    return LinearSystem.build(SPLIT_VARIABLES, rows, mode=mode, limit_denominator=limit_denominator)


def split_rate_region(dist: JointDistribution) -> RateRegion:
    """Closed-form projection of the clamped split-rate system onto (R11, R21, R22).

    With the split rates free, the two split variables R21p and R22p decouple,
    and eliminating them leaves exactly these nine rows.
    """
    s = split_rate_bounds(dist).clamped()
    return RateRegion.from_bounds(
        Z_COORDS,
        [
            ((1, 0, 0), s.w_at_y1, "R11 <= w_at_y1"),
            ((1, 0, 0), s.w_u1_at_y1, "R11 <= w_u1_at_y1"),
            ((1, 1, 0), s.all_at_y1, "R11+R21 <= all_at_y1"),
            ((0, 1, 0), s.second_sender_at_y1, "R21 <= second_sender_at_y1"),
            ((0, 0, 1), s.all_at_y2, "R22 <= all_at_y2"),
            ((0, 1, 1), s.u1_at_y1 + s.all_at_y2, "R21+R22 <= u1_at_y1 + all_at_y2"),
            ((0, 1, 1), s.second_sender_at_y1 + s.u2_at_y2,
             "R21+R22 <= second_sender_at_y1 + u2_at_y2"),
            ((1, 1, 1), s.w_u1_at_y1 + s.all_at_y2, "R11+R21+R22 <= w_u1_at_y1 + all_at_y2"),
            ((1, 1, 1), s.all_at_y1 + s.u2_at_y2, "R11+R21+R22 <= all_at_y1 + u2_at_y2"),
        ],
    )


# ============================================================
# Degraded channel: inner and outer bounds
# ============================================================


def is_identity_u1(dist: JointDistribution, tol: float = 1e-9) -> bool:
    """U1 has U's alphabet and p(u1|u,s) is the identity wherever (u, s) has mass."""
    if dist.size("U1") != dist.size("U"):
        return False
    cond = dist.conditional("u1|u,s")  # (U, S, U1)
    mass = dist.marginal(["S", "U"]).T  # (U, S)
    eye = np.eye(dist.size("U"))[:, None, :]
    support = np.broadcast_to((mass > tol)[:, :, None], cond.shape)
    return bool(np.all(np.abs(cond - eye)[support] <= tol))


def is_degraded(dist: JointDistribution, tol: float = 1e-9) -> bool:
    """Check p(y1,y2|x1,x2,s) = p(y2|x2,s) p(y1|x1,y2,s) on the input support."""
    chan = dist.conditional("y1,y2|x1,x2,s")  # (X1, X2, S, Y1, Y2)
    joint = dist.marginal(["X1", "X2", "S", "Y1", "Y2"])  # canonical: S, X1, X2, Y1, Y2
    joint = np.transpose(joint, (1, 2, 0, 3, 4))  # -> X1, X2, S, Y1, Y2
    inputs = joint.sum(axis=(3, 4))
    support = inputs > tol

    p_x2_s_y2 = joint.sum(axis=(0, 3))  # (X2, S, Y2)
    p_x2_s = p_x2_s_y2.sum(axis=2, keepdims=True)
    y2_given = np.divide(p_x2_s_y2, p_x2_s, out=np.zeros_like(p_x2_s_y2), where=p_x2_s > 0)

    p_x1_s_y1_y2 = joint.sum(axis=1)  # (X1, S, Y1, Y2)
    p_x1_s_y2 = p_x1_s_y1_y2.sum(axis=2, keepdims=True)
    y1_given = np.divide(
        p_x1_s_y1_y2, p_x1_s_y2, out=np.zeros_like(p_x1_s_y1_y2), where=p_x1_s_y2 > 0
    )
    rebuilt = np.einsum("dsf,asef->adsef", y2_given, y1_given)
    diff = np.abs(rebuilt - chan)[support]
    return bool(diff.size == 0 or float(diff.max()) <= tol)


def theorem2_bounds(dist: JointDistribution) -> dict[str, float]:
    return {
        "R11+R21": binned(dist, "U,W", "Y1"),
        "R21": binned(dist, "U", "Y1", "W"),
        "R11": binned(dist, "W", "Y1", "U"),
        "R21+R22": binned(dist, "U,U2", "Y2"),
        "R22": binned(dist, "U2", "Y2", "U"),
    }


def theorem2_region(dist: JointDistribution, tol: float = 1e-9) -> RateRegion:
    """Degraded-channel inner bound (requires U1 = U structurally)."""
    if not is_identity_u1(dist, tol):
        raise PreconditionError(
            "theorem2_region", "p(u1|u,s) must be the identity map (U1 = U)"
        )
    b = theorem2_bounds(dist)
    return RateRegion.from_bounds(
        Z_COORDS,
        [
            ((1, 1, 0), b["R11+R21"], "R11+R21 <= I(UW;Y1) - I(UW;S)"),
            ((0, 1, 0), b["R21"], "R21 <= I(U;Y1|W) - I(U;S|W)"),
            ((1, 0, 0), b["R11"], "R11 <= I(W;Y1|U) - I(W;S|U)"),
            ((0, 1, 1), b["R21+R22"], "R21+R22 <= I(UU2;Y2) - I(UU2;S)"),
            ((0, 0, 1), b["R22"], "R22 <= I(U2;Y2|U) - I(U2;S|U)"),
        ],
    )


def theorem3_bounds(dist: JointDistribution) -> dict[str, float]:
    return {
        "R11+R21": _info(dist, "U,W", "Y1") - _info(dist, "W", "S"),
        "R21": _info(dist, "U", "Y1", "W,S"),
        "R21+R22": binned(dist, "U,U2", "Y2"),
        "R22": binned(dist, "U2", "Y2", "U"),
    }


def theorem3_outer(dist: JointDistribution) -> RateRegion:
    """Outer bound for the degraded channel (U1 plays no role)."""
    b = theorem3_bounds(dist)
    return RateRegion.from_bounds(
        Z_COORDS,
        [
            ((1, 1, 0), b["R11+R21"], "R11+R21 <= I(UW;Y1) - I(W;S)"),
            ((0, 1, 0), b["R21"], "R21 <= I(U;Y1|WS)"),
            ((0, 1, 1), b["R21+R22"], "R21+R22 <= I(UU2;Y2) - I(UU2;S)"),
            ((0, 0, 1), b["R22"], "R22 <= I(U2;Y2|U) - I(U2;S|U)"),
        ],
    )


# ============================================================
# Reductions to the MAC and the degraded broadcast channel
# ============================================================


def mac_reduction(dist: JointDistribution) -> RateRegion:
    """State-dependent MAC: nothing sent to receiver 2, W and U1 are the two inputs."""
    for var in ("U", "U2"):
        if not _is_degenerate(dist, var):
            raise PreconditionError("mac_reduction", f"{var} must be degenerate")
    return RateRegion.from_bounds(
        PAIR_COORDS,
        [
            ((1, 0), binned(dist, "W", "Y1", "U1"), "R1 <= I(W;Y1|U1) - I(W;S|U1)"),
            ((0, 1), binned(dist, "U1", "Y1", "W"), "R2 <= I(U1;Y1|W) - I(U1;S|W)"),
            ((1, 1), binned(dist, "W,U1", "Y1"), "R1+R2 <= I(WU1;Y1) - I(WU1;S)"),
        ],
    )


def bc_reduction(dist: JointDistribution) -> RateRegion:
    """Degraded broadcast channel with state: sender 1 and U2 silent."""
    for var in ("W", "U2"):
        if not _is_degenerate(dist, var):
            raise PreconditionError("bc_reduction", f"{var} must be degenerate")
    return RateRegion.from_bounds(
        PAIR_COORDS,
        [
            ((1, 0), binned(dist, "U1", "Y1", "U"), "R1 <= I(U1;Y1|U) - I(U1;S|U)"),
            ((0, 1), binned(dist, "U", "Y2"), "R2 <= I(U;Y2) - I(U;S)"),
        ],
    )


# ============================================================
# Projection cross-check
# ============================================================


@dataclass
class FacetComparison:
    """How one closed-form region relates to the projected split-rate region."""

    label: str
    matches: bool
    missing_facets: list[str] = field(default_factory=list)
    extra_facets: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class FmeComparison:
    """Exact projection of the split-rate system against the closed forms."""

    matches: bool
    projection_rows: int
    closed_form_rows: int
    projection_vertices: list[Point]
    closed_form_vertices: list[Point]
    bounds: Theorem1Bounds
    theorem1_d_prime: FacetComparison
    theorem1_literal: FacetComparison

    def to_dict(self) -> dict[str, Any]:
        return {
            "matches": self.matches,
            "projection_rows": self.projection_rows,
            "closed_form_rows": self.closed_form_rows,
            "projection_vertices": [list(v) for v in self.projection_vertices],
            "closed_form_vertices": [list(v) for v in self.closed_form_vertices],
            "bounds": self.bounds.to_dict(),
            "theorem1_d_prime": self.theorem1_d_prime.to_dict(),
            "theorem1_literal": self.theorem1_literal.to_dict(),
        }


def _facets_outside(source: RateRegion, target: RateRegion, tol: float) -> list[str]:
    """Labels of ``source`` bounds that some vertex of ``target`` violates."""
    out = []
    verts = target.vertices(tol)
    for h in source.bounds:
        worst = max(sum(c * x for c, x in zip(h.coeffs, v, strict=True)) for v in verts)
        if worst > h.rhs + tol:
            out.append(h.label)
    return out


def _compare(label: str, split: RateRegion, candidate: RateRegion, tol: float) -> FacetComparison:
    missing = _facets_outside(split, candidate, tol)
    extra = _facets_outside(candidate, split, tol)
    return FacetComparison(label, not missing and not extra, missing, extra)


def compare_fme(
    dist: JointDistribution,
    tol: float = 1e-9,
    limit_denominator: int = 10**12,
) -> FmeComparison:
    """Project the split-rate system exactly and compare it with every closed form.

    ``matches`` is the pass/fail verdict against the closed-form projection;
    the Theorem-1 comparisons are facet-by-facet findings.
    """
    system = split_rate_system(
        dist, clamp=True, mode=ArithmeticMode.RATIONAL, limit_denominator=limit_denominator
    )
    projected = project(system, Z_COORDS, tol)
    proj_vertices = enumerate_vertices(projected, tol)
    closed = split_rate_region(dist)
    closed_vertices = closed.vertices(tol)
    matches = vertex_sets_match(proj_vertices, closed_vertices, tol)
    closed_rows = len(remove_redundant(closed.to_system(), tol).rows)

    report = FmeComparison(
        matches=matches,
        projection_rows=len(projected.rows),
        closed_form_rows=closed_rows,
        projection_vertices=proj_vertices,
        closed_form_vertices=closed_vertices,
        bounds=theorem1_bounds(dist),
        theorem1_d_prime=_compare("theorem1 (D')", closed, theorem1_region(dist, True), tol),
        theorem1_literal=_compare("theorem1 (D)", closed, theorem1_region(dist, False), tol),
    )
    if not matches:
        logger.warning(
            "Projection and closed form disagree: %d vs %d vertices",
            len(proj_vertices), len(closed_vertices),
        )
    for cmp in (report.theorem1_d_prime, report.theorem1_literal):
        if not cmp.matches:
            logger.info(
                "%s differs from the projection: missing %s, extra %s",
                cmp.label, cmp.missing_facets, cmp.extra_facets,
            )
    return report
