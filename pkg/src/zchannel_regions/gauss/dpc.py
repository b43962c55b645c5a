"""Dirty-paper coding region of the degraded Gaussian Z channel.

Auxiliaries (Ut, Wt, U2t independent unit-variance Gaussians, independent of S and noise):

    U = Ut + alpha S,  W = Wt + beta S,  U2 = U2t + gamma S
    X1 = sqrt(P1) Wt,  X2 = sqrt(xi P2) Ut + sqrt((1 - xi) P2) U2t

With the Costa coefficients alpha, beta, the first receiver sees no penalty from S
in its three bounds; gamma is free and swept.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.spatial import ConvexHull, QhullError

from zchannel_regions.errors import ChannelError, GaussianNumericalError
from zchannel_regions.gauss.channel import GaussianZChannel
from zchannel_regions.polyproj.vertices import Point
from zchannel_regions.prob.core import to_unit
from zchannel_regions.prob.gaussian import CovarianceModel, gaussian_mutual_information
from zchannel_regions.regions.region import Z_COORDS, RateRegion

logger = logging.getLogger(__name__)

BASE_VARIABLES: tuple[str, ...] = ("Ut", "Wt", "U2t", "S", "Z1", "Z2")

# CSV columns of a sweep, in order
BOUND_COLUMNS: tuple[str, ...] = ("r11_r21", "r21", "r11", "r21_r22", "r22")

DETERMINANT_CONDITION_LIMIT = 1e8


def _half_log(ratio: float) -> float:
    return to_unit(0.5 * math.log(ratio))


# ============================================================
# Coefficients and the covariance model
# ============================================================


def costa_coefficients(channel: GaussianZChannel, xi: float) -> tuple[float, float]:
    """(alpha, beta) that make the first receiver's bounds interference-free."""
    _check_xi(xi)
    denom = channel.total_power_y1
    alpha = channel.a * channel.a1 * math.sqrt(xi * channel.P2) / denom
    beta = channel.a1 * math.sqrt(channel.P1) / denom
    return alpha, beta


def _check_xi(xi: float) -> None:
    if not 0.0 <= xi <= 1.0 or math.isnan(xi):
        raise ChannelError(f"power split xi must lie in [0, 1], got {xi}")


@dataclass(frozen=True)
class DpcParams:
    xi: float
    alpha: float
    beta: float
    gamma: float = 0.0

    def __post_init__(self) -> None:
        _check_xi(self.xi)
        for name in ("alpha", "beta", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ChannelError(f"{name} must be finite")

    @property
    def xi_bar(self) -> float:
        return 1.0 - self.xi

    @classmethod
    def costa(cls, channel: GaussianZChannel, xi: float, gamma: float = 0.0) -> DpcParams:
        alpha, beta = costa_coefficients(channel, xi)
        return cls(xi, alpha, beta, gamma)

    def perturbed(self, d_alpha: float) -> DpcParams:
        return DpcParams(self.xi, self.alpha + d_alpha, self.beta, self.gamma)


def t_loadings(channel: GaussianZChannel, params: DpcParams) -> dict[str, float]:
    """Coefficients of the unit-variance base variables in T = Y1 - a1 S."""
    su = math.sqrt(params.xi * channel.P2)
    su2 = math.sqrt(params.xi_bar * channel.P2)
    return {
        "Wt": math.sqrt(channel.P1),
        "Ut": channel.a * su,
        "U2t": channel.a * su2,
        "Z1": 1.0,
    }


def build_covariance(
    channel: GaussianZChannel, params: DpcParams, psd_tolerance: float = 1e-10
) -> CovarianceModel:
    """Jointly Gaussian model over the base variables plus every derived signal.

    ``T`` is the part of Y1 that does not involve S: Y1 = T + a1 S.
    """
    t = t_loadings(channel, params)
    sp1 = math.sqrt(channel.P1)
    su = math.sqrt(params.xi * channel.P2)
    su2 = math.sqrt(params.xi_bar * channel.P2)
    derived: dict[str, dict[str, float]] = {
        "U": {"Ut": 1.0, "S": params.alpha},
        "W": {"Wt": 1.0, "S": params.beta},
        "U2": {"U2t": 1.0, "S": params.gamma},
        "X1": {"Wt": sp1},
        "X2": {"Ut": su, "U2t": su2},
        "T": t,
        "Y1": {**t, "S": channel.a1},
        "Y2": {"Ut": su, "U2t": su2, "S": channel.a2, "Z2": 1.0},
    }
    variances = dict(zip(BASE_VARIABLES, (1.0, 1.0, 1.0, channel.Q, 1.0, 1.0), strict=True))
    return CovarianceModel.from_linear(variances, derived, psd_tolerance=psd_tolerance)


# ============================================================
# Orthogonality residuals
# ============================================================


@dataclass(frozen=True)
class Lemma1Residuals:
    """E[psi_u T], E[psi_w T] and the three information gaps of the first receiver.

    psi_u = Ut - (alpha / a1) T and psi_w = Wt - (beta / a1) T; the gaps are
    I(UW; Y1,S) - I(UW; Y1), I(U; Y1,S | W) - I(U; Y1 | W) and
    I(W; Y1,S | U) - I(W; Y1 | U), evaluated as I(.; S | Y1 ...).
    """

    r_u: float
    r_w: float
    mi_gaps: tuple[float, float, float]

    def to_dict(self) -> dict[str, Any]:
        return {"r_u": self.r_u, "r_w": self.r_w, "mi_gaps": list(self.mi_gaps)}

    def passes(self, residual_tol: float = 1e-12, gap_tol: float = 1e-9) -> bool:
        return (
            abs(self.r_u) <= residual_tol
            and abs(self.r_w) <= residual_tol
            and all(g <= gap_tol for g in self.mi_gaps)
        )


def lemma1_residuals(
    channel: GaussianZChannel, params: DpcParams, jitter: float = 1e-12
) -> Lemma1Residuals:
    if channel.a1 == 0:
        raise ChannelError("a1 = 0: S does not reach Y1 and the residuals are undefined")
    # Ut, Wt have unit variance, so Cov(Ut, T) and Cov(Wt, T) are T's loadings.
    t = t_loadings(channel, params)
    var_t = sum(c * c for c in t.values())
    r_u = t["Ut"] - params.alpha / channel.a1 * var_t
    r_w = t["Wt"] - params.beta / channel.a1 * var_t
    model = build_covariance(channel, params)
    gaps = (
        gaussian_mutual_information(model, ["U", "W"], "S", "Y1", jitter=jitter),
        gaussian_mutual_information(model, "U", "S", ["Y1", "W"], jitter=jitter),
        gaussian_mutual_information(model, "W", "S", ["Y1", "U"], jitter=jitter),
    )
    return Lemma1Residuals(r_u, r_w, gaps)


# ============================================================
# Region bounds
# ============================================================


@dataclass(frozen=True)
class DpcBounds:
    """The five region bounds (unclamped).

    ``r21_r22`` and ``r22`` use the determinant expressions as printed, where the
    (Y2, U2) covariance reads sqrt(xi_bar P2) + alpha a2 Q. The ``*_corrected``
    fields use the covariance the auxiliaries actually have,
    sqrt(xi_bar P2) + gamma a2 Q. Both agree when gamma = alpha, Q = 0 or a2 = 0.
    """

    r11_r21: float
    r21: float
    r11: float
    r21_r22: float
    r22: float
    r21_r22_corrected: float
    r22_corrected: float

    def values(self, corrected: bool = False) -> tuple[float, float, float, float, float]:
        if corrected:
            return (self.r11_r21, self.r21, self.r11, self.r21_r22_corrected, self.r22_corrected)
        return (self.r11_r21, self.r21, self.r11, self.r21_r22, self.r22)

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


def second_receiver_matrix(
    channel: GaussianZChannel, params: DpcParams, corrected: bool
) -> NDArray[np.float64]:
    """Covariance of (Y2, U, U2); the printed form uses alpha in the (Y2, U2) entry."""
    p2, q, a2 = channel.P2, channel.Q, channel.a2
    al, ga = params.alpha, params.gamma
    y2_u = math.sqrt(params.xi * p2) + al * a2 * q
    y2_u2 = math.sqrt(params.xi_bar * p2) + (ga if corrected else al) * a2 * q
    return np.array(
        [
            [p2 + a2**2 * q + 1.0, y2_u, y2_u2],
            [y2_u, 1.0 + al**2 * q, al * ga * q],
            [y2_u2, al * ga * q, 1.0 + ga**2 * q],
        ]
    )


def _determinant_bounds(m3: NDArray[np.float64], label: str) -> tuple[float, float]:
    det3 = float(np.linalg.det(m3))
    det2 = float(np.linalg.det(m3[:2, :2]))
    if not (det3 > 0.0 and det2 > 0.0 and math.isfinite(det3)):
        raise GaussianNumericalError(
            label, float(np.linalg.cond(m3)), f"det M3={det3:.6g}, det M2={det2:.6g}"
        )
    return _half_log(float(m3[0, 0]) / det3), _half_log(det2 / det3)


def dpc_bounds(channel: GaussianZChannel, params: DpcParams) -> DpcBounds:
    a2p2 = channel.a**2 * channel.P2
    floor = a2p2 * params.xi_bar + 1.0
    literal = _determinant_bounds(second_receiver_matrix(channel, params, False), "M3")
    corrected = _determinant_bounds(second_receiver_matrix(channel, params, True), "M3 corrected")
    return DpcBounds(
        r11_r21=_half_log(1.0 + (channel.P1 + a2p2 * params.xi) / floor),
        r21=_half_log(1.0 + a2p2 * params.xi / floor),
        r11=_half_log(1.0 + channel.P1 / floor),
        r21_r22=literal[0],
        r22=literal[1],
        r21_r22_corrected=corrected[0],
        r22_corrected=corrected[1],
    )


def logdet_bounds(
    channel: GaussianZChannel, params: DpcParams, jitter: float = 1e-12
) -> tuple[float, float, float, float, float]:
    """The same five bounds via log-det mutual informations of the covariance model."""
    m = build_covariance(channel, params)

    def gp(aux: list[str], out: str, given: list[str]) -> float:
        return gaussian_mutual_information(m, aux, out, given, jitter=jitter) - (
            gaussian_mutual_information(m, aux, "S", given, jitter=jitter)
        )

    return (
        gp(["U", "W"], "Y1", []),
        gp(["U"], "Y1", ["W"]),
        gp(["W"], "Y1", ["U"]),
        gp(["U", "U2"], "Y2", []),
        gp(["U2"], "Y2", ["U"]),
    )


def dpc_region(
    channel: GaussianZChannel, params: DpcParams, corrected: bool = False
) -> RateRegion:
    b = dpc_bounds(channel, params).values(corrected)
    return RateRegion.from_bounds(
        Z_COORDS,
        [
            ((1, 1, 0), b[0], "R11+R21 <= first-receiver sum"),
            ((0, 1, 0), b[1], "R21 <= common message at receiver 1"),
            ((1, 0, 0), b[2], "R11 <= own message at receiver 1"),
            ((0, 1, 1), b[3], "R21+R22 <= receiver-2 sum"),
            ((0, 0, 1), b[4], "R22 <= private message at receiver 2"),
        ],
    )


# ============================================================
# Sweeps
# ============================================================


def linear_grid(points: int, lo: float, hi: float) -> list[float]:
    if points < 1:
        raise ChannelError(f"grid needs at least one point, got {points}")
    if points == 1:
        return [lo]
    return [float(v) for v in np.linspace(lo, hi, points)]


@dataclass
class DpcUnion:
    """Per-grid-point regions plus the convex hull of all their vertices."""

    points: list[tuple[float, float, RateRegion]]
    hull_vertices: list[Point]
    hull_equations: list[tuple[tuple[float, ...], float]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "grid_points": len(self.points),
            "hull_vertices": [list(v) for v in self.hull_vertices],
        }


def convex_hull(
    cloud: Sequence[Point],
) -> tuple[list[Point], list[tuple[tuple[float, ...], float]]]:
    """Hull vertices (sorted) and facets as (normal, offset) with normal . x <= offset.

    Flat clouds fall back to a joggled hull; clouds with fewer than d+1 points
    are returned as-is without facets.
    """
    pts = np.unique(np.array(cloud, dtype=np.float64), axis=0)
    dim = pts.shape[1] if pts.ndim == 2 else 0
    if len(pts) <= dim:
        return [tuple(float(x) for x in p) for p in pts], []
    try:
        hull = ConvexHull(pts)
    except QhullError:
        logger.debug("Degenerate hull of %d points; retrying with joggle", len(pts))
        try:
            hull = ConvexHull(pts, qhull_options="QJ")
        except QhullError:
            return [tuple(float(x) for x in p) for p in pts], []
    vertices = sorted(tuple(float(x) for x in pts[i]) for i in hull.vertices)
    facets = [
        (tuple(float(x) for x in eq[:-1]), float(-eq[-1])) for eq in hull.equations
    ]
    return vertices, facets


def hull_contains(
    facets: Sequence[tuple[tuple[float, ...], float]],
    points: Iterable[Sequence[float]],
    tol: float = 1e-9,
) -> bool:
    return all(
        sum(n * x for n, x in zip(normal, p, strict=True)) <= offset + tol
        for p in points
        for normal, offset in facets
    )


def dpc_region_union(
    channel: GaussianZChannel,
    xi_grid: Sequence[float],
    gamma_grid: Sequence[float],
    corrected: bool = False,
    tol: float = 1e-9,
) -> DpcUnion:
    if not xi_grid or not gamma_grid:
        raise ChannelError("xi and gamma grids must be nonempty")
    points: list[tuple[float, float, RateRegion]] = []
    cloud: list[Point] = []
    for xi in xi_grid:
        for gamma in gamma_grid:
            region = dpc_region(channel, DpcParams.costa(channel, xi, gamma), corrected)
            points.append((xi, gamma, region))
            cloud.extend(region.vertices(tol))
    vertices, facets = convex_hull(cloud)
    logger.info(
        "Union over %d x %d grid: %d region vertices, %d on the hull",
        len(xi_grid), len(gamma_grid), len(cloud), len(vertices),
    )
    return DpcUnion(points, vertices, facets)


def sweep_rows(
    channel: GaussianZChannel, xi_grid: Sequence[float], gamma_grid: Sequence[float]
) -> list[dict[str, float]]:
    """One row per (xi, gamma): the five printed bounds plus the corrected pair."""
    rows = []
    for xi in xi_grid:
        for gamma in gamma_grid:
            b = dpc_bounds(channel, DpcParams.costa(channel, xi, gamma))
            row = {"xi": xi, "gamma": gamma}
            row.update(zip(BOUND_COLUMNS, b.values(), strict=True))
            row["r21_r22_corrected"] = b.r21_r22_corrected
            row["r22_corrected"] = b.r22_corrected
            rows.append(row)
    return rows


# ============================================================
# Cross-checks
# ============================================================


@dataclass
class QInvarianceReport:
    """The first receiver's three bounds across interference powers."""

    qs: list[float]
    identical: bool
    max_logdet_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.identical and self.max_logdet_error <= self.tolerance

    def to_dict(self) -> dict[str, Any]:
        return {**asdict(self), "passed": self.passed}


def q_invariance(
    channel: GaussianZChannel,
    xi_grid: Sequence[float],
    qs: Sequence[float] = (0.0, 1.0, 100.0),
    tol: float = 1e-9,
) -> QInvarianceReport:
    """Formula values must be identical across ``qs``; log-det values within ``tol``."""
    identical = True
    worst = 0.0
    for xi in xi_grid:
        reference: tuple[float, ...] | None = None
        for q in qs:
            ch = channel.with_q(q)
            params = DpcParams.costa(ch, xi)
            first = dpc_bounds(ch, params).values()[:3]
            if reference is None:
                reference = first
            elif first != reference:
                identical = False
            logdet = logdet_bounds(ch, params)[:3]
            worst = max(worst, *(abs(x - y) for x, y in zip(first, logdet, strict=True)))
    report = QInvarianceReport(list(qs), identical, worst, tol)
    logger.info("Q invariance over %s: identical=%s, log-det error %.3e", qs, identical, worst)
    return report


@dataclass
class DeterminantReport:
    """Printed and corrected determinant bounds against the log-det path."""

    points: int
    skipped: int
    max_literal_error: float
    max_corrected_error: float
    literal_mismatches: int
    tolerance: float
    worst_literal_point: dict[str, float] = field(default_factory=dict)

    @property
    def corrected_agrees(self) -> bool:
        return self.max_corrected_error <= self.tolerance

    @property
    def literal_agrees(self) -> bool:
        return self.literal_mismatches == 0

    def to_dict(self) -> dict[str, Any]:
        return {
            **asdict(self),
            "corrected_agrees": self.corrected_agrees,
            "literal_agrees": self.literal_agrees,
        }


def determinant_crosscheck(
    channel: GaussianZChannel,
    xi_grid: Sequence[float],
    gamma_grid: Sequence[float],
    tol: float = 1e-9,
) -> DeterminantReport:
    """Compare both determinant forms with the log-det evaluation on the grid.

    Points whose matrix has condition number at or above 1e8 are skipped.
    """
    report = DeterminantReport(0, 0, 0.0, 0.0, 0, tol)
    for xi in xi_grid:
        for gamma in gamma_grid:
            params = DpcParams.costa(channel, xi, gamma)
            m3 = second_receiver_matrix(channel, params, corrected=True)
            if float(np.linalg.cond(m3)) >= DETERMINANT_CONDITION_LIMIT:
                report.skipped += 1
                continue
            report.points += 1
            b = dpc_bounds(channel, params)
            ref = logdet_bounds(channel, params)[3:]
            lit = max(abs(b.r21_r22 - ref[0]), abs(b.r22 - ref[1]))
            cor = max(abs(b.r21_r22_corrected - ref[0]), abs(b.r22_corrected - ref[1]))
            report.max_corrected_error = max(report.max_corrected_error, cor)
            if lit > tol:
                report.literal_mismatches += 1
            if lit > report.max_literal_error:
                report.max_literal_error = lit
                report.worst_literal_point = {"xi": xi, "gamma": gamma, "error": lit}
    if not report.literal_agrees:
        logger.warning(
            "Printed determinant bounds disagree with log-det at %d of %d points (max %.3e)",
            report.literal_mismatches, report.points, report.max_literal_error,
        )
    return report
