"""Scalar-lattice scheme: modulo reduction, rate bounds and MMSE scalings."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, overload

import numpy as np
from numpy.typing import NDArray
from pydantic import ValidationError

from zchannel_regions.errors import LatticeConfigError
from zchannel_regions.models import LatticeConfig
from zchannel_regions.prob.core import to_unit

logger = logging.getLogger(__name__)


@overload
def mod_lattice(x: float, delta: float) -> float: ...
@overload
def mod_lattice(x: NDArray[np.float64], delta: float) -> NDArray[np.float64]: ...


def mod_lattice(x: float | NDArray[np.float64], delta: float) -> float | NDArray[np.float64]:
    """Reduce into the half-open cell [-delta/2, delta/2); +delta/2 maps to -delta/2."""
    if not delta > 0:
        raise LatticeConfigError(f"lattice step must be positive, got {delta}")
    half = 0.5 * delta
    if isinstance(x, np.ndarray):
        r = x - delta * np.floor(x / delta + 0.5)
        r = np.where(r >= half, r - delta, r)
        return np.where(r < -half, r + delta, r)
    r = x - delta * math.floor(x / delta + 0.5)
    if r >= half:
        r -= delta
    elif r < -half:
        r += delta
    return r


def _half_log_ratio(num: float, den: float) -> float:
    """max(1/2 log(num/den), 0); a zero numerator means a silent stream."""
    if num <= 0.0:
        return 0.0
    if den <= 0.0:
        return math.inf
    return max(to_unit(0.5 * math.log(num / den)), 0.0)


def shaping_gap() -> float:
    """Loss of a scalar lattice against an ideal quantizer: 1/2 log(2 pi e / 12)."""
    return to_unit(0.5 * math.log(2.0 * math.pi * math.e / 12.0))


# ============================================================
# Optimal scalings
# ============================================================


@dataclass(frozen=True)
class OptimalAlphas:
    alpha0_rx2: float  # best for the common stream at receiver 2
    alpha0_rx1: float  # best for the common stream at receiver 1
    alpha1: float
    alpha2: float

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


def optimal_alphas(cfg: LatticeConfig) -> OptimalAlphas:
    p2, rho, rho_bar, a2 = cfg.P2, cfg.rho, cfg.rho_bar, cfg.a**2
    return OptimalAlphas(
        alpha0_rx2=rho * p2 / (p2 + cfg.N2),
        alpha0_rx1=a2 * rho * p2 / (a2 * p2 + cfg.N1),
        alpha1=cfg.P1 / (cfg.P1 + a2 * rho_bar * p2 + cfg.N1),
        alpha2=rho_bar * p2 / (rho_bar * p2 + cfg.N2),
    )


def resolve_alphas(cfg: LatticeConfig, decoder: int = 2) -> LatticeConfig:
    """Fill omitted scalings with closed-form optima.

    alpha0 defaults to the optimum of the receiver being simulated.
    """
    if decoder not in (1, 2):
        raise LatticeConfigError(f"decoder must be 1 or 2, got {decoder}")
    opt = optimal_alphas(cfg)
    updates: dict[str, float] = {}
    if cfg.alpha0 is None:
        updates["alpha0"] = opt.alpha0_rx1 if decoder == 1 else opt.alpha0_rx2
    if cfg.alpha1 is None:
        updates["alpha1"] = opt.alpha1
    if cfg.alpha2 is None:
        updates["alpha2"] = opt.alpha2
    return cfg.model_copy(update=updates) if updates else cfg


def alphas_of(cfg: LatticeConfig) -> tuple[float, float, float]:
    if cfg.alpha0 is None or cfg.alpha1 is None or cfg.alpha2 is None:
        raise LatticeConfigError("scalings unresolved; call resolve_alphas first")
    return cfg.alpha0, cfg.alpha1, cfg.alpha2


# ============================================================
# Rate bounds
# ============================================================


def common_rate_rx1(cfg: LatticeConfig, alpha0: float) -> float:
    s = cfg.a**2 * cfg.rho * cfg.P2
    den = (1 - alpha0) ** 2 * s + alpha0**2 * (cfg.a**2 * cfg.rho_bar * cfg.P2 + cfg.N1)
    return _half_log_ratio(s, den)


def common_rate_rx2(cfg: LatticeConfig, alpha0: float) -> float:
    s = cfg.rho * cfg.P2
    den = (1 - alpha0) ** 2 * s + alpha0**2 * (cfg.rho_bar * cfg.P2 + cfg.N2)
    return _half_log_ratio(s, den)


def own_rate_rx1(cfg: LatticeConfig, alpha1: float) -> float:
    den = (1 - alpha1) ** 2 * cfg.P1 + alpha1**2 * (cfg.a**2 * cfg.rho_bar * cfg.P2 + cfg.N1)
    return _half_log_ratio(cfg.P1, den)


def private_rate_rx2(cfg: LatticeConfig, alpha2: float) -> float:
    s = cfg.rho_bar * cfg.P2
    return _half_log_ratio(s, (1 - alpha2) ** 2 * s + alpha2**2 * cfg.N2)


@dataclass(frozen=True)
class Theorem5Bounds:
    """Rate bounds of one (rho, alpha) point, with the scalar-lattice shaping gap.

    ``r11_bound`` is the MMSE-optimal form; ``r11_at_alpha1`` uses the
    configured alpha1. ``gap_aware`` subtracts the shaping gap, clamped at 0.
    """

    common_rx1: float
    common_rx2: float
    r11_bound: float
    r22_bound: float
    r11_at_alpha1: float
    shaping_gap: float

    @property
    def r21_bound(self) -> float:
        return min(self.common_rx1, self.common_rx2)

    @property
    def corner(self) -> tuple[float, float, float]:
        """(R11, R21, R22) corner of the rate box."""
        return (self.r11_bound, self.r21_bound, self.r22_bound)

    def gap_aware(self) -> dict[str, float]:
        g = self.shaping_gap
        return {
            "common_rx1": max(self.common_rx1 - g, 0.0),
            "common_rx2": max(self.common_rx2 - g, 0.0),
            "r11_bound": max(self.r11_bound - g, 0.0),
            "r22_bound": max(self.r22_bound - g, 0.0),
        }

    def to_dict(self) -> dict[str, Any]:
        return {**asdict(self), "r21_bound": self.r21_bound, "gap_aware": self.gap_aware()}


def theorem5_bounds(cfg: LatticeConfig) -> Theorem5Bounds:
    """Rate bounds at the configured scalings (omitted ones take their optima)."""
    alpha0, alpha1, alpha2 = alphas_of(resolve_alphas(cfg))
    r11 = _half_log_ratio(
        cfg.P1 + cfg.a**2 * cfg.rho_bar * cfg.P2 + cfg.N1,
        cfg.a**2 * cfg.rho_bar * cfg.P2 + cfg.N1,
    )
    return Theorem5Bounds(
        common_rx1=common_rate_rx1(cfg, alpha0),
        common_rx2=common_rate_rx2(cfg, alpha0),
        r11_bound=r11,
        r22_bound=private_rate_rx2(cfg, alpha2),
        r11_at_alpha1=own_rate_rx1(cfg, alpha1),
        shaping_gap=shaping_gap(),
    )


def optimal_rates(cfg: LatticeConfig) -> dict[str, float]:
    """Closed forms of each rate at its optimal scaling."""
    p2, rho, rho_bar, a2 = cfg.P2, cfg.rho, cfg.rho_bar, cfg.a**2

    def half_log1p(snr: float) -> float:
        return to_unit(0.5 * math.log1p(snr))

    return {
        "common_rx2": half_log1p(rho * p2 / (rho_bar * p2 + cfg.N2)),
        "r22_bound": half_log1p(rho_bar * p2 / cfg.N2),
        "common_rx1": half_log1p(a2 * rho * p2 / (a2 * rho_bar * p2 + cfg.N1)),
        "r11_bound": half_log1p(cfg.P1 / (a2 * rho_bar * p2 + cfg.N1)),
    }


# ============================================================
# Grid checks and the rate union
# ============================================================


@dataclass(frozen=True)
class AlphaGridCheck:
    name: str
    closed_form: float
    grid_best: float
    step: float

    @property
    def passed(self) -> bool:
        return abs(self.grid_best - self.closed_form) <= self.step + 1e-12

    def to_dict(self) -> dict[str, Any]:
        return {**asdict(self), "passed": self.passed}


def alpha_grid_check(cfg: LatticeConfig, points: int = 1001) -> list[AlphaGridCheck]:
    """Maximize each rate over an alpha grid on [0, 1] and compare with the closed form."""
    grid = np.linspace(0.0, 1.0, points)
    step = 1.0 / (points - 1)
    opt = optimal_alphas(cfg)
    checks = [
        ("alpha0_rx2", opt.alpha0_rx2, lambda x: common_rate_rx2(cfg, x)),
        ("alpha0_rx1", opt.alpha0_rx1, lambda x: common_rate_rx1(cfg, x)),
        ("alpha1", opt.alpha1, lambda x: own_rate_rx1(cfg, x)),
        ("alpha2", opt.alpha2, lambda x: private_rate_rx2(cfg, x)),
    ]
    out = []
    for name, closed, rate in checks:
        values = [rate(float(x)) for x in grid]
        out.append(AlphaGridCheck(name, closed, float(grid[int(np.argmax(values))]), step))
    return out


@dataclass(frozen=True)
class RatePoint:
    rho: float
    alpha0: float
    r11: float
    r21: float
    r22: float

    @property
    def rates(self) -> tuple[float, float, float]:
        return (self.r11, self.r21, self.r22)


def region_union(
    cfg: LatticeConfig, rho_grid: Sequence[float], alpha0_grid: Sequence[float]
) -> list[RatePoint]:
    """Rate-box corners over the (rho, alpha0) grid with alpha1, alpha2 at their optima."""
    for value in (*rho_grid, *alpha0_grid):
        if not 0.0 <= value <= 1.0:
            raise LatticeConfigError(f"grid value {value} outside [0, 1]")
    cloud = []
    for rho in rho_grid:
        base = cfg.model_copy(update={"rho": rho, "alpha1": None, "alpha2": None})
        for alpha0 in alpha0_grid:
            b = theorem5_bounds(base.model_copy(update={"alpha0": alpha0}))
            cloud.append(RatePoint(rho, alpha0, b.r11_bound, b.r21_bound, b.r22_bound))
    logger.info("Lattice union: %d x %d grid points", len(rho_grid), len(alpha0_grid))
    return cloud


def pareto_frontier(points: Sequence[RatePoint]) -> list[RatePoint]:
    """Points not dominated by any other (>= everywhere, > somewhere); duplicates keep the first."""
    if not points:
        return []
    rates = np.array([p.rates for p in points])
    keep = []
    seen: set[tuple[float, float, float]] = set()
    for i, p in enumerate(points):
        ge = np.all(rates >= rates[i], axis=1)
        gt = np.any(rates > rates[i], axis=1)
        if np.any(ge & gt) or p.rates in seen:
            continue
        seen.add(p.rates)
        keep.append(p)
    return sorted(keep, key=lambda p: (p.r21, p.r11, p.r22))


def load_lattice_config(path: str | Path) -> LatticeConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return LatticeConfig.model_validate_json(text)
    except ValidationError as exc:
        raise LatticeConfigError(f"invalid lattice config {path}: {exc}") from exc
