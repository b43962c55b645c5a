"""Monte Carlo validation of the scalar mod-lattice scheme.

Samples are processed in fixed-size chunks (optionally on a thread pool).
Each chunk returns additive accumulators that are merged in chunk order, so
results do not depend on the worker count.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Callable, Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.stats import kstest, norm

from zchannel_regions.config import ToolkitSettings, load_settings
from zchannel_regions.errors import LatticeConfigError
from zchannel_regions.lattice.formulas import alphas_of, mod_lattice, resolve_alphas
from zchannel_regions.lattice.rng import Stream, cell_uniforms, normals, uniforms
from zchannel_regions.models import LatticeConfig

logger = logging.getLogger(__name__)

MIN_SAMPLES = 10_000
IDENTITY_TOLERANCE = 1e-12
KS_SIGNIFICANCE = 1e-3

DECODER2_CHECKS = frozenset(
    {
        "var_u", "var_u2", "var_z02e", "var_stage2_noise", "corr_u_s", "corr_z02e_s",
        "ks_u", "identity_stage1", "identity_stage2",
    }
)
DECODER1_CHECKS = frozenset(
    {
        "var_u", "var_w", "var_stage_a", "var_stage_b", "corr_u_s", "corr_w_s",
        "ks_u", "ks_w", "identity_stage_a", "identity_stage_b",
    }
)
KURTOSIS_FACTOR = 2.0

Array = NDArray[np.float64]


# ============================================================
# Accumulators
# ============================================================


@dataclass
class _Accumulator:
    """Additive sufficient statistics of one chunk."""

    n: int = 0
    sums: dict[str, float] = field(default_factory=dict)
    squares: dict[str, float] = field(default_factory=dict)
    cross: dict[tuple[str, str], float] = field(default_factory=dict)
    max_abs: dict[str, float] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)
    samples: dict[str, list[Array]] = field(default_factory=dict)

    def moments(self, name: str, x: Array) -> None:
        self.sums[name] = self.sums.get(name, 0.0) + float(np.sum(x))
        self.squares[name] = self.squares.get(name, 0.0) + float(np.dot(x, x))

    def product(self, a: str, b: str, x: Array, y: Array) -> None:
        self.cross[(a, b)] = self.cross.get((a, b), 0.0) + float(np.dot(x, y))

    def worst(self, name: str, x: Array) -> None:
        value = float(np.max(np.abs(x))) if x.size else 0.0
        self.max_abs[name] = max(self.max_abs.get(name, 0.0), value)

    def count(self, name: str, mask: NDArray[np.bool_]) -> None:
        self.counts[name] = self.counts.get(name, 0) + int(np.count_nonzero(mask))

    def keep(self, name: str, x: Array) -> None:
        self.samples.setdefault(name, []).append(x)

    def merge(self, other: _Accumulator) -> None:
        self.n += other.n
        for src, dst in ((other.sums, self.sums), (other.squares, self.squares)):
            for k, v in src.items():
                dst[k] = dst.get(k, 0.0) + v
        for ck, cv in other.cross.items():
            self.cross[ck] = self.cross.get(ck, 0.0) + cv
        for k, v in other.max_abs.items():
            self.max_abs[k] = max(self.max_abs.get(k, 0.0), v)
        for k, c in other.counts.items():
            self.counts[k] = self.counts.get(k, 0) + c
        for k, arrs in other.samples.items():
            self.samples.setdefault(k, []).extend(arrs)

    def mean(self, name: str) -> float:
        return self.sums[name] / self.n

    def variance(self, name: str) -> float:
        m = self.mean(name)
        return max(self.squares[name] / self.n - m * m, 0.0)

    def correlation(self, a: str, b: str) -> float:
        va, vb = self.variance(a), self.variance(b)
        if va <= 0.0 or vb <= 0.0:
            return 0.0
        cov = self.cross[(a, b)] / self.n - self.mean(a) * self.mean(b)
        return cov / math.sqrt(va * vb)


# ============================================================
# Results
# ============================================================


@dataclass
class StatCheck:
    """One predicted-vs-empirical statistic and its pass/fail verdict."""

    name: str
    predicted: float
    empirical: float
    bound: float
    kind: str = "ratio"

    @property
    def ratio(self) -> float | None:
        if self.kind != "ratio":
            return None
        if self.predicted == 0.0:
            return 1.0 if self.empirical == 0.0 else math.inf
        return self.empirical / self.predicted

    @property
    def passed(self) -> bool:
        if self.kind == "ratio":
            ratio = self.ratio
            return ratio is not None and abs(ratio - 1.0) <= self.bound
        if self.kind == "at_most":
            return abs(self.empirical) <= self.bound
        return self.empirical >= self.bound  # "at_least"

    def to_dict(self) -> dict[str, Any]:
        return {
            "predicted": self.predicted,
            "empirical": self.empirical,
            "ratio": self.ratio,
            "bound": self.bound,
            "kind": self.kind,
            "passed": self.passed,
        }


@dataclass
class LatticeRunStats:
    """Statistics of one simulation run."""

    decoder: int
    samples: int
    seed: int
    alphas: tuple[float, float, float]
    checks: dict[str, StatCheck] = field(default_factory=dict)
    info: dict[str, float] = field(default_factory=dict)
    duration_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def select(self, names: Sequence[str]) -> None:
        """Keep only the named checks; an empty selector keeps all of them."""
        if names:
            wanted = set(names)
            self.checks = {k: c for k, c in self.checks.items() if k in wanted}

    def failed(self) -> list[str]:
        return [name for name, c in self.checks.items() if not c.passed]

    def to_dict(self) -> dict[str, Any]:
        """JSON view; wall-clock time is excluded so outputs stay byte-stable."""
        return {
            "decoder": self.decoder,
            "samples": self.samples,
            "seed": self.seed,
            "alphas": list(self.alphas),
            "checks": {k: c.to_dict() for k, c in sorted(self.checks.items())},
            "info": dict(sorted(self.info.items())),
            "passed": self.passed,
        }


# ============================================================
# Chunked driver
# ============================================================


def _chunks(total: int, size: int) -> Iterator[tuple[int, int]]:
    for start in range(0, total, size):
        yield start, min(size, total - start)


def _run_chunks(
    total: int,
    settings: ToolkitSettings,
    work: Callable[[int, int], _Accumulator],
) -> _Accumulator:
    spans = list(_chunks(total, settings.sim_chunk_size))
    if settings.sim_workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=settings.sim_workers) as pool:
            parts = list(pool.map(lambda span: work(*span), spans))
    else:
        parts = [work(start, count) for start, count in spans]
    acc = _Accumulator()
    for part in parts:
        acc.merge(part)
    return acc


def _validate(cfg: LatticeConfig, known: frozenset[str]) -> None:
    if cfg.samples < MIN_SAMPLES:
        raise LatticeConfigError(f"samples must be >= {MIN_SAMPLES}, got {cfg.samples}")
    unknown = sorted(set(cfg.stats) - known)
    if unknown:
        raise LatticeConfigError(f"unknown statistics {unknown}; choose from {sorted(known)}")


def _band(n: int) -> float:
    return 5.0 * KURTOSIS_FACTOR / math.sqrt(n)


def _lattice(step: float, x: Array) -> Array:
    """Reduce modulo a scalar lattice; a zero step is the degenerate lattice {0}."""
    return mod_lattice(x, step) if step > 0 else np.zeros_like(x)


def _ks_uniform(acc: _Accumulator, name: str, step: float) -> float:
    """KS p-value of samples against Unif[-step/2, step/2); 1.0 for degenerate cells."""
    if step <= 0 or name not in acc.samples:
        return 1.0
    x = np.concatenate(acc.samples[name])
    return float(kstest(x / step + 0.5, "uniform").pvalue)


@dataclass(frozen=True)
class _Draws:
    s: Array
    z: Array
    v: tuple[Array, Array, Array]
    d: tuple[Array, Array, Array]


def _draw(cfg: LatticeConfig, start: int, count: int, noise: Stream, noise_var: float) -> _Draws:
    steps = cfg.steps
    seed = cfg.seed
    s = math.sqrt(cfg.Q) * normals(seed, Stream.S, start, count)
    z = math.sqrt(noise_var) * normals(seed, noise, start, count)
    v = tuple(
        cell_uniforms(seed, st, start, count, steps[i])
        for i, st in enumerate((Stream.V0, Stream.V1, Stream.V2))
    )
    d = tuple(
        cell_uniforms(seed, st, start, count, steps[i])
        for i, st in enumerate((Stream.D0, Stream.D1, Stream.D2))
    )
    return _Draws(s, z, (v[0], v[1], v[2]), (d[0], d[1], d[2]))


# ============================================================
# Decoder 2: successive decoding of the common then the private stream
# ============================================================


def decoder2_predictions(cfg: LatticeConfig) -> dict[str, float]:
    a0, _, a2 = alphas_of(cfg)
    s0, _, s2 = cfg.second_moments
    return {
        "var_u": s0,
        "var_u2": s2,
        "var_z02e": (1 - a0) ** 2 * s0 + a0**2 * (s2 + cfg.N2),
        "var_stage2_noise": (1 - a2) ** 2 * s2 + a2**2 * cfg.N2,
    }


def _decoder2_chunk(cfg: LatticeConfig, start: int, count: int) -> _Accumulator:
    a0, _, a2 = alphas_of(cfg)
    d0_step, _, d2_step = cfg.steps
    dr = _draw(cfg, start, count, Stream.Z2, cfg.N2)
    v0, v2, d0, d2 = dr.v[0], dr.v[2], dr.d[0], dr.d[2]
    u = _lattice(d0_step, v0 - a0 * dr.s + d0)
    u2 = _lattice(d2_step, v2 - a2 * (1 - a0) * dr.s + d2)
    y2 = u + u2 + dr.s + dr.z
    z02e = -(1 - a0) * u + a0 * (u2 + dr.z)
    stage2_noise = -(1 - a2) * u2 + a2 * dr.z

    acc = _Accumulator(n=count)
    for name, x in (("u", u), ("u2", u2), ("s", dr.s), ("z02e", z02e), ("e2", stage2_noise)):
        acc.moments(name, x)
    acc.product("u", "s", u, dr.s)
    acc.product("z02e", "s", z02e, dr.s)
    acc.keep("u", u)
    if d0_step > 0:
        stage1 = mod_lattice(a0 * y2 - d0, d0_step)
        acc.worst("identity_stage1", mod_lattice(stage1 - (v0 + z02e), d0_step))
        acc.count("wrap_stage1", np.abs(z02e) >= d0_step / 2)
    if d2_step > 0:
        stage2 = mod_lattice(a2 * ((1 - a0) * y2 + z02e) - d2, d2_step)
        expected = v2 + stage2_noise
        acc.worst("identity_stage2", mod_lattice(stage2 - expected, d2_step))
        acc.count("wrap_stage2", np.abs(stage2_noise) >= d2_step / 2)
    return acc


def simulate_decoder2(
    cfg: LatticeConfig, settings: ToolkitSettings | None = None
) -> LatticeRunStats:
    """Simulate receiver 2 and compare effective-noise variances with their predictions."""
    _validate(cfg, DECODER2_CHECKS)
    settings = settings or load_settings()
    cfg = resolve_alphas(cfg, decoder=2)
    started = time.perf_counter()
    acc = _run_chunks(cfg.samples, settings, lambda st, c: _decoder2_chunk(cfg, st, c))
    pred = decoder2_predictions(cfg)
    n = acc.n
    band = _band(n)
    corr_bound = 4.0 / math.sqrt(n)

    stats = LatticeRunStats(2, n, cfg.seed, alphas_of(cfg))
    stats.checks = {
        "var_u": StatCheck("var_u", pred["var_u"], acc.variance("u"), band),
        "var_u2": StatCheck("var_u2", pred["var_u2"], acc.variance("u2"), band),
        "var_z02e": StatCheck("var_z02e", pred["var_z02e"], acc.variance("z02e"), band),
        "var_stage2_noise": StatCheck(
            "var_stage2_noise", pred["var_stage2_noise"], acc.variance("e2"), band
        ),
        "corr_u_s": StatCheck(
            "corr_u_s", 0.0, abs(acc.correlation("u", "s")), corr_bound, "at_most"
        ),
        "corr_z02e_s": StatCheck(
            "corr_z02e_s", 0.0, abs(acc.correlation("z02e", "s")), corr_bound, "at_most"
        ),
        "ks_u": StatCheck(
            "ks_u", 0.0, _ks_uniform(acc, "u", cfg.steps[0]), KS_SIGNIFICANCE, "at_least"
        ),
    }
    for key in ("identity_stage1", "identity_stage2"):
        if key in acc.max_abs:
            stats.checks[key] = StatCheck(key, 0.0, acc.max_abs[key], IDENTITY_TOLERANCE, "at_most")
    for key in ("wrap_stage1", "wrap_stage2"):
        if key in acc.counts:
            stats.info[f"{key}_fraction"] = acc.counts[key] / n
    stats.select(cfg.stats)
    stats.duration_seconds = time.perf_counter() - started
    _log_run(stats)
    return stats


# ============================================================
# Decoder 1: successive surrogate with genie-aided removal of W at stage A
# ============================================================


def kappa(cfg: LatticeConfig) -> float:
    """Interference coefficient left in the stage-B effective noise: 1 + (a - 1)(1 - alpha0)."""
    a0, _, _ = alphas_of(cfg)
    return 1.0 + (cfg.a - 1.0) * (1.0 - a0)


def decoder1_predictions(cfg: LatticeConfig) -> dict[str, float]:
    """Predicted variances of both stages and their interference residuals.

    Stage A: e0 = -(1-a0) U + a0 (U2 + Z1/a) + (a0/a) S.
    Stage B: e1 = -(1-a1) W + a1 (a U2 + Z1) + a1 kappa S.
    """
    a0, a1, _ = alphas_of(cfg)
    s0, s1, s2 = cfg.second_moments
    a = cfg.a
    residual_a = a0**2 * cfg.Q / a**2
    clean_a = (1 - a0) ** 2 * s0 + a0**2 * (s2 + cfg.N1 / a**2)
    residual_b = a1**2 * kappa(cfg) ** 2 * cfg.Q
    clean_b = (1 - a1) ** 2 * s1 + a1**2 * (a**2 * s2 + cfg.N1)
    total_a, total_b = clean_a + residual_a, clean_b + residual_b
    return {
        "var_u": s0,
        "var_w": s1,
        "var_stage_a": total_a,
        "var_stage_b": total_b,
        "residual_a": residual_a,
        "residual_b": residual_b,
        "residual_fraction_a": residual_a / total_a if total_a > 0 else 0.0,
        "residual_fraction_b": residual_b / total_b if total_b > 0 else 0.0,
    }


def _decoder1_chunk(cfg: LatticeConfig, start: int, count: int) -> _Accumulator:
    a0, a1, a2 = alphas_of(cfg)
    a = cfg.a
    d0_step, d1_step, d2_step = cfg.steps
    dr = _draw(cfg, start, count, Stream.Z1, cfg.N1)
    v0, v1, v2 = dr.v
    d0, d1, d2 = dr.d
    u = _lattice(d0_step, v0 - a0 * dr.s + d0)
    w = _lattice(d1_step, v1 - a1 * (1 - a0) * dr.s + d1)
    u2 = _lattice(d2_step, v2 - a2 * (1 - a0) * dr.s + d2)
    y1 = w + a * (u + u2) + (1 + a) * dr.s + dr.z

    e0 = -(1 - a0) * u + a0 * (u2 + dr.z / a) + (a0 / a) * dr.s
    e1 = -(1 - a1) * w + a1 * (a * u2 + dr.z) + a1 * kappa(cfg) * dr.s

    acc = _Accumulator(n=count)
    for name, x in (("u", u), ("w", w), ("s", dr.s), ("e0", e0), ("e1", e1)):
        acc.moments(name, x)
    acc.product("u", "s", u, dr.s)
    acc.product("w", "s", w, dr.s)
    acc.keep("u", u)
    acc.keep("w", w)
    if d0_step > 0:
        stage_a = mod_lattice((a0 / a) * (y1 - w) - d0, d0_step)
        acc.worst("identity_stage_a", mod_lattice(stage_a - (v0 + e0), d0_step))
        acc.count("wrap_stage_a", np.abs(e0) >= d0_step / 2)
    if d1_step > 0:
        g = y1 - a * (u + a0 * dr.s)
        stage_b = mod_lattice(a1 * g - d1, d1_step)
        acc.worst("identity_stage_b", mod_lattice(stage_b - (v1 + e1), d1_step))
        acc.count("wrap_stage_b", np.abs(e1) >= d1_step / 2)
    return acc


def simulate_decoder1(
    cfg: LatticeConfig, settings: ToolkitSettings | None = None
) -> LatticeRunStats:
    """Simulate the receiver-1 surrogate and account for its interference residuals."""
    _validate(cfg, DECODER1_CHECKS)
    if cfg.a == 0:
        raise LatticeConfigError("a = 0: no crossover path from sender 2 to receiver 1")
    settings = settings or load_settings()
    cfg = resolve_alphas(cfg, decoder=1)
    started = time.perf_counter()
    acc = _run_chunks(cfg.samples, settings, lambda st, c: _decoder1_chunk(cfg, st, c))
    pred = decoder1_predictions(cfg)
    n = acc.n
    band = _band(n)
    corr_bound = 4.0 / math.sqrt(n)

    stats = LatticeRunStats(1, n, cfg.seed, alphas_of(cfg))
    stats.checks = {
        "var_u": StatCheck("var_u", pred["var_u"], acc.variance("u"), band),
        "var_w": StatCheck("var_w", pred["var_w"], acc.variance("w"), band),
        "var_stage_a": StatCheck("var_stage_a", pred["var_stage_a"], acc.variance("e0"), band),
        "var_stage_b": StatCheck("var_stage_b", pred["var_stage_b"], acc.variance("e1"), band),
        "corr_u_s": StatCheck(
            "corr_u_s", 0.0, abs(acc.correlation("u", "s")), corr_bound, "at_most"
        ),
        "corr_w_s": StatCheck(
            "corr_w_s", 0.0, abs(acc.correlation("w", "s")), corr_bound, "at_most"
        ),
        "ks_u": StatCheck(
            "ks_u", 0.0, _ks_uniform(acc, "u", cfg.steps[0]), KS_SIGNIFICANCE, "at_least"
        ),
        "ks_w": StatCheck(
            "ks_w", 0.0, _ks_uniform(acc, "w", cfg.steps[1]), KS_SIGNIFICANCE, "at_least"
        ),
    }
    for key in ("identity_stage_a", "identity_stage_b"):
        if key in acc.max_abs:
            stats.checks[key] = StatCheck(key, 0.0, acc.max_abs[key], IDENTITY_TOLERANCE, "at_most")
    for key in ("wrap_stage_a", "wrap_stage_b"):
        if key in acc.counts:
            stats.info[f"{key}_fraction"] = acc.counts[key] / n
    stats.info["residual_fraction_a"] = pred["residual_fraction_a"]
    stats.info["residual_fraction_b"] = pred["residual_fraction_b"]
    stats.info["kappa"] = kappa(cfg)
    stats.select(cfg.stats)
    stats.duration_seconds = time.perf_counter() - started
    _log_run(stats)
    return stats


def _log_run(stats: LatticeRunStats) -> None:
    if stats.passed:
        logger.info(
            "Decoder %d: %d samples, all %d checks passed (%.2fs)",
            stats.decoder, stats.samples, len(stats.checks), stats.duration_seconds,
        )
    else:
        logger.warning("Decoder %d: failed checks %s", stats.decoder, stats.failed())


# ============================================================
# Toy decoding over finite constellations
# ============================================================


@dataclass
class StageDecoding:
    """Symbol error rate of one decoding stage."""

    stage: str
    constellation_size: int
    spacing: float
    noise_std: float
    symbol_error_rate: float
    predicted_error_rate: float

    @property
    def expected_decodable(self) -> bool:
        return self.spacing >= 8.0 * self.noise_std

    @property
    def below_noise_floor(self) -> bool:
        return self.spacing < self.noise_std

    def to_dict(self) -> dict[str, Any]:
        return {
            "stage": self.stage,
            "constellation_size": self.constellation_size,
            "spacing": self.spacing,
            "noise_std": self.noise_std,
            "symbol_error_rate": self.symbol_error_rate,
            "predicted_error_rate": self.predicted_error_rate,
            "expected_decodable": self.expected_decodable,
            "below_noise_floor": self.below_noise_floor,
        }


def _constellation(u: Array, size: int, step: float) -> tuple[NDArray[np.int64], Array]:
    """Indices and points of ``size`` equally spaced points centred in [-step/2, step/2)."""
    idx = np.minimum((u * size).astype(np.int64), size - 1)
    return idx, -step / 2 + (idx + 0.5) * step / size


def _nearest(y: Array, size: int, step: float) -> NDArray[np.int64]:
    spacing = step / size
    return np.mod(np.floor((y + step / 2) / spacing).astype(np.int64), size)


def toy_decode_demo(
    cfg: LatticeConfig, constellation_size: int, decoder: int = 2
) -> list[StageDecoding]:
    """Send finite-constellation messages and decode each stage by nearest point.

    The second stage of each decoder assumes the first stage was decoded
    correctly (its effective noise is formed from the true signals).
    """
    if constellation_size < 1:
        raise LatticeConfigError(f"constellation size must be >= 1, got {constellation_size}")
    if decoder == 1 and cfg.a == 0:
        raise LatticeConfigError("a = 0: no crossover path from sender 2 to receiver 1")
    cfg = resolve_alphas(cfg, decoder=decoder)
    a0, a1, a2 = alphas_of(cfg)
    n, seed, k = cfg.samples, cfg.seed, constellation_size
    steps = cfg.steps
    s = math.sqrt(cfg.Q) * normals(seed, Stream.S, 0, n)
    noise_stream, noise_var = (Stream.Z2, cfg.N2) if decoder == 2 else (Stream.Z1, cfg.N1)
    z = math.sqrt(noise_var) * normals(seed, noise_stream, 0, n)
    idx, v = zip(
        *(
            _constellation(uniforms(seed, st, 0, n), k, steps[i])
            for i, st in enumerate((Stream.V0, Stream.V1, Stream.V2))
        ),
        strict=True,
    )
    d = [
        cell_uniforms(seed, st, 0, n, steps[i])
        for i, st in enumerate((Stream.D0, Stream.D1, Stream.D2))
    ]
    u = _lattice(steps[0], v[0] - a0 * s + d[0])
    w = _lattice(steps[1], v[1] - a1 * (1 - a0) * s + d[1])
    u2 = _lattice(steps[2], v[2] - a2 * (1 - a0) * s + d[2])

    if decoder == 2:
        y2 = u + u2 + s + z
        pred = decoder2_predictions(cfg)
        z02e = -(1 - a0) * u + a0 * (u2 + z)
        stages = [
            ("stage1", 0, lambda: mod_lattice(a0 * y2 - d[0], steps[0]), pred["var_z02e"]),
            (
                "stage2",
                2,
                lambda: mod_lattice(a2 * ((1 - a0) * y2 + z02e) - d[2], steps[2]),
                pred["var_stage2_noise"],
            ),
        ]
    else:
        a = cfg.a
        y1 = w + a * (u + u2) + (1 + a) * s + z
        pred1 = decoder1_predictions(cfg)
        stages = [
            ("stage_a", 0, lambda: mod_lattice((a0 / a) * (y1 - w) - d[0], steps[0]),
             pred1["var_stage_a"]),
            ("stage_b", 1, lambda: mod_lattice(a1 * (y1 - a * (u + a0 * s)) - d[1], steps[1]),
             pred1["var_stage_b"]),
        ]

    results = []
    for name, lattice_index, output, variance in stages:
        step = steps[lattice_index]
        std = math.sqrt(variance)
        spacing = step / k
        if step <= 0:
            ser = 0.0
        else:
            ser = float(np.mean(_nearest(output(), k, step) != idx[lattice_index]))
        predicted = 0.0 if k == 1 or std == 0 else float(2.0 * norm.sf(spacing / (2.0 * std)))
        stage = StageDecoding(name, k, spacing, std, ser, predicted)
        if stage.below_noise_floor:
            logger.warning(
                "%s: spacing %.3g is below the noise std %.3g; decoding is guesswork",
                name, spacing, std,
            )
        results.append(stage)
    return results
