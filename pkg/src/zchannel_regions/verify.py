"""Acceptance suites run by ``zchannel-regions verify <suite>``.

Each suite returns a ``SuiteResult``; the CLI maps it to an exit code. Oracle
disagreements exit with 3, failed statistical checks with 4. ``findings`` lists
observations that are reported without failing the suite.
"""

from __future__ import annotations

import hashlib
import logging
import math
from collections.abc import Callable
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from zchannel_regions.config import ToolkitSettings, load_settings
from zchannel_regions.errors import ExitCode
from zchannel_regions.gauss.channel import GaussianZChannel
from zchannel_regions.gauss.dpc import (
    DpcParams,
    determinant_crosscheck,
    lemma1_residuals,
    linear_grid,
    q_invariance,
)
from zchannel_regions.lattice.formulas import (
    alpha_grid_check,
    optimal_rates,
    resolve_alphas,
    theorem5_bounds,
)
from zchannel_regions.lattice.simulate import (
    decoder1_predictions,
    simulate_decoder1,
    simulate_decoder2,
)
from zchannel_regions.models import LatticeConfig
from zchannel_regions.output.writers import json_text
from zchannel_regions.prob.core import (
    JointDistribution,
    entropy,
    random_joint_distribution,
    set_clamp_tolerance,
)
from zchannel_regions.regions.dmc import (
    bc_reduction,
    compare_fme,
    mac_reduction,
    split_rate_bounds,
    state_free_theorem1_bounds,
    theorem1_bounds,
    theorem2_bounds,
    theorem2_region,
    theorem3_bounds,
    theorem3_outer,
)
from zchannel_regions.regions.region import region_contains

logger = logging.getLogger(__name__)

IDENTITY_TOLERANCE = 1e-10


@dataclass
class SuiteResult:
    name: str
    passed: bool
    exit_code: ExitCode = ExitCode.OK
    details: dict[str, Any] = field(default_factory=dict)
    findings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["exit_code"] = int(self.exit_code)
        return out


def _result(
    name: str,
    passed: bool,
    details: dict[str, Any],
    findings: list[str] | None = None,
    failure: ExitCode = ExitCode.ORACLE_MISMATCH,
) -> SuiteResult:
    result = SuiteResult(
        name, passed, ExitCode.OK if passed else failure, details, findings or []
    )
    if passed:
        logger.info("Suite %s passed", name)
    else:
        logger.warning("Suite %s failed: %s", name, details)
    return result


# ============================================================
# Finite-alphabet suites
# ============================================================


def suite_fme(settings: ToolkitSettings, count: int = 100, seed: int = 0) -> SuiteResult:
    """Exact projection of the split-rate system against its closed form."""
    tol = settings.region_tolerance
    mismatched: list[int] = []
    d_prime_differs = 0
    literal_differs = 0
    facet_counts: dict[str, int] = {}
    for i in range(count):
        dist = random_joint_distribution(seed + i, tolerance=settings.validation_tolerance)
        cmp = compare_fme(dist, tol, settings.rational_limit_denominator)
        if not cmp.matches:
            mismatched.append(seed + i)
        for comparison in (cmp.theorem1_d_prime, cmp.theorem1_literal):
            for label in comparison.missing_facets + comparison.extra_facets:
                key = f"{comparison.label}: {label}"
                facet_counts[key] = facet_counts.get(key, 0) + 1
        d_prime_differs += not cmp.theorem1_d_prime.matches
        literal_differs += not cmp.theorem1_literal.matches

    findings = []
    if d_prime_differs:
        findings.append(
            f"theorem1 region with D' differs from the projection on {d_prime_differs}/{count}"
        )
    if literal_differs:
        findings.append(
            f"theorem1 region as stated differs from the projection on {literal_differs}/{count}"
        )
    details = {
        "distributions": count,
        "mismatched_seeds": mismatched,
        "facet_differences": dict(sorted(facet_counts.items())),
    }
    return _result("fme", not mismatched, details, findings)


def _cmi_from_entropies(dist: JointDistribution, a: str, b: str, c: str = "") -> float:
    """I(a; b | c) as H(ac) + H(bc) - H(abc) - H(c)."""

    def h(*groups: str) -> float:
        names = sorted({v for g in groups for v in g.split(",") if v})
        return entropy(dist, names) if names else 0.0

    return h(a, c) + h(b, c) - h(a, b, c) - h(c)


def _binned_from_entropies(dist: JointDistribution, aux: str, out: str, given: str = "") -> float:
    return _cmi_from_entropies(dist, aux, out, given) - _cmi_from_entropies(dist, aux, "S", given)


def suite_corollaries(
    settings: ToolkitSettings, count: int = 50, seed: int = 0
) -> SuiteResult:
    """Stateless, MAC and broadcast special cases against direct evaluation."""
    tol_v = settings.validation_tolerance
    worst = {"state_free": 0.0, "mac": 0.0, "bc": 0.0}

    for i in range(count):
        dist = random_joint_distribution(seed + i, {"S": 1}, tolerance=tol_v)
        got = theorem1_bounds(dist).to_dict()
        ref = state_free_theorem1_bounds(dist).to_dict()
        worst["state_free"] = max(worst["state_free"], *(abs(got[k] - ref[k]) for k in got))

    for i in range(count):
        dist = random_joint_distribution(seed + i, {"U": 1, "U2": 1}, tolerance=tol_v)
        got_raw = [h.raw for h in mac_reduction(dist).bounds]
        expected = [
            _binned_from_entropies(dist, "W", "Y1", "U1"),
            _binned_from_entropies(dist, "U1", "Y1", "W"),
            _binned_from_entropies(dist, "W,U1", "Y1"),
        ]
        worst["mac"] = max(
            worst["mac"], *(abs((g or 0.0) - e) for g, e in zip(got_raw, expected, strict=True))
        )

    for i in range(count):
        dist = random_joint_distribution(seed + i, {"W": 1, "U2": 1}, tolerance=tol_v)
        got_raw = [h.raw for h in bc_reduction(dist).bounds]
        expected = [
            _binned_from_entropies(dist, "U1", "Y1", "U"),
            _binned_from_entropies(dist, "U", "Y2"),
        ]
        worst["bc"] = max(
            worst["bc"], *(abs((g or 0.0) - e) for g, e in zip(got_raw, expected, strict=True))
        )

    passed = all(v <= IDENTITY_TOLERANCE for v in worst.values())
    return _result("corollaries", passed, {"instances": count, "max_error": worst})


def suite_inner_outer(
    settings: ToolkitSettings, count: int = 100, seed: int = 0
) -> SuiteResult:
    """Degraded-channel inner bound inside the outer bound, bound by bound."""
    tol = settings.region_tolerance
    not_contained: list[int] = []
    dominance_violations: list[str] = []
    worst_substitution = 0.0
    for i in range(count):
        dist = random_joint_distribution(
            seed + i, identity_u1=True, degraded=True, tolerance=settings.validation_tolerance
        )
        if not region_contains(theorem3_outer(dist), theorem2_region(dist, tol), tol):
            not_contained.append(seed + i)

        inner = theorem2_bounds(dist)
        outer = theorem3_bounds(dist)
        for key in ("R11+R21", "R21"):
            if outer[key] < inner[key] - IDENTITY_TOLERANCE:
                dominance_violations.append(f"seed {seed + i}: {key}")
        for key in ("R21+R22", "R22"):
            if abs(outer[key] - inner[key]) > IDENTITY_TOLERANCE:
                dominance_violations.append(f"seed {seed + i}: {key} differs")

        # With U1 = U the split-rate bounds collapse onto the inner-bound expressions.
        split = split_rate_bounds(dist)
        pairs = (
            (split.all_at_y1, inner["R11+R21"]),
            (split.second_sender_at_y1, inner["R21"]),
            (split.w_u1_at_y1, inner["R11"]),
            (split.all_at_y2, inner["R21+R22"]),
            (split.u2_at_y2, inner["R22"]),
            (split.u1_at_y1, 0.0),
        )
        worst_substitution = max(worst_substitution, *(abs(x - y) for x, y in pairs))

    passed = (
        not not_contained
        and not dominance_violations
        and worst_substitution <= IDENTITY_TOLERANCE
    )
    details = {
        "distributions": count,
        "not_contained": not_contained,
        "dominance_violations": dominance_violations,
        "max_substitution_error": worst_substitution,
    }
    return _result("inner-outer", passed, details)


# ============================================================
# Gaussian suites
# ============================================================


LEMMA1_VALUES = tuple(float(v) for v in range(1, 11))
LEMMA1_QS = (0.1, 1.0, 10.0)
LEMMA1_XIS = (0.0, 0.3, 1.0)
PERTURBATION = 0.1
GAP_FLOOR = 1e-6


def suite_lemma1(
    settings: ToolkitSettings,
    values: tuple[float, ...] = LEMMA1_VALUES,
    perturbation: float = PERTURBATION,
) -> SuiteResult:
    """Orthogonality residuals and information gaps with the Costa coefficients.

    The perturbation criterion is decided on the reference channel; the grid
    minimum of the perturbed joint gap is reported as a finding.
    """
    jitter = settings.gaussian_jitter
    worst_residual = 0.0
    worst_gap = 0.0
    smallest_perturbed_gap = math.inf
    points = 0
    for p1 in values:
        for p2 in values:
            for a in values:
                for q in LEMMA1_QS:
                    channel = GaussianZChannel(a=a, a1=1.0, a2=1.0, P1=p1, P2=p2, Q=q)
                    for xi in LEMMA1_XIS:
                        params = DpcParams.costa(channel, xi)
                        res = lemma1_residuals(channel, params, jitter)
                        points += 1
                        worst_residual = max(worst_residual, abs(res.r_u), abs(res.r_w))
                        worst_gap = max(worst_gap, *res.mi_gaps)
                        if xi >= 0.3:
                            for sign in (1.0, -1.0):
                                pert = lemma1_residuals(
                                    channel, params.perturbed(sign * perturbation), jitter
                                )
                                smallest_perturbed_gap = min(
                                    smallest_perturbed_gap, pert.mi_gaps[0]
                                )

    reference = GaussianZChannel(a=1.0, a1=1.0, a2=1.0, P1=2.0, P2=3.0, Q=1.0)
    ref_params = DpcParams.costa(reference, 1.0)
    reference_gaps = [
        list(lemma1_residuals(reference, ref_params.perturbed(s * perturbation), jitter).mi_gaps)
        for s in (1.0, -1.0)
    ]
    perturbation_detected = all(g > GAP_FLOOR for gaps in reference_gaps for g in gaps)

    criteria = {
        "residuals_below_1e-12": worst_residual <= 1e-12,
        "gaps_below_1e-9": worst_gap <= 1e-9,
        "reference_perturbation_gaps_above_floor": perturbation_detected,
    }
    passed = all(criteria.values())
    findings = []
    if smallest_perturbed_gap <= GAP_FLOOR:
        findings.append(
            f"smallest perturbed joint gap on the grid is {smallest_perturbed_gap:.3e}"
        )
    details = {
        "criteria": criteria,
        "perturbation": perturbation,
        "gap_floor": GAP_FLOOR,
        "points": points,
        "max_residual": worst_residual,
        "max_gap": worst_gap,
        "perturbed_reference_gaps": reference_gaps,
        "min_perturbed_joint_gap": smallest_perturbed_gap,
    }
    return _result("lemma1", passed, details, findings)


def random_channels(count: int, seed: int) -> list[GaussianZChannel]:
    rng = np.random.default_rng(seed)
    return [
        GaussianZChannel(
            a=float(rng.uniform(0.1, 10.0)),
            a1=float(rng.uniform(0.1, 5.0)),
            a2=float(rng.uniform(0.1, 5.0)),
            P1=float(rng.uniform(0.1, 10.0)),
            P2=float(rng.uniform(0.1, 10.0)),
            Q=float(rng.uniform(0.1, 10.0)),
        )
        for _ in range(count)
    ]


def suite_q_invariance(
    settings: ToolkitSettings, count: int = 20, seed: int = 0
) -> SuiteResult:
    xi_grid = linear_grid(11, 0.0, 1.0)
    failed = []
    worst = 0.0
    for i, channel in enumerate(random_channels(count, seed)):
        report = q_invariance(channel, xi_grid, tol=settings.region_tolerance)
        worst = max(worst, report.max_logdet_error)
        if not report.passed:
            failed.append(i)
    details = {"channels": count, "failed_channels": failed, "max_logdet_error": worst}
    return _result("q-invariance", not failed, details)


def suite_determinant(
    settings: ToolkitSettings, count: int = 10, seed: int = 0, points: int = 20
) -> SuiteResult:
    """Determinant bounds of the second receiver against the log-det path.

    The corrected matrix must agree; disagreement of the printed matrix is a
    finding that still exits with 3.
    """
    xi_grid = linear_grid(points, 0.0, 1.0)
    gamma_grid = linear_grid(points, settings.gamma_min, settings.gamma_max)
    reports = [
        determinant_crosscheck(channel, xi_grid, gamma_grid, settings.region_tolerance)
        for channel in random_channels(count, seed)
    ]
    corrected_ok = all(r.corrected_agrees for r in reports)
    mismatches = sum(r.literal_mismatches for r in reports)
    checked = sum(r.points for r in reports)
    findings = []
    if mismatches:
        findings.append(
            f"printed determinant bounds disagree with log-det at {mismatches}/{checked} points"
        )
    details = {
        "channels": count,
        "points_checked": checked,
        "points_skipped": sum(r.skipped for r in reports),
        "max_corrected_error": max(r.max_corrected_error for r in reports),
        "max_literal_error": max(r.max_literal_error for r in reports),
        "literal_mismatches": mismatches,
    }
    result = _result("determinant", corrected_ok, details, findings)
    if mismatches:
        result.exit_code = ExitCode.ORACLE_MISMATCH
    return result


# ============================================================
# Lattice suites
# ============================================================


FORMULA_CONFIGS: tuple[dict[str, float], ...] = (
    {},
    {"rho": 1.0, "P2": 3.0},
    {"rho": 0.3, "a": 2.0, "Q": 10.0},
    {"rho": 0.8, "P1": 5.0, "N1": 2.0, "N2": 0.5},
)


def suite_lattice_formulas(settings: ToolkitSettings) -> SuiteResult:
    """Rate formulas at the optimal scalings against their closed forms."""
    worst = 0.0
    grid_failures: list[str] = []
    for overrides in FORMULA_CONFIGS:
        base = LatticeConfig(**overrides)
        closed = optimal_rates(base)
        rx2 = theorem5_bounds(resolve_alphas(base, decoder=2))
        rx1 = theorem5_bounds(resolve_alphas(base, decoder=1))
        errors = (
            abs(rx2.common_rx2 - closed["common_rx2"]),
            abs(rx1.common_rx1 - closed["common_rx1"]),
            abs(rx2.r22_bound - closed["r22_bound"]),
            abs(rx2.r11_bound - closed["r11_bound"]),
            abs(rx2.r11_at_alpha1 - closed["r11_bound"]),
        )
        worst = max(worst, *errors)
        grid_failures.extend(
            f"{overrides}: {c.name}" for c in alpha_grid_check(base) if not c.passed
        )
    passed = worst <= 1e-12 and not grid_failures
    details = {"configs": len(FORMULA_CONFIGS), "max_error": worst, "grid_failures": grid_failures}
    return _result("lattice-formulas", passed, details)


def suite_lattice_mc(
    settings: ToolkitSettings, samples: int = 1_000_000, seed: int = 0
) -> SuiteResult:
    """Both decoders at the default configuration, plus the residual at strong crossover."""
    cfg = LatticeConfig(samples=samples, seed=seed)
    runs = {
        "decoder2": simulate_decoder2(cfg, settings),
        "decoder1": simulate_decoder1(cfg, settings),
    }
    strong = resolve_alphas(LatticeConfig(a=100.0, Q=10.0), decoder=1)
    residual = decoder1_predictions(strong)["residual_fraction_a"]
    failed = {name: run.failed() for name, run in runs.items() if not run.passed}
    passed = not failed and residual < 1e-3
    details = {
        "samples": samples,
        "failed_checks": failed,
        "strong_crossover_residual_fraction": residual,
        "runs": {name: run.to_dict() for name, run in runs.items()},
    }
    return _result("lattice-mc", passed, details, failure=ExitCode.STATISTICAL_FAILURE)


REPRODUCIBILITY_CONFIGS: tuple[tuple[int, dict[str, float]], ...] = (
    (2, {}),
    (1, {}),
    (2, {"rho": 0.3, "Q": 10.0}),
)


def _digest(payload: dict[str, Any]) -> str:
    return hashlib.sha256(json_text(payload).encode("utf-8")).hexdigest()


def suite_reproducibility(
    settings: ToolkitSettings,
    samples: int = 200_000,
    seed: int = 42,
    workers: tuple[int, ...] = (1, 1, 4),
) -> SuiteResult:
    """Stats JSON digests must not depend on the worker count or on the run."""
    mismatched = []
    digests: dict[str, list[str]] = {}
    for decoder, overrides in REPRODUCIBILITY_CONFIGS:
        cfg = LatticeConfig(samples=samples, seed=seed, **overrides)
        run: Callable[[LatticeConfig, ToolkitSettings], Any] = (
            simulate_decoder1 if decoder == 1 else simulate_decoder2
        )
        key = f"decoder{decoder} {overrides}"
        digests[key] = [
            _digest(run(cfg, settings.model_copy(update={"sim_workers": w})).to_dict())
            for w in workers
        ]
        if len(set(digests[key])) != 1:
            mismatched.append(key)
    details = {"workers": list(workers), "digests": digests, "mismatched": mismatched}
    return _result("reproducibility", not mismatched, details)


# ============================================================
# Registry
# ============================================================


SUITES: dict[str, Callable[[ToolkitSettings, int], SuiteResult]] = {
    "fme": lambda s, seed: suite_fme(s, seed=seed),
    "corollaries": lambda s, seed: suite_corollaries(s, seed=seed),
    "inner-outer": lambda s, seed: suite_inner_outer(s, seed=seed),
    "lemma1": lambda s, seed: suite_lemma1(s),
    "q-invariance": lambda s, seed: suite_q_invariance(s, seed=seed),
    "determinant": lambda s, seed: suite_determinant(s, seed=seed),
    "lattice-formulas": lambda s, seed: suite_lattice_formulas(s),
    "lattice-mc": lambda s, seed: suite_lattice_mc(s, seed=seed),
    "reproducibility": lambda s, seed: suite_reproducibility(s, seed=seed),
}


def run_suite(
    name: str, settings: ToolkitSettings | None = None, seed: int = 0
) -> list[SuiteResult]:
    """Run one suite, or every suite for ``all``."""
    settings = settings or load_settings()
    if name != "all" and name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
    suites = list(SUITES.values()) if name == "all" else [SUITES[name]]
    previous = set_clamp_tolerance(settings.mi_clamp_tolerance)
    try:
        return [suite(settings, seed) for suite in suites]
    finally:
        set_clamp_tolerance(previous)


def overall_exit_code(results: list[SuiteResult]) -> ExitCode:
    return max((r.exit_code for r in results), default=ExitCode.OK)
