"""Command-line front end.

Subcommands: ``dmc-region``, ``fme``, ``gauss-dpc``, ``lattice region|sim`` and
``verify <suite>``. Settings come from flags only; the environment is never read.
Exit codes follow ``errors.ExitCode``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from zchannel_regions import __version__
from zchannel_regions.config import ToolkitSettings, pinned_settings
from zchannel_regions.errors import ExitCode, ToolkitError
from zchannel_regions.gauss.channel import load_channel
from zchannel_regions.gauss.dpc import (
    BOUND_COLUMNS,
    DpcParams,
    dpc_region_union,
    lemma1_residuals,
    linear_grid,
    q_invariance,
    sweep_rows,
)
from zchannel_regions.lattice.formulas import (
    load_lattice_config,
    pareto_frontier,
    region_union,
)
from zchannel_regions.lattice.simulate import (
    simulate_decoder1,
    simulate_decoder2,
    toy_decode_demo,
)
from zchannel_regions.logging_config import configure_logging, get_structured_logger
from zchannel_regions.models import LatticeConfig, LinearSystemFile, Theorem
from zchannel_regions.output.manifest import ManifestRecorder
from zchannel_regions.output.svg import slice_plot
from zchannel_regions.output.writers import json_text, write_csv, write_json, write_text
from zchannel_regions.polyproj.fme import project
from zchannel_regions.polyproj.system import LinearSystem
from zchannel_regions.prob.core import load_distribution, set_clamp_tolerance, use_natural_log
from zchannel_regions.regions.dmc import (
    compare_fme,
    theorem1_region,
    theorem2_region,
    theorem3_outer,
)
from zchannel_regions.regions.region import RateRegion, slice_polygon
from zchannel_regions.verify import SUITES, overall_exit_code, run_suite

logger = logging.getLogger(__name__)

Handler = Callable[[argparse.Namespace, ToolkitSettings], ExitCode]

SWEEP_HEADER: tuple[str, ...] = (
    "xi",
    "gamma",
    *BOUND_COLUMNS,
    "r21_r22_corrected",
    "r22_corrected",
)
FRONTIER_HEADER: tuple[str, ...] = ("rho", "alpha0", "r11", "r21", "r22")


def _emit(text: str, out: str | None, manifest: ManifestRecorder | None = None) -> None:
    """Write ``text`` to ``out`` (recorded in the manifest) or to stdout."""
    if out is None:
        sys.stdout.write(text)
        return
    path = write_text(out, text)
    if manifest is not None:
        manifest.add(path)


def _manifest_path(out: str) -> Path:
    path = Path(out)
    return path.with_name(f"{path.stem}.manifest.json")


def _resolved_config(args: argparse.Namespace, settings: ToolkitSettings) -> dict[str, Any]:
    flags = {k: v for k, v in sorted(vars(args).items()) if k != "handler"}
    return {"flags": flags, "settings": settings.model_dump()}


def _seed(args: argparse.Namespace) -> int:
    return 0 if args.seed is None else int(args.seed)


# ============================================================
# dmc-region
# ============================================================


def cmd_dmc_region(args: argparse.Namespace, settings: ToolkitSettings) -> ExitCode:
    tol = settings.region_tolerance
    dist = load_distribution(args.dist, tolerance=settings.validation_tolerance)
    theorem = Theorem(args.theorem)
    region: RateRegion
    if theorem is Theorem.THEOREM1:
        region = theorem1_region(dist, use_d_prime=args.use_d_prime)
    elif theorem is Theorem.THEOREM2:
        region = theorem2_region(dist, settings.validation_tolerance)
    else:
        region = theorem3_outer(dist)

    manifest = None
    if args.out:
        manifest = ManifestRecorder("dmc-region", _resolved_config(args, settings), [_seed(args)])
    _emit(region.to_json(tol), args.out, manifest)

    code = ExitCode.OK
    if args.fme_check:
        report = compare_fme(dist, tol, settings.rational_limit_denominator)
        report_out = None
        if args.out:
            out = Path(args.out)
            report_out = str(out.with_name(f"{out.stem}.fme.json"))
        _emit(json_text(report.to_dict()), report_out, manifest)
        if not report.matches:
            code = ExitCode.ORACLE_MISMATCH
    if manifest is not None and args.out:
        manifest.write(_manifest_path(args.out))
    return code


# ============================================================
# fme
# ============================================================


def cmd_fme(args: argparse.Namespace, settings: ToolkitSettings) -> ExitCode:
    doc = LinearSystemFile.model_validate_json(Path(args.system).read_text(encoding="utf-8"))
    system = LinearSystem.from_file(doc, settings.rational_limit_denominator)
    if args.rational:
        system = system.to_rational(settings.rational_limit_denominator)
    keep = [v.strip() for v in args.keep.split(",") if v.strip()]
    order = [v.strip() for v in args.order.split(",") if v.strip()] if args.order else None
    projected = project(system, keep, settings.region_tolerance, order)

    manifest = None
    if args.out:
        manifest = ManifestRecorder("fme", _resolved_config(args, settings), [_seed(args)])
    _emit(json_text(projected.to_file().model_dump(mode="json")), args.out, manifest)
    if manifest is not None and args.out:
        manifest.write(_manifest_path(args.out))
    return ExitCode.OK


# ============================================================
# gauss-dpc
# ============================================================


def _slice_svg(union_facets: list[tuple[tuple[float, ...], float]], r22_max: float) -> str:
    series = []
    for fraction in (0.0, 0.25, 0.5):
        level = fraction * r22_max
        polygon = slice_polygon(union_facets, 2, level)
        series.append((f"R22 = {level:.4g}", polygon))
    return slice_plot(series, "R11", "R21", "Union slices at fixed R22")


def cmd_gauss_dpc(args: argparse.Namespace, settings: ToolkitSettings) -> ExitCode:
    channel = load_channel(args.channel)
    xi_grid = linear_grid(args.xi_grid or settings.xi_points, 0.0, 1.0)
    gamma_grid = linear_grid(
        args.gamma_grid or settings.gamma_points, settings.gamma_min, settings.gamma_max
    )
    out_dir = Path(args.out_dir)
    manifest = ManifestRecorder("gauss-dpc", _resolved_config(args, settings), [_seed(args)])
    log = get_structured_logger(
        __name__, {"xi_points": len(xi_grid), "gamma_points": len(gamma_grid)}
    )

    rows = sweep_rows(channel, xi_grid, gamma_grid)
    manifest.add(write_csv(out_dir / "bounds.csv", SWEEP_HEADER, rows))
    union = dpc_region_union(
        channel, xi_grid, gamma_grid, corrected=args.corrected, tol=settings.region_tolerance
    )
    hull_payload = {"channel": channel.to_spec().model_dump(), **union.to_dict()}
    manifest.add(write_json(out_dir / "hull.json", hull_payload))
    log.info("Swept %d grid points", len(union.points))

    if args.svg:
        r22_max = max((v[2] for v in union.hull_vertices), default=0.0)
        manifest.add(write_text(args.svg, _slice_svg(union.hull_equations, r22_max)))

    code = ExitCode.OK
    if args.verify == "lemma1":
        jitter = settings.gaussian_jitter
        residuals = {
            xi: lemma1_residuals(channel, DpcParams.costa(channel, xi), jitter) for xi in xi_grid
        }
        all_pass = all(r.passes() for r in residuals.values())
        points = [{"xi": xi, **r.to_dict()} for xi, r in residuals.items()]
        manifest.add(write_json(out_dir / "lemma1.json", {"points": points, "all_pass": all_pass}))
        if not all_pass:
            code = ExitCode.ORACLE_MISMATCH
    if args.q_sweep:
        report = q_invariance(channel, xi_grid, tol=settings.region_tolerance)
        manifest.add(write_json(out_dir / "q_invariance.json", report.to_dict()))
        if not report.passed:
            code = ExitCode.ORACLE_MISMATCH

    manifest.write(out_dir / "manifest.json")
    return code


# ============================================================
# lattice
# ============================================================


def _lattice_config(args: argparse.Namespace) -> LatticeConfig:
    cfg = load_lattice_config(args.config) if args.config else LatticeConfig()
    updates: dict[str, Any] = {}
    if args.seed is not None:
        updates["seed"] = int(args.seed)
    if getattr(args, "samples", None) is not None:
        updates["samples"] = int(args.samples)
    if getattr(args, "stats", None):
        updates["stats"] = [s.strip() for s in args.stats.split(",") if s.strip()]
    # model_copy skips validation, so round-trip through the validator
    return LatticeConfig.model_validate({**cfg.model_dump(), **updates}) if updates else cfg


def cmd_lattice_region(args: argparse.Namespace, settings: ToolkitSettings) -> ExitCode:
    cfg = _lattice_config(args)
    cloud = region_union(
        cfg,
        linear_grid(args.rho_grid, 0.0, 1.0),
        linear_grid(args.alpha0_grid, 0.0, 1.0),
    )
    frontier = pareto_frontier(cloud)
    rows = [(p.rho, p.alpha0, p.r11, p.r21, p.r22) for p in frontier]
    manifest = ManifestRecorder("lattice region", _resolved_config(args, settings), [cfg.seed])
    manifest.add(write_csv(args.out, FRONTIER_HEADER, rows))
    if args.cloud:
        cloud_rows = [(p.rho, p.alpha0, p.r11, p.r21, p.r22) for p in cloud]
        manifest.add(write_csv(args.cloud, FRONTIER_HEADER, cloud_rows))
    logger.info("Pareto frontier: %d of %d points", len(frontier), len(cloud))
    manifest.write(_manifest_path(args.out))
    return ExitCode.OK


def cmd_lattice_sim(args: argparse.Namespace, settings: ToolkitSettings) -> ExitCode:
    cfg = _lattice_config(args)
    simulate = simulate_decoder1 if args.decoder == 1 else simulate_decoder2
    stats = simulate(cfg, settings)
    payload: dict[str, Any] = stats.to_dict()
    if args.toy:
        payload["toy_decoding"] = [
            s.to_dict() for s in toy_decode_demo(cfg, args.toy, decoder=args.decoder)
        ]
    manifest = None
    if args.out:
        manifest = ManifestRecorder("lattice sim", _resolved_config(args, settings), [cfg.seed])
    _emit(json_text(payload), args.out, manifest)
    if manifest is not None and args.out:
        manifest.write(_manifest_path(args.out))
    return ExitCode.OK if stats.passed else ExitCode.STATISTICAL_FAILURE


def cmd_lattice(args: argparse.Namespace, settings: ToolkitSettings) -> ExitCode:
    if args.lattice_command == "region":
        return cmd_lattice_region(args, settings)
    return cmd_lattice_sim(args, settings)


# ============================================================
# verify
# ============================================================


def cmd_verify(args: argparse.Namespace, settings: ToolkitSettings) -> ExitCode:
    results = run_suite(args.suite, settings, seed=_seed(args))
    payload = {"suites": [r.to_dict() for r in results]}
    manifest = None
    if args.out:
        manifest = ManifestRecorder("verify", _resolved_config(args, settings), [_seed(args)])
    _emit(json_text(payload), args.out, manifest)
    if manifest is not None and args.out:
        manifest.write(_manifest_path(args.out))
    for r in results:
        for finding in r.findings:
            logger.warning("%s: %s", r.name, finding)
    return overall_exit_code(results)


# ============================================================
# Parser and entry point
# ============================================================


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zchannel-regions",
        description="Rate regions and coding-scheme checks for the state-dependent Z channel.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default="WARNING", help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--log-json", action="store_true", help="Emit JSON log records")
    parser.add_argument("--seed", type=int, default=None, help="Random seed (default 0)")
    parser.add_argument("--nats", action="store_true", help="Report information in nats")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dmc-region", help="Rate region of a finite-alphabet distribution")
    p.add_argument("--dist", required=True, help="JointDistribution JSON file")
    p.add_argument("--theorem", choices=[t.value for t in Theorem], default="1")
    p.add_argument("--use-d-prime", action="store_true", help="Use the D' sum-rate constant")
    p.add_argument("--fme-check", action="store_true", help="Compare with the exact projection")
    p.add_argument("--out", help="Region JSON path (stdout when omitted)")
    p.set_defaults(handler=cmd_dmc_region)

    p = sub.add_parser("fme", help="Project a LinearSystem JSON by Fourier-Motzkin elimination")
    p.add_argument("--system", required=True, help="LinearSystem JSON file")
    p.add_argument("--keep", required=True, help="Comma-separated variables to keep")
    p.add_argument("--order", help="Comma-separated elimination order")
    p.add_argument("--rational", action="store_true", help="Project in exact rationals")
    p.add_argument("--out", help="Projected system JSON path (stdout when omitted)")
    p.set_defaults(handler=cmd_fme)

    p = sub.add_parser("gauss-dpc", help="Dirty-paper regions of a Gaussian Z channel")
    p.add_argument("--channel", required=True, help="Channel JSON file (raw or standard form)")
    p.add_argument("--xi-grid", type=int, help="Power-split grid points")
    p.add_argument("--gamma-grid", type=int, help="U2 coefficient grid points")
    p.add_argument("--corrected", action="store_true", help="Union over the corrected bounds")
    p.add_argument("--svg", help="Write R11-R21 slices of the union hull")
    p.add_argument("--verify", choices=["lemma1"], help="Run a check over the xi grid")
    p.add_argument("--q-sweep", action="store_true", help="Check Q-invariance over the xi grid")
    p.add_argument("--out-dir", default="dpc-out", help="Directory for CSV/JSON outputs")
    p.set_defaults(handler=cmd_gauss_dpc)

    p = sub.add_parser("lattice", help="Scalar-lattice rate regions and simulation")
    p.set_defaults(handler=cmd_lattice)
    lattice = p.add_subparsers(dest="lattice_command", required=True)

    q = lattice.add_parser("region", help="Pareto frontier over (rho, alpha0) grids")
    q.add_argument("--config", help="Lattice config JSON")
    q.add_argument("--rho-grid", type=int, default=101)
    q.add_argument("--alpha0-grid", type=int, default=101)
    q.add_argument("--out", default="lattice_frontier.csv", help="Frontier CSV path")
    q.add_argument("--cloud", help="Also write the full rate cloud CSV")

    q = lattice.add_parser("sim", help="Dithered mod-lattice Monte Carlo")
    q.add_argument("--config", help="Lattice config JSON")
    q.add_argument("--samples", type=int, help="Sample count (default from config)")
    q.add_argument("--decoder", type=int, choices=[1, 2], default=2)
    q.add_argument("--workers", type=int, default=1, help="Worker threads")
    q.add_argument("--stats", help="Comma-separated checks to evaluate (default all)")
    q.add_argument("--toy", type=int, metavar="K", help="Also decode a K-point constellation")
    q.add_argument("--out", help="Stats JSON path (stdout when omitted)")

    p = sub.add_parser("verify", help="Run an acceptance suite")
    p.add_argument("suite", choices=[*SUITES, "all"])
    p.add_argument("--out", help="Report JSON path (stdout when omitted)")
    p.set_defaults(handler=cmd_verify)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, run the subcommand and return its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level, args.log_json)

    handler: Handler = args.handler
    previous_unit = use_natural_log(args.nats)
    previous_clamp = set_clamp_tolerance(None)
    try:
        settings = pinned_settings(
            log_level=args.log_level,
            log_format="json" if args.log_json else "text",
            use_natural_log=args.nats,
            sim_workers=getattr(args, "workers", 1),
        )
        use_natural_log(settings.use_natural_log)
        set_clamp_tolerance(settings.mi_clamp_tolerance)
        return int(handler(args, settings))
    except ValidationError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return int(ExitCode.INPUT)
    except ToolkitError as exc:
        logger.debug("Subcommand failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return int(exc.exit_code)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return int(ExitCode.INPUT)
    finally:
        use_natural_log(previous_unit)
        set_clamp_tolerance(previous_clamp)
