"""Tests for the zchannel-regions command line."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import pytest

from tests.conftest import make_factors, to_json_factors, write_json
from zchannel_regions.cli import FRONTIER_HEADER, SWEEP_HEADER, run
from zchannel_regions.output.manifest import load_manifest, verify_manifest
from zchannel_regions.prob.core import log_base, use_natural_log

QUIET = ["--log-level", "ERROR"]


def read_rows(path: Path) -> list[list[str]]:
    with path.open(encoding="utf-8", newline="") as fh:
        return list(csv.reader(fh))


# ================================================================
# dmc-region and fme
# ================================================================


class TestDmcRegion:
    """Finite-alphabet regions from a distribution file."""

    def test_region_to_stdout(self, dist_file: Path, capsys: pytest.CaptureFixture[str]) -> None:
        assert run([*QUIET, "dmc-region", "--dist", str(dist_file)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["coords"] == ["R11", "R21", "R22"]
        assert [0.0, 0.0, 0.0] in doc["vertices"]

    def test_region_file_with_manifest(self, dist_file: Path, tmp_path: Path) -> None:
        out = tmp_path / "region.json"
        code = run([*QUIET, "dmc-region", "--dist", str(dist_file), "--fme-check",
                    "--out", str(out)])
        assert code == 0
        report = json.loads((tmp_path / "region.fme.json").read_text(encoding="utf-8"))
        assert report["matches"] is True
        assert verify_manifest(tmp_path / "region.manifest.json") == []

    def test_degraded_inner_bound_needs_identity_u1(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """A precondition failure is an input error."""
        factors = make_factors(**{"u1|u,s": [[[0.5, 0.5]] * 2] * 2})
        doc = {"alphabets": {v: 2 for v in ("S", "W", "X1", "U", "U1", "U2", "X2", "Y1", "Y2")},
               "factors": to_json_factors(factors)}
        path = write_json(tmp_path / "dist.json", doc)
        assert run([*QUIET, "dmc-region", "--dist", str(path), "--theorem", "2"]) == 2
        assert "theorem2_region" in capsys.readouterr().err

    def test_bad_mass_is_an_input_error(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        doc = {"alphabets": {v: 2 for v in ("S", "W", "X1", "U", "U1", "U2", "X2", "Y1", "Y2")},
               "factors": to_json_factors(make_factors(s=[0.45, 0.45]))}
        path = write_json(tmp_path / "dist.json", doc)
        assert run([*QUIET, "dmc-region", "--dist", str(path)]) == 2
        assert "mass 0.9" in capsys.readouterr().err

    def test_missing_file(self, tmp_path: Path) -> None:
        assert run([*QUIET, "dmc-region", "--dist", str(tmp_path / "none.json")]) == 2


class TestFme:
    """Projection of a system file."""

    def test_rational_projection(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        system = {
            "vars": ["x", "y"],
            "rows": [
                {"a": [1, 3], "b": "1/2"},
                {"a": [-1, 0], "b": 0},
                {"a": [0, -1], "b": 0},
            ],
        }
        path = write_json(tmp_path / "system.json", system)
        code = run([*QUIET, "fme", "--system", str(path), "--keep", "x", "--rational"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["vars"] == ["x"]
        assert "1/2" in {row["b"] for row in doc["rows"]}

    def test_unknown_keep_variable(self, tmp_path: Path) -> None:
        path = write_json(tmp_path / "system.json", {"vars": ["x"], "rows": []})
        assert run([*QUIET, "fme", "--system", str(path), "--keep", "z"]) == 2


# ================================================================
# gauss-dpc
# ================================================================


class TestGaussDpc:
    """Dirty-paper sweeps of a Gaussian channel."""

    def test_sweep_outputs(self, channel_file: Path, tmp_path: Path) -> None:
        out_dir = tmp_path / "dpc"
        code = run([
            *QUIET, "gauss-dpc", "--channel", str(channel_file), "--xi-grid", "3",
            "--gamma-grid", "2", "--verify", "lemma1", "--q-sweep",
            "--svg", str(out_dir / "slices.svg"), "--out-dir", str(out_dir),
        ])
        assert code == 0
        rows = read_rows(out_dir / "bounds.csv")
        assert tuple(rows[0]) == SWEEP_HEADER
        assert len(rows) == 1 + 3 * 2
        lemma = json.loads((out_dir / "lemma1.json").read_text(encoding="utf-8"))
        assert lemma["all_pass"] is True
        assert (out_dir / "slices.svg").read_text(encoding="utf-8").startswith("<svg")
        assert verify_manifest(out_dir / "manifest.json") == []

    def test_outputs_are_byte_stable(self, channel_file: Path, tmp_path: Path) -> None:
        for name in ("a", "b"):
            run([*QUIET, "gauss-dpc", "--channel", str(channel_file), "--xi-grid", "4",
                 "--gamma-grid", "3", "--out-dir", str(tmp_path / name)])
        for output in ("bounds.csv", "hull.json"):
            assert (tmp_path / "a" / output).read_bytes() == (tmp_path / "b" / output).read_bytes()

    def test_invalid_channel(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        path = write_json(tmp_path / "channel.json", {"form": "standard", "a": 1.0})
        assert run([*QUIET, "gauss-dpc", "--channel", str(path)]) == 2
        assert "invalid channel file" in capsys.readouterr().err


# ================================================================
# lattice
# ================================================================


class TestLattice:
    """Frontier and simulation subcommands."""

    def test_frontier_csv(self, tmp_path: Path) -> None:
        out = tmp_path / "frontier.csv"
        code = run([*QUIET, "lattice", "region", "--rho-grid", "5", "--alpha0-grid", "5",
                    "--out", str(out), "--cloud", str(tmp_path / "cloud.csv")])
        assert code == 0
        assert tuple(read_rows(out)[0]) == FRONTIER_HEADER
        assert len(read_rows(tmp_path / "cloud.csv")) == 1 + 25
        assert verify_manifest(tmp_path / "frontier.manifest.json") == []

    def test_manifest_covers_outputs_in_other_directories(self, tmp_path: Path) -> None:
        out = tmp_path / "front" / "frontier.csv"
        cloud = tmp_path / "cloud" / "frontier.csv"
        code = run([*QUIET, "lattice", "region", "--rho-grid", "3", "--alpha0-grid", "3",
                    "--out", str(out), "--cloud", str(cloud)])
        assert code == 0
        manifest_path = tmp_path / "front" / "frontier.manifest.json"
        assert sorted(load_manifest(manifest_path).outputs) == [
            "../cloud/frontier.csv", "frontier.csv"
        ]
        assert verify_manifest(manifest_path) == []
        cloud.write_text("tampered\n", encoding="utf-8")
        assert verify_manifest(manifest_path) == ["../cloud/frontier.csv"]

    def test_stats_flag_selects_checks(self, capsys: pytest.CaptureFixture[str]) -> None:
        code = run([*QUIET, "lattice", "sim", "--samples", "20000", "--stats", "var_u,var_u2"])
        assert code == 0
        assert sorted(json.loads(capsys.readouterr().out)["checks"]) == ["var_u", "var_u2"]

    def test_unknown_stats_flag(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert run([*QUIET, "lattice", "sim", "--samples", "20000", "--stats", "nope"]) == 2
        assert "unknown statistics" in capsys.readouterr().err

    def test_simulation_is_reproducible(self, tmp_path: Path) -> None:
        for name, workers in (("one.json", "1"), ("two.json", "2")):
            code = run([*QUIET, "--seed", "5", "lattice", "sim", "--samples", "20000",
                        "--workers", workers, "--toy", "4", "--out", str(tmp_path / name)])
            assert code == 0
        assert (tmp_path / "one.json").read_bytes() == (tmp_path / "two.json").read_bytes()
        stats = json.loads((tmp_path / "one.json").read_text(encoding="utf-8"))
        assert stats["seed"] == 5
        assert len(stats["toy_decoding"]) == 2

    def test_too_few_samples(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert run([*QUIET, "lattice", "sim", "--samples", "100"]) == 2
        assert "samples must be" in capsys.readouterr().err

    def test_config_file(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        cfg = write_json(tmp_path / "cfg.json", {"a": 4.0, "samples": 20000})
        assert run([*QUIET, "lattice", "sim", "--config", str(cfg), "--decoder", "1"]) == 0
        assert json.loads(capsys.readouterr().out)["decoder"] == 1


# ================================================================
# verify
# ================================================================


class TestVerify:
    """Acceptance suites from the command line."""

    def test_formula_suite(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert run([*QUIET, "verify", "lattice-formulas"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["suites"][0]["name"] == "lattice-formulas"

    def test_caller_unit_is_restored(self, capsys: pytest.CaptureFixture[str]) -> None:
        use_natural_log(True)
        assert run([*QUIET, "verify", "lattice-formulas"]) == 0
        assert log_base() == math.e
        use_natural_log(False)
        run([*QUIET, "--nats", "verify", "lattice-formulas"])
        assert log_base() == 2.0

    def test_unknown_suite(self) -> None:
        with pytest.raises(SystemExit) as exc_info:
            run(["verify", "everything"])
        assert exc_info.value.code == 2
