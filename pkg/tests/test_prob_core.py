"""Tests for joint distributions and finite-alphabet information measures."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from tests.conftest import make_factors
from zchannel_regions.errors import DistributionError, VariableError
from zchannel_regions.prob.core import (
    JointDistribution,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    load_distribution,
    mutual_information,
    point_mass_distribution,
    random_joint_distribution,
    clamp_negative,
    default_clamp_tolerance,
    save_distribution,
    set_clamp_tolerance,
    use_natural_log,
)

# ================================================================
# Construction and Validation
# ================================================================


class TestJointDistribution:
    """Tensor construction from factors and invariant checks."""

    def test_factors_materialize_to_unit_mass(self, noiseless_dist: JointDistribution) -> None:
        """The product of the eight conditionals is a probability tensor."""
        assert noiseless_dist.probs.sum() == pytest.approx(1.0)
        assert noiseless_dist.alphabet_sizes["Y2"] == 2
        assert noiseless_dist.factorization_residual() < 1e-12

    def test_mass_error_names_the_total(self) -> None:
        """A tensor summing to 0.9 is rejected with the offending mass."""
        with pytest.raises(DistributionError) as exc_info:
            JointDistribution.from_factors(make_factors(s=[0.45, 0.45]))
        assert "mass 0.9" in str(exc_info.value)

    def test_negative_entries_rejected(self) -> None:
        with pytest.raises(DistributionError):
            JointDistribution.from_factors(make_factors(s=[1.5, -0.5]))

    def test_random_encoder_map_rejected(self) -> None:
        """X1 must be a deterministic function of (W, S)."""
        with pytest.raises(DistributionError, match="determinism"):
            JointDistribution.from_factors(make_factors(**{"x1|w,s": np.full((2, 2, 2), 0.5)}))

    def test_missing_factor_rejected(self) -> None:
        factors = make_factors()
        del factors["u2|u,s"]
        with pytest.raises(DistributionError, match="missing"):
            JointDistribution.from_factors(factors)

    def test_conditionals_round_trip(self, noiseless_dist: JointDistribution) -> None:
        """Recovered conditionals equal the ones the tensor was built from."""
        expected = make_factors()
        for key in ("w|s", "x1|w,s", "x2|u,u1,u2,s"):
            np.testing.assert_allclose(noiseless_dist.conditional(key), expected[key])

    def test_alphabet_above_four_rejected(self) -> None:
        with pytest.raises(DistributionError, match="alphabet size"):
            random_joint_distribution(0, {"S": 5})

    def test_unknown_variable_rejected(self) -> None:
        with pytest.raises(VariableError):
            random_joint_distribution(0, {"V": 2})

    def test_random_distribution_is_valid(self) -> None:
        """Random draws satisfy every structural invariant."""
        dist = random_joint_distribution(3, {"S": 3, "U": 3, "Y1": 4})
        dist.validate()
        assert dist.size("Y1") == 4

    def test_identity_u1_forces_equal_alphabets(self) -> None:
        dist = random_joint_distribution(5, {"U": 3}, identity_u1=True)
        assert dist.size("U1") == 3
        assert conditional_entropy(dist, "U1", "U") == pytest.approx(0.0, abs=1e-12)


# ================================================================
# Information Measures
# ================================================================


class TestInformationMeasures:
    """Entropies and (conditional) mutual informations."""

    def test_noiseless_example_values(self, noiseless_dist: JointDistribution) -> None:
        """Hand-computed values of the noiseless binary example."""
        assert entropy(noiseless_dist, "S") == pytest.approx(1.0)
        assert mutual_information(noiseless_dist, "W", "Y1") == pytest.approx(1.0)
        assert mutual_information(noiseless_dist, "U", "S") == pytest.approx(0.0, abs=1e-12)
        assert mutual_information(noiseless_dist, ["U", "U2"], "Y2") == pytest.approx(1.0)
        assert conditional_mutual_information(
            noiseless_dist, "U2", "Y2", "U"
        ) == pytest.approx(1.0)

    def test_nats_switch(self, noiseless_dist: JointDistribution) -> None:
        """Switching the unit rescales by ln 2."""
        use_natural_log(True)
        assert entropy(noiseless_dist, "S") == pytest.approx(math.log(2.0))

    def test_chain_rule(self, random_dist: JointDistribution) -> None:
        """I(A; BC) = I(A; B) + I(A; C | B)."""
        lhs = mutual_information(random_dist, "U", ["Y1", "S"])
        rhs = mutual_information(random_dist, "U", "Y1") + conditional_mutual_information(
            random_dist, "U", "S", "Y1"
        )
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_symmetry_and_nonnegativity(self, random_dist: JointDistribution) -> None:
        ab = conditional_mutual_information(random_dist, "W", "Y2", "S")
        ba = conditional_mutual_information(random_dist, "Y2", "W", "S")
        assert ab == pytest.approx(ba, abs=1e-12)
        assert ab >= 0.0

    def test_point_mass_has_no_information(self) -> None:
        dist = point_mass_distribution()
        assert entropy(dist, ["S", "W", "Y1"]) == 0.0
        assert mutual_information(dist, "U", "Y2") == 0.0

    def test_overlapping_sets_rejected(self, random_dist: JointDistribution) -> None:
        with pytest.raises(VariableError, match="overlap"):
            conditional_mutual_information(random_dist, ["U", "S"], "Y1", "S")

    def test_unknown_variable_rejected(self, random_dist: JointDistribution) -> None:
        with pytest.raises(VariableError):
            mutual_information(random_dist, "U", "Y3")

    def test_empty_set_rejected(self, random_dist: JointDistribution) -> None:
        with pytest.raises(VariableError):
            mutual_information(random_dist, [], "Y1")


class TestClamp:
    """Small negative information values are reported as 0."""

    def test_override_widens_the_clamp(self) -> None:
        assert clamp_negative(-1e-6) == -1e-6
        previous = set_clamp_tolerance(1e-3)
        assert previous == 1e-12
        assert clamp_negative(-1e-6) == 0.0
        assert clamp_negative(-1e-2) == -1e-2

    def test_default_comes_from_settings(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("ZCHAN_MI_CLAMP_TOLERANCE", "0.25")
        set_clamp_tolerance(None)
        assert default_clamp_tolerance() == 0.25
        assert clamp_negative(-0.1) == 0.0

    def test_explicit_tolerance_wins(self, noiseless_dist: JointDistribution) -> None:
        set_clamp_tolerance(1e-3)
        assert clamp_negative(-1e-6, 0.0) == -1e-6
        value = conditional_mutual_information(noiseless_dist, "W", "Y1", clamp_tolerance=0.0)
        assert value == pytest.approx(1.0)


# ================================================================
# File Format
# ================================================================


class TestDistributionFiles:
    """JointDistribution JSON loading and saving."""

    def test_load_valid_file(self, dist_file: Path) -> None:
        dist = load_distribution(dist_file)
        assert mutual_information(dist, "W", "Y1") == pytest.approx(1.0)

    def test_save_then_load_preserves_tensor(
        self, random_dist: JointDistribution, tmp_path: Path
    ) -> None:
        path = tmp_path / "saved.json"
        save_distribution(random_dist, path)
        np.testing.assert_allclose(load_distribution(path).probs, random_dist.probs, atol=1e-12)

    def test_malformed_file_is_a_distribution_error(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.json"
        path.write_text('{"alphabets": {"S": 2}}', encoding="utf-8")
        with pytest.raises(DistributionError, match="file format"):
            load_distribution(path)
