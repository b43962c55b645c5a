"""Tests for Pydantic V2 file and configuration models."""

from __future__ import annotations

import json

import pytest
from pydantic import ValidationError

from zchannel_regions.models import (
    CHANNEL_ADAPTER,
    DistributionFile,
    LatticeConfig,
    RawChannelSpec,
    StandardChannelSpec,
)


class TestDistributionFile:
    """JointDistribution JSON validation."""

    def test_all_nine_alphabets_required(self) -> None:
        with pytest.raises(ValidationError, match="missing alphabet sizes"):
            DistributionFile.model_validate_json('{"alphabets": {"S": 2}, "factors": {}}')

    def test_unknown_variable(self) -> None:
        sizes = {v: 2 for v in ("S", "W", "X1", "U", "U1", "U2", "X2", "Y1", "Y2", "V")}
        doc = json.dumps({"alphabets": sizes, "factors": {}})
        with pytest.raises(ValidationError, match="unknown variables"):
            DistributionFile.model_validate_json(doc)

    def test_alphabet_size_limit(self) -> None:
        sizes = {v: 2 for v in ("S", "W", "X1", "U", "U1", "U2", "X2", "Y1", "Y2")}
        sizes["Y1"] = 5
        with pytest.raises(ValidationError):
            DistributionFile.model_validate_json(json.dumps({"alphabets": sizes, "factors": {}}))

    def test_extra_fields_forbidden(self) -> None:
        with pytest.raises(ValidationError):
            DistributionFile.model_validate_json('{"alphabets": {}, "factors": {}, "note": 1}')


class TestChannelSpecs:
    """The ``form`` field selects the channel model."""

    def test_standard_form(self) -> None:
        spec = CHANNEL_ADAPTER.validate_json(
            '{"form": "standard", "a": 1.0, "a1": 1.0, "a2": 1.0, "P1": 1, "P2": 1, "Q": 0}'
        )
        assert isinstance(spec, StandardChannelSpec)

    def test_raw_form(self) -> None:
        raw = {"form": "raw", "a11": 1.0, "a21": 0.5, "a22": 1.0, "N1": 1.0, "N2": 2.0,
               "Q": 1.0, "P1star": 1.0, "P2star": 1.0}
        assert isinstance(CHANNEL_ADAPTER.validate_json(json.dumps(raw)), RawChannelSpec)

    def test_unknown_form(self) -> None:
        with pytest.raises(ValidationError):
            CHANNEL_ADAPTER.validate_json('{"form": "mimo", "a": 1.0}')

    def test_negative_interference_power(self) -> None:
        with pytest.raises(ValidationError):
            StandardChannelSpec(a=1.0, a1=1.0, a2=1.0, P1=1.0, P2=1.0, Q=-1.0)


class TestLatticeConfig:
    """Scalar-lattice configuration."""

    def test_defaults(self) -> None:
        cfg = LatticeConfig()
        assert (cfg.P1, cfg.P2, cfg.a, cfg.rho) == (1.0, 2.0, 10.0, 0.5)
        assert cfg.alpha0 is None
        assert cfg.second_moments == (1.0, 1.0, 1.0)

    def test_rho_range(self) -> None:
        with pytest.raises(ValidationError):
            LatticeConfig(rho=1.5)

    def test_noise_must_be_positive(self) -> None:
        with pytest.raises(ValidationError):
            LatticeConfig(N1=0.0)

    def test_frozen(self) -> None:
        cfg = LatticeConfig()
        with pytest.raises(ValidationError):
            cfg.rho = 0.2  # type: ignore[misc]

    def test_non_finite_gain(self) -> None:
        with pytest.raises(ValidationError):
            LatticeConfig(a=float("inf"))
