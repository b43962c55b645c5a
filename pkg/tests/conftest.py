"""Shared test fixtures for the zchannel-regions test suite."""

from __future__ import annotations

import json
from collections.abc import Iterator
from pathlib import Path
from typing import Any

import numpy as np
import pytest
from numpy.typing import NDArray

from zchannel_regions.config import PinnedSettings, pinned_settings
from zchannel_regions.gauss.channel import GaussianZChannel
from zchannel_regions.models import LatticeConfig
from zchannel_regions.prob.core import (
    JointDistribution,
    random_joint_distribution,
    set_clamp_tolerance,
    use_natural_log,
)

# ================================================================
# Settings and Units
# ================================================================


@pytest.fixture(autouse=True)
def bits() -> Iterator[None]:
    """Every test runs in bits with the default clamp, whatever the environment says."""
    use_natural_log(False)
    set_clamp_tolerance(1e-12)
    yield
    use_natural_log(False)
    set_clamp_tolerance(1e-12)


@pytest.fixture
def settings() -> PinnedSettings:
    """Default numerical settings, isolated from ZCHAN_* variables."""
    return pinned_settings(sim_chunk_size=16384)


# ================================================================
# Finite-Alphabet Distributions
# ================================================================


def _one_hot(shape: tuple[int, ...], pick: Any) -> NDArray[np.float64]:
    """Deterministic map: last axis is one-hot at ``pick(*parents)``."""
    out = np.zeros(shape)
    for parents in np.ndindex(*shape[:-1]):
        out[(*parents, pick(*parents))] = 1.0
    return out


def make_factors(**overrides: Any) -> dict[str, Any]:
    """Binary noiseless example.

    S, W, U, U2 uniform and independent; X1 = W; U1 = U; X2 = U xor U2;
    Y1 = X1 and Y2 = X2.
    """
    half = np.full((2, 2), 0.5)
    channel = np.zeros((2, 2, 2, 2, 2))
    for x1 in range(2):
        for x2 in range(2):
            for s in range(2):
                channel[x1, x2, s, x1, x2] = 1.0
    factors: dict[str, Any] = {
        "s": [0.5, 0.5],
        "w|s": half,
        "x1|w,s": _one_hot((2, 2, 2), lambda w, s: w),
        "u|s": half,
        "u1|u,s": _one_hot((2, 2, 2), lambda u, s: u),
        "u2|u,s": np.full((2, 2, 2), 0.5),
        "x2|u,u1,u2,s": _one_hot((2, 2, 2, 2, 2), lambda u, u1, u2, s: u ^ u2),
        "y1,y2|x1,x2,s": channel,
    }
    factors.update(overrides)
    return factors


def to_json_factors(factors: dict[str, Any]) -> dict[str, Any]:
    return {k: np.asarray(v, dtype=float).tolist() for k, v in factors.items()}


@pytest.fixture
def noiseless_dist() -> JointDistribution:
    """The binary noiseless example as a validated distribution."""
    return JointDistribution.from_factors(make_factors())


@pytest.fixture
def random_dist() -> JointDistribution:
    """A seeded random binary distribution."""
    return random_joint_distribution(7)


@pytest.fixture
def dist_file(tmp_path: Path) -> Path:
    """JointDistribution JSON of the noiseless example."""
    path = tmp_path / "dist.json"
    doc = {"alphabets": {v: 2 for v in ("S", "W", "X1", "U", "U1", "U2", "X2", "Y1", "Y2")}}
    doc["factors"] = to_json_factors(make_factors())
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


# ================================================================
# Gaussian Channels and Lattice Configurations
# ================================================================


@pytest.fixture
def unit_channel() -> GaussianZChannel:
    """P1 = P2 = 1, a = a1 = a2 = 1, Q = 1."""
    return GaussianZChannel(a=1.0, a1=1.0, a2=1.0, P1=1.0, P2=1.0, Q=1.0)


@pytest.fixture
def reference_channel() -> GaussianZChannel:
    """P1 = 2, P2 = 3, a = a1 = a2 = 1, Q = 1."""
    return GaussianZChannel(a=1.0, a1=1.0, a2=1.0, P1=2.0, P2=3.0, Q=1.0)


@pytest.fixture
def channel_file(tmp_path: Path) -> Path:
    """Standard-form channel JSON."""
    path = tmp_path / "channel.json"
    spec = {"form": "standard", "a": 1.0, "a1": 1.0, "a2": 1.0, "P1": 1.0, "P2": 1.0, "Q": 1.0}
    path.write_text(json.dumps(spec), encoding="utf-8")
    return path


@pytest.fixture
def lattice_cfg() -> LatticeConfig:
    """Default configuration with a test-sized sample count."""
    return LatticeConfig(samples=200_000)


def write_json(path: Path, payload: Any) -> Path:
    """Write a JSON test input."""
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path
