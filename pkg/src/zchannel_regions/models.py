"""Pydantic V2 models for every file the toolkit reads or writes.

File models use strict mode and are validated from JSON text, so enum and
literal fields accept their string values. Numeric arrays stay plain nested
lists here; numpy conversion happens in the owning module.
"""

from __future__ import annotations

import math
from enum import StrEnum
from typing import Annotated, Any, Literal

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator, model_validator

# ============================================================
# Enums
# ============================================================


class Variable(StrEnum):
    """Random variables of the Z channel, in tensor axis order."""

    S = "S"
    W = "W"
    X1 = "X1"
    U = "U"
    U1 = "U1"
    U2 = "U2"
    X2 = "X2"
    Y1 = "Y1"
    Y2 = "Y2"


class Relation(StrEnum):
    """Row relation of a linear system."""

    LE = "<="
    EQ = "="


class ArithmeticMode(StrEnum):
    """Number field used by a linear system."""

    FLOAT = "float"
    RATIONAL = "rational"


class Theorem(StrEnum):
    """Region evaluators reachable from ``dmc-region --theorem``."""

    THEOREM1 = "1"
    THEOREM2 = "2"
    THEOREM3 = "3"


# ============================================================
# Joint distribution file
# ============================================================


class DistributionFile(BaseModel):
    """JointDistribution JSON: alphabet sizes plus the factored conditionals.

    Factor keys and axis orders::

        "s"              (S)
        "w|s"            (S, W)
        "x1|w,s"         (W, S, X1)
        "u|s"            (S, U)
        "u1|u,s"         (U, S, U1)
        "u2|u,s"         (U, S, U2)
        "x2|u,u1,u2,s"   (U, U1, U2, S, X2)
        "y1,y2|x1,x2,s"  (X1, X2, S, Y1, Y2)
    """

    model_config = ConfigDict(strict=True, extra="forbid")

    alphabets: dict[str, int]
    factors: dict[str, Any]
    tolerance: float | None = Field(
        default=None, description="Per-distribution validation tolerance override"
    )

    @field_validator("alphabets")
    @classmethod
    def _known_variables(cls, value: dict[str, int]) -> dict[str, int]:
        names = {v.value for v in Variable}
        unknown = sorted(set(value) - names)
        if unknown:
            raise ValueError(f"unknown variables {unknown}")
        missing = sorted(names - set(value))
        if missing:
            raise ValueError(f"missing alphabet sizes for {missing}")
        for name, size in value.items():
            if not 1 <= size <= 4:
                raise ValueError(f"alphabet size of {name} must be in [1, 4], got {size}")
        return value


# ============================================================
# Linear system file
# ============================================================


class SystemRow(BaseModel):
    """One row ``a . x (<=|=) b``; rational entries may be strings like "3/7"."""

    model_config = ConfigDict(strict=True, extra="forbid")

    a: list[int | float | str]
    rel: Relation = Relation.LE
    b: int | float | str
    label: str = ""


class LinearSystemFile(BaseModel):
    """LinearSystem JSON consumed and produced by ``fme``."""

    model_config = ConfigDict(strict=True, extra="forbid")

    vars: list[str]
    rows: list[SystemRow]
    mode: ArithmeticMode = ArithmeticMode.FLOAT

    @model_validator(mode="after")
    def _row_widths(self) -> LinearSystemFile:
        if len(set(self.vars)) != len(self.vars):
            raise ValueError("duplicate variable names")
        for i, row in enumerate(self.rows):
            if len(row.a) != len(self.vars):
                raise ValueError(
                    f"row {i} has {len(row.a)} coefficients for {len(self.vars)} variables"
                )
        return self


# ============================================================
# Gaussian channel file
# ============================================================


class RawChannelSpec(BaseModel):
    """Gaussian Z channel before scaling to unit noise."""

    model_config = ConfigDict(strict=True, extra="forbid")

    form: Literal["raw"] = "raw"
    a11: float
    a21: float
    a22: float
    N1: float = Field(gt=0)
    N2: float = Field(gt=0)
    Q: float = Field(ge=0)
    P1star: float = Field(ge=0)
    P2star: float = Field(ge=0)


class StandardChannelSpec(BaseModel):
    """Gaussian Z channel in standard form (unit noises, unit direct gains)."""

    model_config = ConfigDict(strict=True, extra="forbid")

    form: Literal["standard"] = "standard"
    a: float
    a1: float
    a2: float
    P1: float = Field(ge=0)
    P2: float = Field(ge=0)
    Q: float = Field(ge=0)


ChannelSpec = Annotated[RawChannelSpec | StandardChannelSpec, Field(discriminator="form")]

# Validates a channel file of either form from JSON text
CHANNEL_ADAPTER: TypeAdapter[RawChannelSpec | StandardChannelSpec] = TypeAdapter(ChannelSpec)


# ============================================================
# Lattice configuration
# ============================================================


class LatticeConfig(BaseModel):
    """Scalar-lattice scheme parameters.

    Second moments are sigma0^2 = rho*P2, sigma1^2 = P1, sigma2^2 = (1-rho)*P2,
    and each scalar lattice step is sqrt(12 * sigma^2). Omitted scalings are
    filled with their closed-form optima by ``lattice.formulas.resolve_alphas``.
    """

    model_config = ConfigDict(strict=True, extra="forbid", frozen=True)

    P1: float = Field(default=1.0, ge=0)
    P2: float = Field(default=2.0, ge=0)
    N1: float = Field(default=1.0, gt=0)
    N2: float = Field(default=1.0, gt=0)
    Q: float = Field(default=1.0, ge=0)
    a: float = 10.0
    rho: float = Field(default=0.5, ge=0, le=1)
    alpha0: float | None = Field(default=None, ge=0, le=1)
    alpha1: float | None = Field(default=None, ge=0, le=1)
    alpha2: float | None = Field(default=None, ge=0, le=1)
    samples: int = Field(default=1_000_000, gt=0)
    seed: int = Field(default=0, ge=0)
    stats: list[str] = Field(default_factory=list, description="Statistic selector; empty = all")

    @field_validator("P1", "P2", "N1", "N2", "Q", "a")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @property
    def rho_bar(self) -> float:
        return 1.0 - self.rho

    @property
    def second_moments(self) -> tuple[float, float, float]:
        return (self.rho * self.P2, self.P1, self.rho_bar * self.P2)

    @property
    def steps(self) -> tuple[float, float, float]:
        s0, s1, s2 = self.second_moments
        return (math.sqrt(12.0 * s0), math.sqrt(12.0 * s1), math.sqrt(12.0 * s2))


# ============================================================
# Region document and run manifest
# ============================================================


class HalfspaceRecord(BaseModel):
    model_config = ConfigDict(strict=True, extra="forbid")

    a: list[float]
    b: float
    label: str


class RegionDocument(BaseModel):
    """Region output JSON."""

    model_config = ConfigDict(strict=True, extra="forbid")

    coords: list[str]
    halfspaces: list[HalfspaceRecord]
    vertices: list[list[float]]


class RunManifest(BaseModel):
    """Reproducibility record written next to every CLI output."""

    model_config = ConfigDict(strict=True, extra="forbid")

    tool_version: str
    subcommand: str
    config: dict[str, Any]
    seeds: list[int] = Field(default_factory=list)
    duration_seconds: float
    outputs: dict[str, str] = Field(
        default_factory=dict, description="Output file name -> sha256 hex digest"
    )
