"""Configuration management using Pydantic Settings.

Library defaults are loaded from environment variables with the ZCHAN_ prefix.
The command-line front end never reads the environment: it builds
``PinnedSettings`` from its flags so that outputs depend on flags alone.
"""

from __future__ import annotations

from typing import Any

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict


class ToolkitSettings(BaseSettings):
    """Numerical defaults shared by every evaluator.

    All fields prefixed with ZCHAN_ in the environment.
    Example: ZCHAN_SIM_WORKERS -> sim_workers
    """

    model_config = SettingsConfigDict(
        env_prefix="ZCHAN_",
        case_sensitive=False,
        extra="ignore",
    )

    # --- Finite-alphabet probability ---
    validation_tolerance: float = Field(
        default=1e-9,
        description="Tolerance for mass, factorization residual and determinism checks",
    )
    mi_clamp_tolerance: float = Field(
        default=1e-12,
        description="Mutual informations in (-tol, 0) are reported as 0",
    )
    use_natural_log: bool = Field(
        default=False,
        description="Report information in nats instead of bits",
    )

    # --- Gaussian models ---
    gaussian_jitter: float = Field(
        default=1e-12,
        description="Diagonal jitter added before log-determinants",
    )
    psd_tolerance: float = Field(
        default=1e-10,
        description="Most negative eigenvalue still repaired to 0",
    )

    # --- Regions and projection ---
    region_tolerance: float = Field(
        default=1e-9,
        description="Vertex deduplication and containment tolerance",
    )
    rational_limit_denominator: int = Field(
        default=10**12,
        description="Denominator bound when rationalizing float right-hand sides",
    )

    # --- Sweeps ---
    xi_points: int = Field(default=101, description="Default power-split grid size")
    gamma_points: int = Field(default=41, description="Default U2 coefficient grid size")
    gamma_min: float = Field(default=-2.0, description="Lower end of the gamma grid")
    gamma_max: float = Field(default=2.0, description="Upper end of the gamma grid")

    # --- Monte Carlo ---
    sim_chunk_size: int = Field(
        default=65536,
        description="Samples per chunk (multiple of 4, fixed for reproducibility)",
    )
    sim_workers: int = Field(default=1, description="Worker threads for chunked simulation")

    # --- Logging ---
    log_level: str = Field(default="INFO", description="Logging level")
    log_format: str = Field(default="text", description="'text' or 'json'")

    @field_validator("sim_chunk_size")
    @classmethod
    def _chunk_multiple_of_four(cls, value: int) -> int:
        if value <= 0 or value % 4:
            raise ValueError("sim_chunk_size must be a positive multiple of 4")
        return value

    @field_validator("sim_workers")
    @classmethod
    def _positive_workers(cls, value: int) -> int:
        if value < 1:
            raise ValueError("sim_workers must be >= 1")
        return value


class PinnedSettings(ToolkitSettings):
    """Settings built from explicit arguments only (no environment, no .env)."""

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings,)


def load_settings(**overrides: Any) -> ToolkitSettings:
    """Load settings from the environment, with keyword overrides on top."""
    return ToolkitSettings(**overrides)


def pinned_settings(**overrides: Any) -> PinnedSettings:
    """Settings for the CLI: defaults plus flag values, environment ignored."""
    return PinnedSettings(**overrides)
