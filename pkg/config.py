"""
Configuration module for gfrac.

Uses Pydantic Settings to validate and load environment variables.
All configuration values are validated when settings are first requested.
Variables use the ``GFRAC_`` prefix, e.g. ``GFRAC_QUAD_TOL=1e-8``.
"""

from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import field_validator
from typing import Optional

from models import DiffConfig, QuadratureConfig


class Settings(BaseSettings):
    """
    Application settings loaded from environment variables (or a ``.env`` file).

    Invalid values raise a ValidationError when the settings are built.
    """

    model_config = SettingsConfigDict(
        env_prefix="GFRAC_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    # Application
    app_name: str = "gfrac"
    app_version: str = "1.0.0"
    log_level: str = "INFO"

    # Quadrature defaults (GFRAC_QUAD_TOL is the quick-run knob)
    quad_tol: float = 1e-10
    quad_abs_tol: float = 1e-12
    quad_max_levels: int = 12
    quad_base_nodes: int = 32

    # Finite differences in the delta chart
    diff_initial_step: float = 1e-2
    diff_richardson_levels: int = 4

    # Largest accepted order; derivatives use n = ceil(alpha) differences
    max_order: float = 3.0

    # Thread pool size for sweeps and reports (1 = sequential)
    workers: int = 1

    @field_validator("quad_tol", "quad_abs_tol", "diff_initial_step", "max_order")
    @classmethod
    def validate_positive(cls, v: float) -> float:
        """Tolerances, steps and the order cap must be strictly positive."""
        if not v > 0:
            raise ValueError("must be > 0")
        return v

    @field_validator("quad_max_levels", "quad_base_nodes", "workers")
    @classmethod
    def validate_at_least_one(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @field_validator("diff_richardson_levels")
    @classmethod
    def validate_richardson_levels(cls, v: int) -> int:
        # The error estimate compares two tableau rows
        if v < 2:
            raise ValueError("must be >= 2")
        return v

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = v.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {v!r}")
        return level


# Global settings instance, built on first use
settings: Optional[Settings] = None


def get_settings() -> Settings:
    """
    Get or create the global settings instance.

    Returns:
        Settings: The validated settings instance

    Raises:
        ValidationError: If an environment variable holds an invalid value
    """
    global settings
    if settings is None:
        settings = Settings()
    return settings


def reset_settings() -> None:
    """Forget the cached settings so the next get_settings() re-reads the environment."""
    global settings
    settings = None


def default_quadrature_config() -> QuadratureConfig:
    """Quadrature configuration derived from the current settings."""
    s = get_settings()
    return QuadratureConfig(
        rel_tol=s.quad_tol,
        abs_tol=s.quad_abs_tol,
        max_levels=s.quad_max_levels,
        base_nodes=s.quad_base_nodes,
    )


def default_diff_config() -> DiffConfig:
    """Finite-difference configuration derived from the current settings."""
    s = get_settings()
    return DiffConfig(
        initial_step=s.diff_initial_step,
        richardson_levels=s.diff_richardson_levels,
    )
