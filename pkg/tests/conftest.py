"""Shared fixtures: isolated settings and quicker numerical configurations."""

import pytest

from config import reset_settings
from models import DiffConfig, QuadratureConfig


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Every test sees default settings, unaffected by the caller's environment or .env."""
    for name in (
        "GFRAC_LOG_LEVEL",
        "GFRAC_QUAD_TOL",
        "GFRAC_QUAD_ABS_TOL",
        "GFRAC_QUAD_MAX_LEVELS",
        "GFRAC_QUAD_BASE_NODES",
        "GFRAC_DIFF_INITIAL_STEP",
        "GFRAC_DIFF_RICHARDSON_LEVELS",
        "GFRAC_MAX_ORDER",
        "GFRAC_WORKERS",
    ):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def qcfg() -> QuadratureConfig:
    return QuadratureConfig(rel_tol=1e-11, abs_tol=1e-13, max_levels=12, base_nodes=32)


@pytest.fixture
def loose_qcfg() -> QuadratureConfig:
    """For compositions, where the inner operator is itself a quadrature."""
    return QuadratureConfig(rel_tol=1e-10, abs_tol=1e-12, max_levels=10, base_nodes=24)


@pytest.fixture
def dcfg() -> DiffConfig:
    return DiffConfig(initial_step=1e-2, richardson_levels=4)
