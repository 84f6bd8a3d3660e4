import pytest
from pydantic import ValidationError

from config import Settings, default_diff_config, default_quadrature_config, get_settings, reset_settings


def test_defaults():
    settings = get_settings()
    assert settings.app_name == "gfrac"
    assert settings.quad_tol == 1e-10
    assert settings.max_order == 3.0
    assert settings.workers == 1


def test_field_names():
    assert set(Settings.model_fields) == {
        "app_name",
        "app_version",
        "log_level",
        "quad_tol",
        "quad_abs_tol",
        "quad_max_levels",
        "quad_base_nodes",
        "diff_initial_step",
        "diff_richardson_levels",
        "max_order",
        "workers",
    }


def test_settings_are_cached_until_reset(monkeypatch):
    first = get_settings()
    monkeypatch.setenv("GFRAC_WORKERS", "4")
    assert get_settings() is first
    reset_settings()
    assert get_settings().workers == 4


def test_environment_feeds_numerical_configs(monkeypatch):
    monkeypatch.setenv("GFRAC_QUAD_TOL", "1e-6")
    monkeypatch.setenv("GFRAC_QUAD_MAX_LEVELS", "5")
    monkeypatch.setenv("GFRAC_DIFF_INITIAL_STEP", "0.05")
    reset_settings()
    qcfg = default_quadrature_config()
    assert (qcfg.rel_tol, qcfg.max_levels) == (1e-6, 5)
    assert default_diff_config().initial_step == 0.05


def test_dotenv_file_is_read(tmp_path):
    (tmp_path / ".env").write_text("GFRAC_LOG_LEVEL=debug\nGFRAC_MAX_ORDER=2\n", encoding="utf-8")
    settings = get_settings()
    assert settings.log_level == "DEBUG"
    assert settings.max_order == 2.0


@pytest.mark.parametrize(
    "name, value",
    [
        ("GFRAC_QUAD_TOL", "0"),
        ("GFRAC_QUAD_BASE_NODES", "0"),
        ("GFRAC_WORKERS", "-1"),
        ("GFRAC_DIFF_RICHARDSON_LEVELS", "1"),
        ("GFRAC_LOG_LEVEL", "chatty"),
    ],
)
def test_invalid_values_are_rejected(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ValidationError):
        get_settings()
