"""Tests for the defaults catalog and environment-driven settings."""

from __future__ import annotations

import pytest

from starprod.catalog import CATALOG_ENV_VAR, catalog_path, load_defaults
from starprod.errors import ConfigError
from starprod.settings import THREADS_ENV_VAR, get_settings, map_ordered, thread_count


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    monkeypatch.delenv(CATALOG_ENV_VAR, raising=False)
    monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
    get_settings.cache_clear()
    thread_count.cache_clear()
    yield
    get_settings.cache_clear()
    thread_count.cache_clear()


def _write_catalog(tmp_path):
    path = tmp_path / "custom.yaml"
    path.write_text(
        "tolerances:\n"
        "  assoc: 1.0e-9\n"
        "cli:\n"
        "  checks:\n"
        "    symbol: 0.5\n",
        encoding="utf-8",
    )
    return path


def test_packaged_defaults():
    settings = get_settings()
    assert settings.assoc_tolerance == pytest.approx(1e-12)
    assert settings.kernel_assoc_tolerance == pytest.approx(1e-10)
    assert settings.delta_width == pytest.approx(0.2)
    assert settings.quadrature_tuples == 4_000_000
    assert settings.grids["weyl"] == {"lo": -6.0, "hi": 6.0, "n": 64}
    assert settings.check_tolerance("star-check") == pytest.approx(1e-5)
    assert get_settings() is settings


def test_unknown_command_has_no_tolerance():
    with pytest.raises(ConfigError) as excinfo:
        get_settings().check_tolerance("teleport")
    assert excinfo.value.field == "tolerance"


def test_catalog_env_override(tmp_path, monkeypatch):
    path = _write_catalog(tmp_path)
    monkeypatch.setenv(CATALOG_ENV_VAR, str(path))
    assert catalog_path() == path
    settings = get_settings()
    assert settings.assoc_tolerance == pytest.approx(1e-9)
    assert settings.check_tolerance("symbol") == pytest.approx(0.5)
    # sections missing from the override fall back to built-in values
    assert settings.kernel_tuples == 2_000_000
    assert settings.grids == {}


def test_env_pointing_nowhere_uses_packaged_copy(tmp_path, monkeypatch):
    monkeypatch.setenv(CATALOG_ENV_VAR, str(tmp_path / "absent.yaml"))
    assert catalog_path().name == "defaults.yaml"


def test_explicit_override(tmp_path):
    path = _write_catalog(tmp_path)
    assert load_defaults(str(path))["tolerances"]["assoc"] == pytest.approx(1e-9)
    assert load_defaults(str(path))["budgets"] == {}
    with pytest.raises(FileNotFoundError):
        catalog_path(str(tmp_path / "missing.yaml"))


def test_catalog_must_be_a_mapping(tmp_path):
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_defaults(str(path))


# ----------------------- threads -----------------------

def test_thread_count_defaults_to_serial():
    assert thread_count() == 1


@pytest.mark.parametrize("raw", ["0", "-2", "many"])
def test_bad_thread_count(monkeypatch, raw):
    monkeypatch.setenv(THREADS_ENV_VAR, raw)
    with pytest.raises(ConfigError) as excinfo:
        thread_count()
    assert excinfo.value.field == THREADS_ENV_VAR


def test_map_ordered_keeps_input_order(monkeypatch):
    monkeypatch.setenv(THREADS_ENV_VAR, "3")
    assert thread_count() == 3
    assert map_ordered(lambda x: x * x, range(20)) == [x * x for x in range(20)]
    assert map_ordered(str, []) == []
