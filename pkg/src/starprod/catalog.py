"""Numerical defaults catalog.

This module is the single source of truth for ``defaults.yaml``: tolerances,
quadrature budgets, tomography padding, evolution limits and default grids.
It is bundled as package data so the library, the CLI and the test-suite all
read an identical copy.

Resolution order (so local overrides still work):
  1. An explicit ``override`` path passed by the caller.
  2. ``STARPROD_CATALOG`` env var, if set and the file exists.
  3. The packaged ``catalogs/defaults.yaml``.

Consumers should go through ``starprod.settings.get_settings`` rather than
reading the YAML themselves; this module only locates and parses it.
"""
from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Dict, Optional

try:
    from importlib.resources import files as _ir_files  # Python 3.9+
except Exception:  # pragma: no cover - very old runtimes
    _ir_files = None  # type: ignore

CATALOG_ENV_VAR = "STARPROD_CATALOG"
_PACKAGE_RESOURCE = ("starprod.catalogs", "defaults.yaml")
REQUIRED_SECTIONS = ("tolerances", "budgets", "tomography", "evolution", "grids", "cli")


def _packaged_path() -> Optional[Path]:
    """Filesystem path to the packaged catalog, or None if unavailable."""
    if _ir_files is not None:
        try:
            res = _ir_files(_PACKAGE_RESOURCE[0]).joinpath(_PACKAGE_RESOURCE[1])
            p = Path(str(res))
            if p.is_file():
                return p
        except Exception:
            pass
    # Source checkouts where importlib.resources cannot see the data dir.
    local = Path(__file__).resolve().parent / "catalogs" / _PACKAGE_RESOURCE[1]
    return local if local.is_file() else None


def catalog_path(override: Optional[str] = None) -> Path:
    """Return the resolved catalog path (override > env > packaged copy).

    Raises FileNotFoundError when neither an override nor the packaged file is
    available.
    """
    if override:
        p = Path(override)
        if p.is_file():
            return p
        raise FileNotFoundError(f"catalog override not found: {override}")

    env_path = os.getenv(CATALOG_ENV_VAR, "").strip()
    if env_path:
        p = Path(env_path)
        if p.is_file():
            return p

    packaged = _packaged_path()
    if packaged is not None:
        return packaged
    raise FileNotFoundError("defaults.yaml not found (no env override and no packaged copy)")


def load_defaults(override: Optional[str] = None) -> Dict[str, Any]:
    """Return the catalog as a plain nested dict.

    Missing sections come back as empty dicts so callers can layer their own
    fallbacks; typing of individual values stays with ``starprod.settings``.
    """
    import yaml  # local import so importers that only need catalog_path avoid it

    p = catalog_path(override)
    with open(p, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ValueError(f"catalog {p} must be a mapping, got {type(data).__name__}")
    for section in REQUIRED_SECTIONS:
        if not isinstance(data.get(section), dict):
            data[section] = {}
    return data


__all__ = ["CATALOG_ENV_VAR", "catalog_path", "load_defaults"]
