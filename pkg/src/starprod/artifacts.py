"""Plot-ready files and run manifests.

Fields are written as CSV (one row per grid point, 12 significant digits by
default) or JSON (grid metadata included). Every CLI run also leaves a
manifest JSON with its parameters, seed, package version, residuals and
outcome; ``starprod report`` reads those back.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional

import numpy as np
import pandas as pd

from .errors import ConfigError, DimensionMismatch
from .framework import SymbolField
from .maps.tomography import Tomogram
from .settings import get_settings
from .structures import StructureTensor

MANIFEST_KEYS = ("schema_version", "command", "parameters", "seed", "version", "residuals", "tolerance", "passed")


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def field_frame(field: SymbolField) -> pd.DataFrame:
    """Label columns then ``re``/``im``; tomograms use a single ``w`` column."""
    frame = field.to_frame()
    if isinstance(field, Tomogram):
        frame = frame.drop(columns=["im"]).rename(columns={"re": "w"})
    return frame


def write_field_csv(field: SymbolField, path, float_format: Optional[str] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fmt = float_format or get_settings().csv_float_format
    field_frame(field).to_csv(path, index=False, float_format=fmt, lineterminator="\n")
    return path


def read_field_csv(path) -> pd.DataFrame:
    return pd.read_csv(Path(path))


def field_payload(field: SymbolField, metadata: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    grid = field.grid
    payload: Dict[str, Any] = {
        "axes": list(grid.axes),
        "ranges": [list(r) for r in grid.ranges],
        "points": grid.points.tolist(),
        "weights": grid.weights.tolist(),
        "re": field.values.real.tolist(),
        "im": field.values.imag.tolist(),
    }
    if isinstance(field, Tomogram):
        payload["delta_width"] = field.delta_width
        payload["dim"] = field.dim
    payload.update(metadata or {})
    return payload


def write_field_json(field: SymbolField, path, metadata: Optional[Mapping[str, Any]] = None) -> Path:
    path = Path(path)
    _write_text(path, json.dumps(field_payload(field, metadata), indent=2, sort_keys=True) + "\n")
    return path


def load_tensor_json(path) -> StructureTensor:
    """Read ``{"n": int, "entries": [[[...]]]}``; an optional ``"imag"`` array adds imaginary parts."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(payload, dict) or "entries" not in payload:
        raise ConfigError("tensor", f"{path} must hold an object with 'entries'")
    entries = np.asarray(payload["entries"], dtype=float)
    if "imag" in payload:
        entries = entries + 1j * np.asarray(payload["imag"], dtype=float)
    tensor = StructureTensor(entries)
    if "n" in payload and int(payload["n"]) != tensor.n:
        raise DimensionMismatch(f"tensor file declares n = {payload['n']} but entries have n = {tensor.n}")
    return tensor


def _jsonable(value: Any) -> Any:
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def build_manifest(
    command: str,
    parameters: Mapping[str, Any],
    *,
    residuals: Mapping[str, float],
    tolerance: Optional[float],
    passed: bool,
    seed: Optional[int] = None,
    artifacts: Iterable[str] = (),
) -> Dict[str, Any]:
    from . import __version__

    return _jsonable({
        "schema_version": get_settings().manifest_schema,
        "command": command,
        "parameters": dict(parameters),
        "seed": seed,
        "version": __version__,
        "residuals": dict(residuals),
        "tolerance": tolerance,
        "passed": bool(passed),
        "artifacts": list(artifacts),
    })


def write_manifest(manifest: Mapping[str, Any], path) -> Path:
    path = Path(path)
    _write_text(path, json.dumps(_jsonable(dict(manifest)), indent=2, sort_keys=True) + "\n")
    return path


def read_manifest(path) -> Dict[str, Any]:
    """Parse a manifest; FileNotFoundError when missing, ConfigError when malformed."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("manifest", f"{path} is not valid JSON: {exc}") from None
    missing = [k for k in MANIFEST_KEYS if not isinstance(payload, dict) or k not in payload]
    if missing:
        raise ConfigError("manifest", f"{path} lacks keys {missing}")
    return payload


def manifest_rows(manifests: List[Mapping[str, Any]]) -> pd.DataFrame:
    """One row per (manifest, residual) with dim, map and pass flag."""
    rows = []
    for index, manifest in enumerate(manifests):
        params = manifest.get("parameters", {})
        for check, residual in (manifest.get("residuals") or {}).items():
            rows.append({
                "run": index,
                "command": manifest["command"],
                "map": params.get("map"),
                "dim": params.get("dim"),
                "check": check,
                "residual": float(residual),
                "tolerance": manifest.get("tolerance"),
                "passed": bool(manifest["passed"]),
            })
    return pd.DataFrame(rows, columns=["run", "command", "map", "dim", "check", "residual", "tolerance", "passed"])


__all__ = [
    "MANIFEST_KEYS",
    "field_frame",
    "write_field_csv",
    "read_field_csv",
    "field_payload",
    "write_field_json",
    "load_tensor_json",
    "build_manifest",
    "write_manifest",
    "read_manifest",
    "manifest_rows",
]
