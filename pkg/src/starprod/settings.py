"""Process-wide settings: environment variables layered over the defaults catalog.

``STARPROD_THREADS`` caps the worker threads used for per-point evaluations
(default 1, i.e. serial). ``STARPROD_CATALOG`` points at an alternative
defaults YAML (see ``starprod.catalog``). A ``.env`` file in the working
directory is honoured.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, Iterable, List, Optional, TypeVar

from dotenv import load_dotenv

from .catalog import load_defaults
from .errors import ConfigError

# Ensure environment variables are loaded if available
load_dotenv()

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = "STARPROD_THREADS"
_DEFAULT_THREADS = os.environ.get(THREADS_ENV_VAR, "1")

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class Settings:
    displacement_origin: float = 1e-8
    state_tail: float = 1e-6
    normalized_trace: float = 1e-8
    reconstruction_warning: float = 1e-2
    assoc_tolerance: float = 1e-12
    kernel_assoc_tolerance: float = 1e-10
    quadrature_tuples: int = 4_000_000
    kernel_tuples: int = 2_000_000
    monte_carlo_samples: int = 200_000
    chunk_points: int = 2048
    delta_width: float = 0.2
    oversample: int = 96
    growth_limit: float = 10.0
    frames: int = 50
    csv_float_format: str = "%.12g"
    manifest_schema: int = 1
    grids: Dict[str, Any] = field(default_factory=dict)
    checks: Dict[str, float] = field(default_factory=dict)

    def check_tolerance(self, command: str) -> float:
        try:
            return float(self.checks[command])
        except KeyError:
            raise ConfigError("tolerance", f"no default tolerance for command {command!r}") from None


def _settings_from_catalog(data: Dict[str, Any]) -> Settings:
    tol = data["tolerances"]
    budgets = data["budgets"]
    tomo = data["tomography"]
    evo = data["evolution"]
    cli = data["cli"]
    base = Settings()
    return Settings(
        displacement_origin=float(tol.get("displacement_origin", base.displacement_origin)),
        state_tail=float(tol.get("state_tail", base.state_tail)),
        normalized_trace=float(tol.get("normalized_trace", base.normalized_trace)),
        reconstruction_warning=float(tol.get("reconstruction_warning", base.reconstruction_warning)),
        assoc_tolerance=float(tol.get("assoc", base.assoc_tolerance)),
        kernel_assoc_tolerance=float(tol.get("kernel_assoc", base.kernel_assoc_tolerance)),
        quadrature_tuples=int(budgets.get("quadrature_tuples", base.quadrature_tuples)),
        kernel_tuples=int(budgets.get("kernel_tuples", base.kernel_tuples)),
        monte_carlo_samples=int(budgets.get("monte_carlo_samples", base.monte_carlo_samples)),
        chunk_points=int(budgets.get("chunk_points", base.chunk_points)),
        delta_width=float(tomo.get("delta_width", base.delta_width)),
        oversample=int(tomo.get("oversample", base.oversample)),
        growth_limit=float(evo.get("growth_limit", base.growth_limit)),
        frames=int(evo.get("frames", base.frames)),
        csv_float_format=str(cli.get("csv_float_format", base.csv_float_format)),
        manifest_schema=int(cli.get("manifest_schema", base.manifest_schema)),
        grids=dict(data["grids"]),
        checks={str(k): float(v) for k, v in (cli.get("checks") or {}).items()},
    )


@lru_cache(maxsize=1)
def get_settings(override: Optional[str] = None) -> Settings:
    """Cached settings. Tests can call `get_settings.cache_clear()`."""
    return _settings_from_catalog(load_defaults(override))


@lru_cache(maxsize=1)
def thread_count() -> int:
    """Worker cap from `STARPROD_THREADS`. Tests can call `thread_count.cache_clear()`."""
    raw = os.environ.get(THREADS_ENV_VAR, _DEFAULT_THREADS).strip() or "1"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(THREADS_ENV_VAR, f"must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(THREADS_ENV_VAR, f"must be a positive integer, got {n}")
    return n


def map_ordered(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Apply ``fn`` to every item, threaded up to ``thread_count()``.

    Results come back in input order whatever the worker count, so reductions
    over them are reproducible.
    """
    seq = list(items)
    workers = min(thread_count(), len(seq))
    if workers <= 1:
        return [fn(item) for item in seq]
    logger.debug("evaluating %d items on %d threads", len(seq), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seq))


__all__ = ["THREADS_ENV_VAR", "Settings", "get_settings", "thread_count", "map_ordered"]
