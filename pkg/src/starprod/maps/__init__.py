"""Concrete quantizer-dequantizer pairs and the ``--map`` name parser."""

from __future__ import annotations

from ..errors import ConfigError, DomainError
from ..fock import FockSpace
from ..framework import QuantizerPair
from .gaussian import GaussianOperator
from .matrix import MatrixMechanicsPair, ehrenfest_star, matrix_mechanics_pair
from .phase_space import SOrder, SOrderedPair, sordered_pair, weyl_pair
from .tomography import TomographicPair, tomo_pair

VALID_MAPS = ("weyl", "sordered", "tomographic", "matrix")


def pair_from_name(name: str, space: FockSpace) -> QuantizerPair:
    """Build a pair from ``weyl``, ``sordered:S``, ``tomographic[:DELTA]`` or ``matrix``."""
    kind, _, arg = str(name).strip().lower().partition(":")
    if kind not in VALID_MAPS:
        raise ConfigError("map", f"must be one of {VALID_MAPS}, got {name!r}")
    try:
        if kind == "weyl":
            return weyl_pair(space)
        if kind == "matrix":
            return matrix_mechanics_pair(space)
        if kind == "sordered":
            if not arg:
                raise ConfigError("map", "sordered needs an order, e.g. sordered:-0.4")
            return sordered_pair(space, SOrder(float(arg)))
        return tomo_pair(space, float(arg) if arg else None)
    except ConfigError:
        raise
    except (ValueError, DomainError) as exc:
        raise ConfigError("map", str(exc)) from None


__all__ = [
    "VALID_MAPS",
    "pair_from_name",
    "GaussianOperator",
    "MatrixMechanicsPair",
    "ehrenfest_star",
    "matrix_mechanics_pair",
    "SOrder",
    "SOrderedPair",
    "sordered_pair",
    "weyl_pair",
    "TomographicPair",
    "tomo_pair",
]
