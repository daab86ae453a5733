"""Exception hierarchy shared by every ``starprod`` module.

Every error raised on purpose by the package derives from ``StarprodError`` so
callers (and the CLI) can separate numerical trouble from programming errors.
Precondition failures that callers tend to catch as plain ``ValueError`` also
inherit from it.
"""

from __future__ import annotations

from typing import Optional


class StarprodError(Exception):
    """Base class for all package errors."""


class TruncationError(StarprodError):
    """The Fock truncation is too small for the requested displacement or state."""


class DomainError(StarprodError, ValueError):
    """An argument lies outside the domain where the construction is defined."""


class DimensionMismatch(StarprodError, ValueError):
    """Operators, fields or tensors do not share a common shape."""


class ResourceError(StarprodError):
    """A quadrature or scan would exceed its configured budget."""


class StabilityError(StarprodError):
    """Explicit time stepping blew up (step too large for the spectrum)."""


class DegenerateError(StarprodError):
    """A closed-form expression hits a vanishing denominator."""


class DegenerateFrame(DegenerateError, DomainError):
    """Tomographic reference frame with a vanishing parameter."""


class BranchError(DomainError):
    """Square-root branch of the tomographic kernel is not real."""


class ConfigError(StarprodError, ValueError):
    """Invalid run configuration; ``field`` names the offending option."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class NumericalCheckFailed(StarprodError):
    """A residual exceeded its tolerance."""

    def __init__(self, check: str, residual: float, tolerance: Optional[float] = None):
        detail = f"{check}: residual {residual:.3e}"
        if tolerance is not None:
            detail += f" exceeds tolerance {tolerance:.1e}"
        super().__init__(detail)
        self.check = check
        self.residual = residual
        self.tolerance = tolerance


__all__ = [
    "StarprodError",
    "TruncationError",
    "DomainError",
    "DimensionMismatch",
    "ResourceError",
    "StabilityError",
    "DegenerateError",
    "DegenerateFrame",
    "BranchError",
    "ConfigError",
    "NumericalCheckFailed",
]
