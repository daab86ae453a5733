"""Heisenberg evolution of symbols.

The symbol equation ḟ_A = i{f_H, f_A}⋆ is linear, and the operator-route
bracket makes it the image of dA/dt = i[H, A] under the symbol map. Stepping
the operator with classical RK4 and sampling its symbol at recorded steps is
therefore the same scheme as stepping the field, without re-sampling the
bracket on the grid at every stage.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
import pandas as pd

from .errors import DimensionMismatch, DomainError, StabilityError
from .fock import Operator
from .framework import LabelGrid, QuantizerPair, SymbolField, symbol_field
from .settings import get_settings

logger = logging.getLogger(__name__)

Derivative = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class EvolutionResult:
    """Recorded ``times`` with the stepped ``fields`` and the ``exact`` benchmark series."""

    times: np.ndarray
    fields: Tuple[SymbolField, ...]
    exact: Tuple[SymbolField, ...]

    def deviations(self) -> np.ndarray:
        return np.array([f.sup_distance(e) for f, e in zip(self.fields, self.exact)])

    def max_deviation(self) -> float:
        return float(np.max(self.deviations()))

    def to_frame(self) -> pd.DataFrame:
        """Long table: t, label axes, re, im, exact_re, exact_im."""
        parts = []
        for t, field, ref in zip(self.times, self.fields, self.exact):
            frame = field.to_frame()
            frame.insert(0, "t", t)
            frame["exact_re"] = ref.values.real
            frame["exact_im"] = ref.values.imag
            parts.append(frame)
        return pd.concat(parts, ignore_index=True)


def _check_step(t_final: float, dt: float) -> int:
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt!r}")
    if t_final < 0:
        raise DomainError(f"t_final must be >= 0, got {t_final!r}")
    return int(round(t_final / dt))


def rk4_series(
    start: np.ndarray,
    derivative: Derivative,
    t_final: float,
    dt: float,
    *,
    record_every: Optional[int] = None,
    growth_limit: Optional[float] = None,
) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Classical RK4 from t = 0 to ``t_final``; returns recorded times and states.

    The state at t = 0 and at the final step are always recorded. Raises
    StabilityError as soon as the Frobenius norm exceeds ``growth_limit``
    times its initial value.
    """
    steps = _check_step(t_final, dt)
    settings = get_settings()
    every = record_every or max(1, steps // max(1, settings.frames))
    limit = settings.growth_limit if growth_limit is None else growth_limit
    state = np.array(start, dtype=complex)
    initial = float(np.linalg.norm(state))

    times = [0.0]
    states = [state.copy()]
    for step in range(1, steps + 1):
        k1 = derivative(state)
        k2 = derivative(state + 0.5 * dt * k1)
        k3 = derivative(state + 0.5 * dt * k2)
        k4 = derivative(state + dt * k3)
        state = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        size = float(np.linalg.norm(state))
        if initial > 0 and (not np.isfinite(size) or size > limit * initial):
            raise StabilityError(
                f"norm grew to {size:.3e} (> {limit:g} x initial {initial:.3e}) at step {step}; "
                f"reduce dt below {dt:g}"
            )
        if step % every == 0 or step == steps:
            times.append(step * dt)
            states.append(state.copy())
    logger.debug("RK4: %d steps of %g, %d recorded states", steps, dt, len(states))
    return np.array(times), states


def conjugation_series(A0: Operator, generator: Operator, times: np.ndarray) -> List[np.ndarray]:
    """e^{iGt} A e^{-iGt} for Hermitian G at every time."""
    energies, vecs = np.linalg.eigh(generator.entries)
    rotated = vecs.conj().T @ A0.entries @ vecs
    gaps = energies[:, None] - energies[None, :]
    return [vecs @ (np.exp(1j * gaps * t) * rotated) @ vecs.conj().T for t in times]


def heisenberg_evolve(
    A0: Operator,
    H: Operator,
    pair: QuantizerPair,
    t_final: float,
    dt: float,
    grid: Optional[LabelGrid] = None,
    *,
    record_every: Optional[int] = None,
) -> EvolutionResult:
    """Symbols of A(t) under dA/dt = i[H, A], stepped and exact.

    RK4 advances the operator block and maps every recorded state to its
    symbol. The symbol map is linear, so this is the same
    recursion as stepping f_A through f -> i(f_H ⋆ f - f ⋆ f_H) with
    the operator-route star-product; the field norm is bounded by a fixed
    multiple of the operator norm, which is what StabilityError watches.
    The exact series comes from the spectral decomposition of H.
    """
    if A0.dim != H.dim or A0.dim != pair.space.dim:
        raise DimensionMismatch(f"A0 (dim {A0.dim}), H (dim {H.dim}) and {pair.name} must share a space")
    if not H.is_hermitian(1e-10):
        raise DomainError("H must be Hermitian")
    h = H.entries

    def derivative(a: np.ndarray) -> np.ndarray:
        return 1j * (h @ a - a @ h)

    times, states = rk4_series(A0.entries, derivative, t_final, dt, record_every=record_every)
    grid = grid or pair.default_grid()
    fields = tuple(symbol_field(Operator(A0.space, s), pair, grid) for s in states)
    exact = tuple(
        symbol_field(Operator(A0.space, s), pair, grid) for s in conjugation_series(A0, H, times)
    )
    return EvolutionResult(times, fields, exact)


__all__ = ["EvolutionResult", "rk4_series", "conjugation_series", "heisenberg_evolve"]
