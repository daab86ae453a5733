"""Deformed associative products A ⊙ B = A e^{λk} B and the symbols built on them."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import expm

from .dynamics import rk4_series
from .errors import DimensionMismatch, DomainError
from .fock import Operator
from .framework import (
    LabelGrid,
    QuantizerPair,
    SymbolField,
    reconstruct,
    star_via_kernel,
    symbol_field,
)

logger = logging.getLogger(__name__)

VALID_GROUPINGS = ("left", "right")


@dataclass(frozen=True)
class DeformationContext:
    """Generator ``k_op`` and strength ``lam``; e^{λk} is built once."""

    k_op: Operator
    lam: float
    e_lambda_k: Operator = field(init=False, repr=False)

    def __post_init__(self):
        if not np.isfinite(self.lam):
            raise DomainError(f"lam must be a finite real number, got {self.lam!r}")
        if self.lam == 0:
            exp = Operator.identity(self.k_op.space)
        else:
            exp = Operator(self.k_op.space, expm(float(self.lam) * self.k_op.entries))
        object.__setattr__(self, "e_lambda_k", exp)
        logger.debug("deformation exponential built: dim %d, lam %g", self.k_op.dim, self.lam)

    @property
    def space(self):
        return self.k_op.space


def _check(ctx: DeformationContext, *ops: Operator) -> None:
    for op in ops:
        if op.dim != ctx.k_op.dim:
            raise DimensionMismatch(f"operator dim {op.dim} does not match deformation dim {ctx.k_op.dim}")


def k_product(A: Operator, B: Operator, ctx: DeformationContext) -> Operator:
    _check(ctx, A, B)
    return A @ ctx.e_lambda_k @ B


def k_commutator(A: Operator, B: Operator, ctx: DeformationContext) -> Operator:
    return k_product(A, B, ctx) - k_product(B, A, ctx)


def k_star_operators(
    A: Operator,
    B: Operator,
    pair: QuantizerPair,
    ctx: DeformationContext,
    grid: Optional[LabelGrid] = None,
) -> SymbolField:
    """Tr[A e^{λk} B U(x)] on the grid."""
    return symbol_field(k_product(A, B, ctx), pair, grid)


def k_star(
    fA: SymbolField,
    fB: SymbolField,
    pair: QuantizerPair,
    ctx: DeformationContext,
    grid: Optional[LabelGrid] = None,
) -> SymbolField:
    """Deformed star-product of two symbol fields (reconstructed by quadrature)."""
    return k_star_operators(reconstruct(fA, pair), reconstruct(fB, pair), pair, ctx, grid or fA.grid)


def deformation_symbol(pair: QuantizerPair, ctx: DeformationContext, grid: Optional[LabelGrid] = None) -> SymbolField:
    """f_k, the symbol of e^{λk}."""
    return symbol_field(ctx.e_lambda_k, pair, grid)


def k_star_factorized(
    fA: SymbolField,
    fB: SymbolField,
    pair: QuantizerPair,
    ctx: DeformationContext,
    grid: Optional[LabelGrid] = None,
    grouping: str = "left",
) -> SymbolField:
    """(f_A ⋆ f_k) ⋆ f_B or f_A ⋆ (f_k ⋆ f_B) by kernel quadrature.

    f_k is sampled on the nodes of ``fA``; both inputs must share them. The
    result lands on ``grid`` (default: those nodes).
    """
    if grouping not in VALID_GROUPINGS:
        raise DomainError(f"grouping must be one of {VALID_GROUPINGS}, got {grouping!r}")
    if pair.space.dim != ctx.k_op.dim:
        raise DimensionMismatch(f"pair dim {pair.space.dim} does not match deformation dim {ctx.k_op.dim}")
    f_k = deformation_symbol(pair, ctx, fA.grid)
    out = grid or fA.grid
    if grouping == "left":
        return star_via_kernel(star_via_kernel(fA, f_k, pair), fB, pair, out)
    return star_via_kernel(fA, star_via_kernel(f_k, fB, pair), pair, out)


def k_poisson_operators(
    A: Operator,
    B: Operator,
    pair: QuantizerPair,
    ctx: DeformationContext,
    grid: Optional[LabelGrid] = None,
) -> SymbolField:
    return symbol_field(k_commutator(A, B, ctx), pair, grid)


def k_poisson(
    fA: SymbolField,
    fB: SymbolField,
    pair: QuantizerPair,
    ctx: DeformationContext,
    grid: Optional[LabelGrid] = None,
) -> SymbolField:
    """f_A ⋆ f_k ⋆ f_B - f_B ⋆ f_k ⋆ f_A."""
    return k_poisson_operators(reconstruct(fA, pair), reconstruct(fB, pair), pair, ctx, grid or fA.grid)


def deformed_evolve(
    A0: Operator,
    H: Operator,
    ctx: DeformationContext,
    t_final: float,
    dt: float,
    *,
    record_every: Optional[int] = None,
) -> Tuple[np.ndarray, List[Operator]]:
    """RK4 for dA/dt = i(H e^{λk} A - A e^{λk} H); returns recorded times and operators."""
    _check(ctx, A0, H)
    left = H.entries @ ctx.e_lambda_k.entries
    right = ctx.e_lambda_k.entries @ H.entries

    def derivative(a: np.ndarray) -> np.ndarray:
        return 1j * (left @ a - a @ right)

    times, states = rk4_series(A0.entries, derivative, t_final, dt, record_every=record_every)
    return times, [Operator(A0.space, s) for s in states]


__all__ = [
    "VALID_GROUPINGS",
    "DeformationContext",
    "k_product",
    "k_commutator",
    "k_star_operators",
    "k_star",
    "deformation_symbol",
    "k_star_factorized",
    "k_poisson_operators",
    "k_poisson",
    "deformed_evolve",
]
