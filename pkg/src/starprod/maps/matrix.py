"""Matrix mechanics as a quantizer-dequantizer pair.

Labels are index pairs (i, k) of the number basis. U(i, k) = |k><i| and
D(i, k) = |i><k|, so the symbol of A is its matrix A_ik and the star-product
kernel δ(k1, i2)·δ(i, i1)·δ(k2, k) is the matrix-multiplication rule.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..errors import DimensionMismatch, DomainError
from ..fock import FockSpace, Operator
from ..framework import LabelGrid, QuantizerPair, SymbolField


class MatrixMechanicsPair(QuantizerPair):
    name = "matrix"
    axes = ("i", "k")
    normalized = False
    delta_complete = True

    def _indices(self, points) -> np.ndarray:
        pts = self._points(points)
        idx = np.rint(pts).astype(int)
        if np.any(np.abs(pts - idx) > 1e-9):
            raise DomainError("matrix labels must be integer index pairs")
        if np.any((idx < 0) | (idx >= self.space.dim)):
            raise DomainError(f"matrix labels must lie in [0, {self.space.dim}), got {idx.min()}..{idx.max()}")
        return idx

    def u_stack(self, points) -> np.ndarray:
        idx = self._indices(points)
        out = np.zeros((len(idx), self.space.dim, self.space.dim), dtype=complex)
        out[np.arange(len(idx)), idx[:, 1], idx[:, 0]] = 1.0
        return out

    def d_stack(self, points) -> np.ndarray:
        idx = self._indices(points)
        out = np.zeros((len(idx), self.space.dim, self.space.dim), dtype=complex)
        out[np.arange(len(idx)), idx[:, 0], idx[:, 1]] = 1.0
        return out

    def symbol_values(self, entries: np.ndarray, points) -> np.ndarray:
        idx = self._indices(points)
        return np.asarray(entries, dtype=complex)[idx[:, 0], idx[:, 1]]

    def dequantize(self, coeffs, points) -> np.ndarray:
        idx = self._indices(points)
        out = np.zeros((self.space.dim, self.space.dim), dtype=complex)
        np.add.at(out, (idx[:, 0], idx[:, 1]), np.asarray(coeffs, dtype=complex))
        return out

    def default_grid(self) -> LabelGrid:
        n = self.space.dim
        i, k = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        return LabelGrid.from_points(np.stack([i.ravel(), k.ravel()], axis=1), axes=self.axes)

    def two_symbol_kernel(self, first, second, out) -> np.ndarray:
        first = np.asarray(first, dtype=float)
        second = np.asarray(second, dtype=float)
        out = np.asarray(out, dtype=float)
        hit = (
            (first[..., 1] == second[..., 0])
            & (first[..., 0] == out[..., 0])
            & (second[..., 1] == out[..., 1])
        )
        return hit.astype(complex)

    def trace_from_symbol(self, field: SymbolField) -> complex:
        """Σ_i f(i, i)."""
        pts = field.grid.points
        diag = pts[:, 0] == pts[:, 1]
        return complex(np.sum(field.values[diag]))


def matrix_mechanics_pair(space: FockSpace) -> MatrixMechanicsPair:
    return MatrixMechanicsPair(space)


def ehrenfest_star(
    A: Operator,
    B: Operator,
    psi1,
    psi2,
    basis: Optional[np.ndarray] = None,
) -> complex:
    """Σ_n <ψ1|A|φ_n><φ_n|B|ψ2> over the columns φ_n of ``basis`` (default: number basis).

    For a complete orthonormal basis this is <ψ1|AB|ψ2>.
    """
    if A.dim != B.dim:
        raise DimensionMismatch(f"operators live on different spaces: dims {A.dim} and {B.dim}")
    v1 = np.asarray(psi1, dtype=complex).reshape(-1)
    v2 = np.asarray(psi2, dtype=complex).reshape(-1)
    if len(v1) != A.dim or len(v2) != A.dim:
        raise DimensionMismatch(f"state vectors must have length {A.dim}")
    phi = np.eye(A.dim, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
    if phi.ndim != 2 or phi.shape[0] != A.dim:
        raise DimensionMismatch(f"basis must have {A.dim} rows, got shape {phi.shape}")
    left = v1.conj() @ A.entries @ phi
    right = phi.conj().T @ B.entries @ v2
    return complex(np.dot(left, right))


__all__ = ["MatrixMechanicsPair", "matrix_mechanics_pair", "ehrenfest_star"]
