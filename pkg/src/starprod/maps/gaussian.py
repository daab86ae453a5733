"""Normal-ordered Gaussian operators c·exp(λa†)·t^(a†a)·exp(μa).

This family is closed under multiplication,

    G1·G2 = G(c1 c2 e^(μ1 λ2), λ1 + t1 λ2, t1 t2, μ2 + μ1 t2),

and has the closed-form trace

    Tr G = c · exp(λμ / (1 - t)) / (1 - t),

which converges for |t| < 1 and is read as its analytic continuation
otherwise. Displacements, displaced number powers and therefore every
phase-space quantizer and dequantizer belong to it, so any
Tr[D(x1)...D(xN)U(x)] can be evaluated without truncating to a Fock block.
The closed-form kernels are cross-checked against this evaluation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DegenerateError
from ..fock import FockSpace, Operator, normal_ordered_elements

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GaussianOperator:
    scale: complex = 1.0
    create: complex = 0.0
    base: complex = 1.0
    annihilate: complex = 0.0

    @classmethod
    def displacement(cls, xi: complex) -> "GaussianOperator":
        xi = complex(xi)
        return cls(np.exp(-abs(xi) ** 2 / 2.0), xi, 1.0, -xi.conjugate())

    @classmethod
    def displaced_number_power(cls, alpha: complex, base: float, prefactor: complex = 1.0) -> "GaussianOperator":
        """prefactor · D(α) base^(a†a) D(α)†."""
        alpha = complex(alpha)
        shift = 1.0 - base
        return cls(
            prefactor * np.exp(-shift * abs(alpha) ** 2),
            shift * alpha,
            base,
            shift * alpha.conjugate(),
        )

    def __matmul__(self, other: "GaussianOperator") -> "GaussianOperator":
        if not isinstance(other, GaussianOperator):
            return NotImplemented
        return GaussianOperator(
            self.scale * other.scale * np.exp(self.annihilate * other.create),
            self.create + self.base * other.create,
            self.base * other.base,
            other.annihilate + self.annihilate * other.base,
        )

    def __mul__(self, factor) -> "GaussianOperator":
        return GaussianOperator(self.scale * factor, self.create, self.base, self.annihilate)

    __rmul__ = __mul__

    def trace(self) -> complex:
        gap = 1.0 - self.base
        if abs(gap) < 1e-14:
            raise DegenerateError("trace of a Gaussian operator with base 1 diverges")
        if abs(self.base) >= 1.0:
            logger.debug("Gaussian trace with |base| = %.3g >= 1 taken by analytic continuation", abs(self.base))
        return complex(self.scale * np.exp(self.create * self.annihilate / gap) / gap)

    def matrix(self, space: FockSpace) -> Operator:
        """Fock block of the operator (exact elements)."""
        return Operator(
            space,
            normal_ordered_elements(space.dim, self.scale, self.create, self.base, self.annihilate),
        )


def product(ops: Sequence[GaussianOperator]) -> GaussianOperator:
    out = GaussianOperator()
    for op in ops:
        out = out @ op
    return out


def trace_of_product(ops: Sequence[GaussianOperator]) -> complex:
    return product(ops).trace()


__all__ = ["GaussianOperator", "product", "trace_of_product"]
