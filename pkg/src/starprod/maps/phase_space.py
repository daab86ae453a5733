"""Weyl and s-ordered phase-space maps with their closed-form kernels.

Coordinates. The s-ordered pair is labelled by x = (x1, x2) with
α = x1 + i x2 and measure dx1 dx2. With q(s) = (s+1)/(s-1) and p = 1/q = q(-s):

    U(x) = (1 - q) · D(α) q^(a†a) D(α)†               (Tr U = 1)
    D(x) = U(x, -s)/π = ((1 - p)/π) · D(α) p^(a†a) D(α)†

At s = 0 this is 2·D(α)·P·D(α)† with P the parity. The Weyl pair uses
(q, p) = sqrt(2)·(x1, x2), α = (q + ip)/sqrt(2), measure dq dp and
D(x) = U(x)/(2π).

Quantizers are assembled from exact Laguerre matrix elements
(``fock.displaced_number_power_stack``), so a symbol is only as truncated as
the operator it is taken of. For |q| > 1 (s > 0 quantizers, s < 0
dequantizers) the elements grow like |q|^n and Fock sums converge only for
operators whose weight decays faster.

N-symbol kernel. With p = 1/q, κ = 1 - p, η = 1 - q and q̃ = q^(2-N),

    K(α1..α_{N-1}; α_N) = Tr[D(α1)...D(α_{N-1}) U(α_N)]
      = (κ/π)^(N-1) · η/(1 - q̃) · exp(E)

where (1 - q̃)·E collects, summed over every input i < N,

    -κ(1 - q q̃)|α_i|²,   -η(1 - p q̃)|α_N|²,
    κ² p^(j-i-1) conj(α_i) α_j  and  κ² p^(N-3+i-j) α_i conj(α_j)   for i < j < N,
    κη p^(N-1-i) conj(α_i) α_N  and  κη p^(i-1) α_i conj(α_N).

N = 3 is the two-symbol kernel. The truncated Fock trace of the same
product converges only for |q̃| < 1; ``gaussian_kernel`` evaluates it
without truncation for every s.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import DegenerateError, DimensionMismatch, DomainError
from ..fock import FockSpace, Operator, displaced_number_power_stack
from ..framework import LabelGrid, QuantizerPair, SymbolField, symbol_field
from ..settings import get_settings
from .gaussian import GaussianOperator, trace_of_product

logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class SOrder:
    s: float

    def __post_init__(self):
        if not -1.0 < float(self.s) < 1.0:
            raise DomainError(f"s must lie in the open interval (-1, 1), got {self.s!r}")

    @property
    def q(self) -> float:
        return (self.s + 1.0) / (self.s - 1.0)

    def dual(self) -> "SOrder":
        return SOrder(-self.s)


@dataclass(frozen=True)
class PhasePoint:
    x1: float
    x2: float

    @property
    def alpha(self) -> complex:
        return complex(self.x1, self.x2)

    @classmethod
    def from_weyl(cls, q: float, p: float) -> "PhasePoint":
        return cls(q / SQRT2, p / SQRT2)

    def to_weyl(self) -> Tuple[float, float]:
        return SQRT2 * self.x1, SQRT2 * self.x2


def _as_order(order: Union[SOrder, float]) -> SOrder:
    return order if isinstance(order, SOrder) else SOrder(float(order))


def _coords(point) -> np.ndarray:
    if isinstance(point, PhasePoint):
        return np.array([point.x1, point.x2])
    return np.asarray(point, dtype=float)


class SOrderedPair(QuantizerPair):
    normalized = True
    delta_complete = True

    def __init__(self, space: FockSpace, order: Union[SOrder, float], *, weyl_coordinates: bool = False):
        super().__init__(space)
        self.order = _as_order(order)
        self.weyl_coordinates = weyl_coordinates
        if weyl_coordinates:
            self.name = "weyl"
            self.axes = ("q", "p")
            self.trace_density = 1.0 / (2.0 * np.pi)
        else:
            self.name = f"sordered:{self.order.s:g}"
            self.axes = ("x1", "x2")
            self.trace_density = 1.0 / np.pi

    def alphas(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        alpha = pts[..., 0] + 1j * pts[..., 1]
        return alpha / SQRT2 if self.weyl_coordinates else alpha

    @property
    def _d_prefactor(self) -> float:
        p = 1.0 / self.order.q
        factor = (1.0 - p) / np.pi
        return factor / 2.0 if self.weyl_coordinates else factor

    def u_stack(self, points) -> np.ndarray:
        q = self.order.q
        return (1.0 - q) * displaced_number_power_stack(self.space, self.alphas(self._points(points)), q)

    def d_stack(self, points) -> np.ndarray:
        p = 1.0 / self.order.q
        return self._d_prefactor * displaced_number_power_stack(self.space, self.alphas(self._points(points)), p)

    def default_grid(self) -> LabelGrid:
        grids = get_settings().grids
        spec = grids.get("weyl" if self.weyl_coordinates else "sordered") or {"lo": -6.0, "hi": 6.0, "n": 64}
        axis = (float(spec["lo"]), float(spec["hi"]), int(spec["n"]))
        return LabelGrid.rectangular([axis, axis], self.axes)

    def two_symbol_kernel(self, first, second, out) -> np.ndarray:
        if self.weyl_coordinates:
            return moyal_kernel(second, first, out)
        return s_kernel(self.order, [self.alphas(first), self.alphas(second), self.alphas(out)])

    def gaussian_quantizer(self, point) -> GaussianOperator:
        q = self.order.q
        return GaussianOperator.displaced_number_power(complex(self.alphas(_coords(point))), q, 1.0 - q)

    def gaussian_dequantizer(self, point) -> GaussianOperator:
        p = 1.0 / self.order.q
        return GaussianOperator.displaced_number_power(complex(self.alphas(_coords(point))), p, self._d_prefactor)

    def gaussian_kernel(self, inputs: Sequence, out) -> complex:
        """Tr[D(x1)...D(xN) U(x)] without Fock truncation."""
        ops = [self.gaussian_dequantizer(x) for x in inputs] + [self.gaussian_quantizer(out)]
        return trace_of_product(ops)

    def fock_trace_converges(self, n_inputs: int) -> bool:
        """Whether the truncated Fock trace of an ``n_inputs``-symbol kernel converges."""
        return abs(self.order.q ** (1 - n_inputs)) < 1.0


def sordered_pair(space: FockSpace, order: Union[SOrder, float]) -> SOrderedPair:
    return SOrderedPair(space, order)


def weyl_pair(space: FockSpace) -> SOrderedPair:
    return SOrderedPair(space, SOrder(0.0), weyl_coordinates=True)


def _maybe_scalar(value: np.ndarray):
    return complex(value) if np.ndim(value) == 0 else value


def moyal_kernel(xpp, xp, x):
    """π^-2 exp{2i[(x2'-x2)(x1-x1'') + (x1'-x1)(x2''-x2)]} in (q, p) coordinates.

    Equals Tr[D(xp) D(xpp) U(x)] for the Weyl pair; swapping ``xpp`` and ``xp``
    conjugates it. Arguments broadcast over leading axes.
    """
    a = _coords(xpp)
    b = _coords(xp)
    c = _coords(x)
    phase = 2.0 * ((b[..., 1] - c[..., 1]) * (c[..., 0] - a[..., 0])
                   + (b[..., 0] - c[..., 0]) * (a[..., 1] - c[..., 1]))
    return _maybe_scalar(np.exp(1j * phase) / np.pi ** 2)


def s_kernel(order: Union[SOrder, float], alphas: Sequence, N: Optional[int] = None):
    """Closed-form Tr[D(α1)...D(α_{N-1}) U(α_N)] for the s-ordered pair.

    ``alphas`` holds N complex labels (scalars or arrays that broadcast), the
    last one being the output. Raises DegenerateError when q^(2-N) = 1.
    """
    order = _as_order(order)
    args = [np.asarray(al, dtype=complex) for al in alphas]
    if N is None:
        N = len(args)
    if N != len(args):
        raise DimensionMismatch(f"s_kernel got {len(args)} labels for N = {N}")
    if N < 2:
        raise DomainError(f"s_kernel needs N >= 2 labels, got {N}")
    q = order.q
    p = 1.0 / q
    kappa = 1.0 - p
    eta = 1.0 - q
    q_tilde = q ** (2 - N)
    denom = 1.0 - q_tilde
    if abs(denom) < 1e-14:
        raise DegenerateError(f"s_kernel: q^(2-N) = 1 for q = {q:g}, N = {N}")

    inputs, out = args[:-1], args[-1]
    expo = -eta * (1.0 - p * q_tilde) * np.abs(out) ** 2
    for i, ai in enumerate(inputs, start=1):
        expo = expo - kappa * (1.0 - q * q_tilde) * np.abs(ai) ** 2
        expo = expo + kappa * eta * (p ** (N - 1 - i) * ai.conj() * out + p ** (i - 1) * ai * out.conj())
        for j in range(i + 1, N):
            aj = inputs[j - 1]
            expo = expo + kappa ** 2 * (p ** (j - i - 1) * ai.conj() * aj + p ** (N - 3 + i - j) * ai * aj.conj())
    prefactor = (kappa / np.pi) ** (N - 1) * eta / denom
    return _maybe_scalar(prefactor * np.exp(expo / denom))


def z_trace(order: Union[SOrder, float], alpha: complex, alpha_tilde_conj: complex) -> complex:
    """Tr[exp(α a† - α̃* a) q^(a†a)] = exp[-(q/(1-q) + 1/2) α α̃*]/(1 - q)."""
    q = _as_order(order).q
    prod = complex(alpha) * complex(alpha_tilde_conj)
    return complex(np.exp(-(q / (1.0 - q) + 0.5) * prod) / (1.0 - q))


def wigner(rho: Operator, grid: Optional[LabelGrid] = None) -> SymbolField:
    """Weyl symbol of a density operator on (q, p); the imaginary residue is dropped."""
    field = symbol_field(rho, weyl_pair(rho.space), grid)
    residue = field.max_imag()
    if residue > 1e-10:
        logger.warning("Wigner field has imaginary residue %.2e; is rho Hermitian?", residue)
    return SymbolField(field.grid, field.values.real)


def purity_kernel(order: Union[SOrder, float], alphas: Sequence):
    """Tr[D(α1)...D(αN)] = π/((1-q)(1-1/q)) · K(α1, ..., αN, 0, 0)."""
    order = _as_order(order)
    if len(alphas) < 2:
        raise DomainError(f"purity_kernel needs N >= 2 labels, got {len(alphas)}")
    q = order.q
    factor = np.pi / ((1.0 - q) * (1.0 - 1.0 / q))
    return factor * s_kernel(order, list(alphas) + [0j, 0j])


def purity_via_kernel(rho: Operator, order: Union[SOrder, float], grid: LabelGrid) -> complex:
    """Tr ρ² as ∫∫ W_s(α1) W_s(α2) Tr[D(α1) D(α2)] by quadrature (needs s > 0)."""
    pair = sordered_pair(rho.space, order)
    field = symbol_field(rho, pair, grid)
    coeffs = grid.weights * field.values
    alphas = pair.alphas(grid.points)
    kernel = purity_kernel(pair.order, [alphas[:, None], alphas[None, :]])
    return complex(coeffs @ kernel @ coeffs)


__all__ = [
    "SOrder",
    "PhasePoint",
    "SOrderedPair",
    "sordered_pair",
    "weyl_pair",
    "moyal_kernel",
    "s_kernel",
    "z_trace",
    "wigner",
    "purity_kernel",
    "purity_via_kernel",
]
