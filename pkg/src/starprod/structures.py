"""Bilinear products on finite-dimensional spaces and their associativity.

A structure tensor M is stored as ``entries[k, n, s]`` and multiplies vectors by

    C_k = Σ_{n,s} A_n M[k, n, s] B_s.

Associativity of that product is the quadratic condition

    Σ_m M[l, n, m] M[m, s, k] = Σ_m M[m, n, s] M[l, m, k]    for all n, s, k, l,

the first sum being A ⊙ (B ⊙ C) and the second (A ⊙ B) ⊙ C. Continuous
kernels K(x, y, z) (x the output) obey the integral analogue

    ∫ K(x, y, z) K(z, l, t) dz = ∫ K(x, z, t) K(z, y, l) dz,

checked here on a quadrature grid. 2 x 2 matrices are vectorized row-major,
(a11, a12, a21, a22).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, NamedTuple, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, DomainError, ResourceError
from .framework import LabelGrid, QuantizerPair
from .settings import get_settings, map_ordered

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StructureTensor:
    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=complex)
        if arr.ndim != 3 or len(set(arr.shape)) != 1 or arr.shape[0] < 1:
            raise DimensionMismatch(f"structure tensor must have shape (n, n, n), got {arr.shape}")
        if np.all(arr.imag == 0):
            arr = arr.real.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def product(self, A, B) -> np.ndarray:
        return tensor_product(A, B, self)

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.entries, self.entries.transpose(0, 2, 1)))


class CheckResult(NamedTuple):
    passed: bool
    max_residual: float


def tensor_product(A, B, M: StructureTensor) -> np.ndarray:
    a = np.asarray(A)
    b = np.asarray(B)
    if a.shape != (M.n,) or b.shape != (M.n,):
        raise DimensionMismatch(f"vectors must have length {M.n}, got {a.shape} and {b.shape}")
    return np.einsum("n,kns,s->k", a, M.entries, b)


def associator(M: StructureTensor) -> np.ndarray:
    """A ⊙ (B ⊙ C) - (A ⊙ B) ⊙ C coefficients, indexed [n, s, k, l]."""
    m = M.entries
    return np.einsum("lnm,msk->nskl", m, m) - np.einsum("mns,lmk->nskl", m, m)


def assoc_check(M: StructureTensor, tol: Optional[float] = None) -> CheckResult:
    tol = get_settings().assoc_tolerance if tol is None else tol
    residual = float(np.max(np.abs(associator(M))))
    return CheckResult(residual < tol, residual)


def antisymmetry_residual(C: StructureTensor) -> float:
    """max |C[m, s, k] + C[m, k, s]|."""
    c = C.entries
    return float(np.max(np.abs(c + c.transpose(0, 2, 1))))


def lie_jacobi_check(C: StructureTensor, tol: Optional[float] = None) -> CheckResult:
    """Cyclic Jacobi sum for structure constants [e_s, e_k] = Σ_m C[m, s, k] e_m.

    Constants that are not antisymmetric are reported (logged, and the check
    does not pass) but the Jacobi residual is still evaluated.
    """
    tol = get_settings().assoc_tolerance if tol is None else tol
    c = C.entries
    skew = antisymmetry_residual(C)
    if skew >= tol:
        logger.warning("structure constants are not antisymmetric (residual %.2e)", skew)
    cyclic = (
        np.einsum("msk,lnm->nskl", c, c)
        + np.einsum("mkn,lsm->nskl", c, c)
        + np.einsum("mns,lkm->nskl", c, c)
    )
    residual = float(np.max(np.abs(cyclic)))
    return CheckResult(residual < tol and skew < tol, residual)


def commutator_constants(M: StructureTensor) -> StructureTensor:
    """Constants of the bracket A ⊙ B - B ⊙ A."""
    return StructureTensor(M.entries - M.entries.transpose(0, 2, 1))


def su2_constants() -> StructureTensor:
    """[e_s, e_k] = Σ_m ε_{skm} e_m."""
    eps = np.zeros((3, 3, 3))
    for s, k, m in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[m, s, k] = 1.0
        eps[m, k, s] = -1.0
    return StructureTensor(eps)


def akb_tensor(k) -> StructureTensor:
    """Product A ⊙ B = A k B on d x d matrices."""
    kmat = np.asarray(k)
    if kmat.ndim != 2 or kmat.shape[0] != kmat.shape[1]:
        raise DimensionMismatch(f"k must be a square matrix, got shape {kmat.shape}")
    d = kmat.shape[0]
    entries = np.zeros((d * d, d * d, d * d), dtype=kmat.dtype if np.iscomplexobj(kmat) else float)
    for i in range(d):
        for j in range(d):
            for a in range(d):
                for b in range(d):
                    entries[i * d + j, i * d + a, b * d + j] = kmat[a, b]
    return StructureTensor(entries)


def standard_matrix_tensor(d: int) -> StructureTensor:
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    return akb_tensor(np.eye(d))


def family1_tensor() -> StructureTensor:
    """a ⊙ b = [[a11 b11, a12 b12], [a21 b21, a11 b22 + a22 b21]]."""
    entries = np.zeros((4, 4, 4))
    entries[0, 0, 0] = 1.0
    entries[1, 1, 1] = 1.0
    entries[2, 2, 2] = 1.0
    entries[3, 0, 3] = 1.0
    entries[3, 3, 2] = 1.0
    return StructureTensor(entries)


BUILTIN_TENSORS: Dict[str, Callable[[], StructureTensor]] = {
    "family1": family1_tensor,
    "akb": lambda: akb_tensor(np.eye(2)),
    "matrix2": lambda: standard_matrix_tensor(2),
    "matrix3": lambda: standard_matrix_tensor(3),
    "su2": su2_constants,
}

# Alternative spellings accepted by builtin_tensor.
TENSOR_ALIASES: Dict[str, str] = {
    "appendix1-family1": "family1",
    "appendix1-akb": "akb",
}


def builtin_tensor(name: str) -> StructureTensor:
    try:
        return BUILTIN_TENSORS[TENSOR_ALIASES.get(name, name)]()
    except KeyError:
        raise DomainError(f"builtin tensor must be one of {sorted(BUILTIN_TENSORS)}, got {name!r}") from None


def random_triple_check(
    M: StructureTensor, samples: int = 100, seed: int = 0, tol: float = 1e-10
) -> CheckResult:
    """(A ⊙ B) ⊙ C against A ⊙ (B ⊙ C) on random complex vector triples."""
    rng = np.random.default_rng(seed)
    m = M.entries
    shape = (samples, M.n)
    A, B, C = (rng.normal(size=shape) + 1j * rng.normal(size=shape) for _ in range(3))
    ab = np.einsum("gn,kns,gs->gk", A, m, B)
    bc = np.einsum("gn,kns,gs->gk", B, m, C)
    left = np.einsum("gn,kns,gs->gk", ab, m, C)
    right = np.einsum("gn,kns,gs->gk", A, m, bc)
    residual = float(np.max(np.abs(left - right)))
    return CheckResult(residual < tol, residual)


@dataclass(frozen=True, eq=False)
class KernelSample:
    """K(x, y, z) on every node triple of ``grid``; axis 0 is the output."""

    grid: LabelGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        size = len(self.grid)
        if vals.shape != (size, size, size):
            raise DimensionMismatch(f"kernel values must have shape {(size,) * 3}, got {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def kronecker_kernel(grid: LabelGrid) -> KernelSample:
    """Discrete pointwise-product kernel δ(x - y)δ(x - z) with the grid weights divided out."""
    size = len(grid)
    values = np.zeros((size, size, size), dtype=complex)
    idx = np.arange(size)
    values[idx, idx, idx] = 1.0 / grid.weights ** 2
    return KernelSample(grid, values)


def kernel_sample(pair: QuantizerPair, grid: Optional[LabelGrid] = None) -> KernelSample:
    """K(x, y, z) = Tr[D(y) D(z) U(x)] over all node triples."""
    grid = grid or pair.default_grid()
    d = pair.d_stack(grid.points)
    u = pair.u_stack(grid.points)
    return KernelSample(grid, np.einsum("yab,zbc,xca->xyz", d, d, u))


def closed_kernel_sample(
    pair: QuantizerPair,
    grid: Optional[LabelGrid] = None,
    *,
    damping: Optional[float] = None,
) -> KernelSample:
    """K(x, y, z) from the pair's closed-form two-symbol kernel.

    ``damping`` multiplies every entry by exp(-(|y|² + |z|²) / (2 damping²)) on the
    input labels. The Moyal kernel is a pure phase and its sampled
    associativity sums only make sense under such a window; the damped
    identity then holds up to the window's smearing.
    """
    if not pair.has_closed_kernel:
        raise DomainError(f"{pair.name} has no closed-form two-symbol kernel")
    if damping is not None and not damping > 0:
        raise DomainError(f"damping width must be > 0, got {damping}")
    grid = grid or pair.default_grid()
    first = grid.points[:, None, :]
    second = grid.points[None, :, :]
    values = np.empty((len(grid),) * 3, dtype=complex)

    def fill(i: int) -> None:
        values[i] = pair.two_symbol_kernel(first, second, grid.points[i])

    map_ordered(fill, range(len(grid)))
    if damping is not None:
        window = np.exp(-np.sum(grid.points ** 2, axis=1) / (2.0 * damping ** 2))
        values = values * window[None, :, None] * window[None, None, :]
    logger.debug("closed kernel sampled on %d nodes (damping %s)", len(grid), damping)
    return KernelSample(grid, values)


def kernel_assoc_check(
    K: KernelSample,
    tol: Optional[float] = None,
    *,
    budget: Optional[int] = None,
    seed: Optional[int] = None,
    labels: Optional[Sequence[int]] = None,
) -> CheckResult:
    """Quadrature form of the kernel associativity equation over (x, y, l, t).

    The residual is taken relative to max(1, largest side). ``labels``
    restricts the outer indices (x, y, l, t) to a subset of nodes while z
    still runs over the whole grid. Above ``budget`` tuples a seeded random
    subset of ``budget`` tuples is checked instead; without a seed that
    raises ResourceError.
    """
    settings = get_settings()
    tol = settings.kernel_assoc_tolerance if tol is None else tol
    budget = budget or settings.kernel_tuples
    k = K.values
    w = K.grid.weights
    size = len(K.grid)
    if labels is None:
        outer = inner = mixed = k
        count = size
    else:
        idx = np.asarray(labels, dtype=int)
        if idx.ndim != 1 or not len(idx) or idx.min() < 0 or idx.max() >= size:
            raise DomainError(f"labels must be node indices in [0, {size}), got {labels!r}")
        outer = k[idx][:, idx, :]
        inner = k[:, idx][:, :, idx]
        mixed = k[idx][:, :, idx]
        count = len(idx)
    total = count ** 4

    if total <= budget:
        lhs = np.einsum("xyz,z,zlt->xylt", outer, w, inner)
        rhs = np.einsum("xzt,z,zyl->xylt", mixed, w, inner)
    else:
        if seed is None:
            raise ResourceError(
                f"{count}^4 = {total} kernel tuples exceed the budget {budget}; pass a seed to subsample"
            )
        rng = np.random.default_rng(seed)
        x, y, l, t = rng.integers(0, count, size=(4, budget))
        lhs = np.einsum("gz,z,gz->g", outer[x, y, :], w, inner[:, l, t].T)
        rhs = np.einsum("gz,z,gz->g", mixed[x, :, t], w, inner[:, y, l].T)
        logger.info("kernel associativity: %d of %d tuples sampled (seed %d)", budget, total, seed)
    scale = max(1.0, float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))
    residual = float(np.max(np.abs(lhs - rhs))) / scale
    return CheckResult(residual < tol, residual)


__all__ = [
    "StructureTensor",
    "CheckResult",
    "tensor_product",
    "associator",
    "assoc_check",
    "antisymmetry_residual",
    "lie_jacobi_check",
    "commutator_constants",
    "su2_constants",
    "akb_tensor",
    "standard_matrix_tensor",
    "family1_tensor",
    "BUILTIN_TENSORS",
    "TENSOR_ALIASES",
    "builtin_tensor",
    "random_triple_check",
    "KernelSample",
    "kronecker_kernel",
    "kernel_sample",
    "closed_kernel_sample",
    "kernel_assoc_check",
]
