"""Generic operator <-> symbol machinery over a quantizer-dequantizer pair.

A pair is two operator families labelled by points x of a label space:

    f_A(x) = Tr[A U(x)]                         (symbol)
    A      = ∫ f_A(x) D(x) dx                    (reconstruction)
    (f_A ⋆ f_B)(x) = Tr[A B U(x)]               (operator route)
                   = ∫∫ f_A(x1) f_B(x2) K(x1, x2, x) dx1 dx2
    K(x1, ..., xN, x) = Tr[D(x1) ... D(xN) U(x)]  (kernel route)

Integrals are weighted sums over a ``LabelGrid`` (midpoint weights for
rectangular grids). Concrete pairs live in ``starprod.maps``; they implement
``u_stack``/``d_stack`` (and, when they have one, a closed-form two-symbol
kernel). Per-point work runs through ``settings.map_ordered`` in fixed-size
chunks and is reduced in grid order, so results do not depend on the thread
count.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .errors import DimensionMismatch, DomainError, ResourceError
from .fock import FockSpace, Operator, trace_product
from .settings import get_settings, map_ordered

logger = logging.getLogger(__name__)

AxisRange = Tuple[float, float, int]


@dataclass(frozen=True, eq=False)
class LabelGrid:
    """Quadrature nodes ``points`` (G, d) with positive ``weights`` (G,)."""

    points: np.ndarray
    weights: np.ndarray
    axes: Tuple[str, ...] = ()
    ranges: Tuple[AxisRange, ...] = ()

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise DimensionMismatch(f"points must be a (G, d) array, got shape {pts.shape}")
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(pts) == 0 or len(pts) != len(w):
            raise DimensionMismatch(f"need equally many points and weights (>= 1), got {len(pts)} and {len(w)}")
        if np.any(~(w > 0)):
            raise DomainError("quadrature weights must all be > 0")
        axes = tuple(self.axes) or tuple(f"x{i + 1}" for i in range(pts.shape[1]))
        if len(axes) != pts.shape[1]:
            raise DimensionMismatch(f"{len(axes)} axis names for {pts.shape[1]}-dimensional points")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "axes", axes)

    @classmethod
    def rectangular(cls, ranges: Sequence[AxisRange], axes: Sequence[str] = ()) -> "LabelGrid":
        """Tensor-product midpoint grid; each range is ``(lo, hi, n)``."""
        centers = []
        cell = 1.0
        clean: List[AxisRange] = []
        for lo, hi, n in ranges:
            n = int(n)
            if n < 1 or not hi > lo:
                raise DomainError(f"axis range needs hi > lo and n >= 1, got ({lo}, {hi}, {n})")
            h = (hi - lo) / n
            centers.append(lo + h * (np.arange(n) + 0.5))
            cell *= h
            clean.append((float(lo), float(hi), n))
        mesh = np.meshgrid(*centers, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        return cls(pts, np.full(len(pts), cell), tuple(axes), tuple(clean))

    @classmethod
    def from_points(cls, points, weights=None, axes: Sequence[str] = ()) -> "LabelGrid":
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        w = np.ones(len(pts)) if weights is None else weights
        return cls(pts, w, tuple(axes))

    def refined(self) -> "LabelGrid":
        """Same box with twice as many nodes per axis (rectangular grids only)."""
        if not self.ranges:
            raise DomainError("only rectangular grids can be refined")
        return LabelGrid.rectangular([(lo, hi, 2 * n) for lo, hi, n in self.ranges], self.axes)

    @property
    def label_dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.weights)

    def same_nodes(self, other: "LabelGrid") -> bool:
        return self is other or (
            self.points.shape == other.points.shape and np.array_equal(self.points, other.points)
        )


@dataclass(frozen=True, eq=False)
class SymbolField:
    """Complex symbol values aligned with a grid."""

    grid: LabelGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex).reshape(-1)
        if len(vals) != len(self.grid):
            raise DimensionMismatch(f"{len(vals)} values for a grid of {len(self.grid)} points")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def integral(self) -> complex:
        return complex(np.dot(self.grid.weights, self.values))

    def max_imag(self) -> float:
        return float(np.max(np.abs(self.values.imag)))

    def sup_distance(self, other: "SymbolField") -> float:
        if len(other.values) != len(self.values):
            raise DimensionMismatch("fields live on grids of different size")
        return float(np.max(np.abs(self.values - other.values)))

    def scaled(self, factor) -> "SymbolField":
        return SymbolField(self.grid, self.values * factor)

    def __add__(self, other: "SymbolField") -> "SymbolField":
        self.sup_distance(other)
        return SymbolField(self.grid, self.values + other.values)

    def __sub__(self, other: "SymbolField") -> "SymbolField":
        self.sup_distance(other)
        return SymbolField(self.grid, self.values - other.values)

    def to_frame(self) -> pd.DataFrame:
        """One row per grid point: label coordinates, ``re``, ``im``."""
        frame = pd.DataFrame(self.grid.points, columns=list(self.grid.axes))
        frame["re"] = self.values.real
        frame["im"] = self.values.imag
        return frame


def _chunk_slices(total: int, size: Optional[int] = None) -> List[slice]:
    size = size or get_settings().chunk_points
    return [slice(start, min(start + size, total)) for start in range(0, total, size)]


class QuantizerPair:
    """Base class of every map.

    Subclasses set ``name``/``axes``/capability flags and implement
    ``u_stack``, ``d_stack`` and ``default_grid``. ``symbol_values`` and
    ``dequantize`` may be overridden with cheaper contractions.
    """

    name = "pair"
    axes: Tuple[str, ...] = ()
    # Tr U(x) = 1 at every point
    normalized = False
    # Tr[U(x') D(x)] reproduces δ(x' - x)
    delta_complete = True
    # Tr D(x), constant over the label space; None when not constant
    trace_density: Optional[complex] = None

    def __init__(self, space: FockSpace):
        self.space = space

    @property
    def label_dim(self) -> int:
        return len(self.axes)

    def _points(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        if pts.shape[-1] != self.label_dim:
            raise DimensionMismatch(
                f"{self.name} labels have {self.label_dim} coordinates, got {pts.shape[-1]}"
            )
        return pts

    def u_stack(self, points) -> np.ndarray:
        raise NotImplementedError

    def d_stack(self, points) -> np.ndarray:
        raise NotImplementedError

    def default_grid(self) -> LabelGrid:
        raise NotImplementedError

    def u_at(self, point) -> Operator:
        return Operator(self.space, self.u_stack(self._points(point))[0])

    def d_at(self, point) -> Operator:
        return Operator(self.space, self.d_stack(self._points(point))[0])

    def two_symbol_kernel(self, first, second, out) -> Optional[np.ndarray]:
        """Closed-form Tr[D(first) D(second) U(out)], broadcast over leading axes.

        Returns None when the pair has no closed form.
        """
        return None

    @property
    def has_closed_kernel(self) -> bool:
        return type(self).two_symbol_kernel is not QuantizerPair.two_symbol_kernel

    def symbol_values(self, entries: np.ndarray, points) -> np.ndarray:
        """Tr[A U(x)] for every point."""
        pts = self._points(points)

        def run(sl: slice) -> np.ndarray:
            return np.einsum("ij,gji->g", entries, self.u_stack(pts[sl]))

        return np.concatenate(map_ordered(run, _chunk_slices(len(pts))))

    def dequantize(self, coeffs, points) -> np.ndarray:
        """Σ_i coeffs_i D(x_i) as a dense matrix."""
        pts = self._points(points)
        coeffs = np.asarray(coeffs, dtype=complex)

        def run(sl: slice) -> np.ndarray:
            return np.tensordot(coeffs[sl], self.d_stack(pts[sl]), axes=1)

        acc = np.zeros((self.space.dim, self.space.dim), dtype=complex)
        for part in map_ordered(run, _chunk_slices(len(pts))):
            acc += part
        return acc

    def trace_from_symbol(self, field: SymbolField) -> complex:
        """Tr A recovered from its symbol as ∫ f_A(x) Tr D(x) dx."""
        if self.trace_density is None:
            raise DomainError(f"{self.name} has no constant Tr D(x)")
        return complex(self.trace_density * field.integral())

    def trace_defect(self, grid: Optional[LabelGrid] = None) -> float:
        """max |Tr U(x) - 1| over the grid (zero for exactly normalized pairs)."""
        grid = grid or self.default_grid()
        ones = self.symbol_values(np.eye(self.space.dim, dtype=complex), grid.points)
        return float(np.max(np.abs(ones - 1.0)))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r}, dim={self.space.dim})"


def _check_space(op: Operator, pair: QuantizerPair) -> None:
    if op.dim != pair.space.dim:
        raise DimensionMismatch(f"operator dim {op.dim} does not match {pair.name} dim {pair.space.dim}")


def symbol_field(A: Operator, pair: QuantizerPair, grid: Optional[LabelGrid] = None) -> SymbolField:
    grid = grid or pair.default_grid()
    _check_space(A, pair)
    return SymbolField(grid, pair.symbol_values(A.entries, grid.points))


def reconstruct(f: SymbolField, pair: QuantizerPair) -> Operator:
    """Quadrature form of ∫ f(x) D(x) dx."""
    coeffs = f.grid.weights * f.values
    return Operator(pair.space, pair.dequantize(coeffs, f.grid.points))


def pairing_kernel(pair: QuantizerPair, x_prime, x) -> complex:
    """Tr[U(x') D(x)]; a delta in x - x' only for ``delta_complete`` pairs."""
    return trace_product([pair.u_at(x_prime), pair.d_at(x)])


def star_via_operators(
    A: Operator, B: Operator, pair: QuantizerPair, grid: Optional[LabelGrid] = None
) -> SymbolField:
    _check_space(A, pair)
    _check_space(B, pair)
    return symbol_field(A @ B, pair, grid)


def star_kernel(pair: QuantizerPair, inputs: Sequence, out) -> complex:
    """Tr[D(x1) ... D(xN) U(x)] by explicit operator products."""
    if len(inputs) < 2:
        raise DomainError(f"star_kernel needs N >= 2 inputs, got {len(inputs)}")
    return trace_product([pair.d_at(x) for x in inputs] + [pair.u_at(out)])


def star_via_kernel(
    fA: SymbolField,
    fB: SymbolField,
    pair: QuantizerPair,
    out_grid: Optional[LabelGrid] = None,
) -> SymbolField:
    """Double quadrature of fA(x1) fB(x2) K(x1, x2, x) per output point.

    Pairs with a closed-form kernel are integrated against it directly. For
    the others the double sum is contracted one index at a time through the
    dequantizers, which is the same quadrature evaluated in a cheaper order.
    """
    if not fA.grid.same_nodes(fB.grid):
        raise DimensionMismatch("star_via_kernel needs both symbols on the same grid")
    grid = fA.grid
    out_grid = out_grid or grid
    a = grid.weights * fA.values
    b = grid.weights * fB.values

    if not pair.has_closed_kernel:
        left = pair.dequantize(a, grid.points)
        right = pair.dequantize(b, grid.points)
        return SymbolField(out_grid, pair.symbol_values(left @ right, out_grid.points))

    first = grid.points[:, None, :]
    second = grid.points[None, :, :]

    def at(y: np.ndarray) -> complex:
        kernel = pair.two_symbol_kernel(first, second, y)
        return complex(a @ kernel @ b)

    logger.debug("kernel-route star on %d x %d nodes, %d outputs", len(grid), len(grid), len(out_grid))
    return SymbolField(out_grid, np.array(map_ordered(at, list(out_grid.points))))


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    method: str
    evaluations: int
    seed: Optional[int] = None


def _tuple_terms(stack: np.ndarray, coeffs: Sequence[np.ndarray], idx: np.ndarray) -> np.ndarray:
    """Π_k c_k[i_k] · Tr[Π_k D(x_{i_k})] for each row of ``idx``."""
    weight = np.ones(len(idx), dtype=complex)
    for k, c in enumerate(coeffs):
        weight = weight * c[idx[:, k]]
    prod = stack[idx[:, 0]]
    for k in range(1, idx.shape[1] - 1):
        prod = prod @ stack[idx[:, k]]
    traces = np.einsum("bij,bji->b", prod, stack[idx[:, -1]])
    return weight * traces


def _nfold_trace(
    states: Sequence[Operator],
    pair: QuantizerPair,
    grid: Optional[LabelGrid],
    *,
    seed: Optional[int],
    budget: Optional[int],
    samples: Optional[int],
) -> QuadratureResult:
    grid = grid or pair.default_grid()
    settings = get_settings()
    budget = budget or settings.quadrature_tuples
    coeffs = [grid.weights * symbol_field(s, pair, grid).values for s in states]
    stack = pair.d_stack(grid.points)
    size = len(grid)
    order = len(states)
    total = size ** order

    if total <= budget and order == 2:
        flat = stack.reshape(size, -1)
        flat_t = stack.transpose(0, 2, 1).reshape(size, -1)
        # gram[i, j] = Tr[D_i D_j]
        gram = flat @ flat_t.T
        return QuadratureResult(complex(coeffs[0] @ gram @ coeffs[1]), "grid", total)

    if total <= budget:
        acc = 0j
        chunk = max(1, settings.chunk_points * 4)
        for start in range(0, total, chunk):
            flat_idx = np.arange(start, min(start + chunk, total))
            idx = np.stack(np.unravel_index(flat_idx, (size,) * order), axis=1)
            acc += complex(_tuple_terms(stack, coeffs, idx).sum())
        return QuadratureResult(acc, "grid", total)

    if seed is None:
        raise ResourceError(
            f"{size}^{order} = {total} quadrature tuples exceed the budget {budget}; "
            "pass a seed for the Monte-Carlo estimate"
        )
    # importance sampling: node i drawn with probability |c_i| / Σ|c|
    rng = np.random.default_rng(seed)
    count = samples or settings.monte_carlo_samples
    mass = [np.abs(c) for c in coeffs]
    totals = [float(m.sum()) for m in mass]
    if min(totals) == 0.0:
        return QuadratureResult(0j, "monte-carlo", 0, seed)
    idx = np.stack([rng.choice(size, size=count, p=m / t) for m, t in zip(mass, totals)], axis=1)
    terms = _tuple_terms(stack, coeffs, idx)
    for k, m in enumerate(mass):
        terms = terms / (m[idx[:, k]] / totals[k])
    logger.info("trace quadrature: %d tuples over budget, Monte-Carlo with %d samples (seed %d)", total, count, seed)
    return QuadratureResult(complex(terms.mean()), "monte-carlo", count, seed)


def trace_power(
    rho: Operator,
    pair: QuantizerPair,
    N: int,
    grid: Optional[LabelGrid] = None,
    *,
    seed: Optional[int] = None,
    budget: Optional[int] = None,
    samples: Optional[int] = None,
) -> QuadratureResult:
    """Tr ρ^N as the N-fold quadrature of Π W_ρ(x_i) · Tr[Π D(x_i)].

    Above ``budget`` tuples a ResourceError is raised unless ``seed`` is
    given, in which case an importance-sampled Monte-Carlo estimate is
    returned with the seed recorded.
    """
    if N < 2:
        raise DomainError(f"trace_power needs N >= 2, got {N}")
    return _nfold_trace([rho] * N, pair, grid, seed=seed, budget=budget, samples=samples)


def fidelity(
    rho1: Operator,
    rho2: Operator,
    pair: QuantizerPair,
    grid: Optional[LabelGrid] = None,
    *,
    seed: Optional[int] = None,
    budget: Optional[int] = None,
    samples: Optional[int] = None,
) -> QuadratureResult:
    """Tr ρ1 ρ2 by the two-fold quadrature of trace_power."""
    return _nfold_trace([rho1, rho2], pair, grid, seed=seed, budget=budget, samples=samples)


def poisson_bracket(
    fA: SymbolField, fB: SymbolField, pair: QuantizerPair, out_grid: Optional[LabelGrid] = None
) -> SymbolField:
    """fA ⋆ fB - fB ⋆ fA through the kernel route."""
    return star_via_kernel(fA, fB, pair, out_grid) - star_via_kernel(fB, fA, pair, out_grid)


def commutator_field(
    A: Operator, B: Operator, pair: QuantizerPair, grid: Optional[LabelGrid] = None
) -> SymbolField:
    """Operator-route twin of ``poisson_bracket``: the symbol of AB - BA."""
    return symbol_field(A @ B - B @ A, pair, grid)


@dataclass(frozen=True)
class IntertwineResult:
    field: SymbolField
    reconstruction_residual: float


def intertwining_kernel(
    source: QuantizerPair, target: QuantizerPair, source_grid: LabelGrid, target_grid: LabelGrid
) -> np.ndarray:
    """Matrix K[x, y] = Tr[D_source(x) U_target(y)] (dense; small grids)."""
    if source.space.dim != target.space.dim:
        raise DimensionMismatch("source and target pairs live on different spaces")
    d = source.d_stack(source_grid.points).reshape(len(source_grid), -1)
    u_t = target.u_stack(target_grid.points).transpose(0, 2, 1).reshape(len(target_grid), -1)
    return d @ u_t.T


def intertwine(
    f_source: SymbolField,
    source: QuantizerPair,
    target: QuantizerPair,
    target_grid: Optional[LabelGrid] = None,
) -> IntertwineResult:
    """Convert a symbol of ``source`` into the symbol of the same operator under ``target``.

    φ(y) = Σ_x w_x f(x) Tr[D_source(x) U_target(y)], contracted through the
    dequantizer sum. The inverse direction is the same call with the pairs
    swapped. The relative sup residual of re-sampling the reconstructed
    operator under ``source`` is returned, and logged when above the
    configured warning level.
    """
    if source.space.dim != target.space.dim:
        raise DimensionMismatch("source and target pairs live on different spaces")
    target_grid = target_grid or target.default_grid()
    grid = f_source.grid
    operator = source.dequantize(grid.weights * f_source.values, grid.points)

    resampled = source.symbol_values(operator, grid.points)
    scale = max(float(np.max(np.abs(f_source.values))), 1e-300)
    residual = float(np.max(np.abs(resampled - f_source.values))) / scale
    if residual > get_settings().reconstruction_warning:
        logger.warning(
            "intertwine %s -> %s: source field reconstructs with relative residual %.2e",
            source.name, target.name, residual,
        )
    values = target.symbol_values(operator, target_grid.points)
    return IntertwineResult(SymbolField(target_grid, values), residual)


__all__ = [
    "LabelGrid",
    "SymbolField",
    "QuantizerPair",
    "symbol_field",
    "reconstruct",
    "pairing_kernel",
    "star_via_operators",
    "star_kernel",
    "star_via_kernel",
    "QuadratureResult",
    "trace_power",
    "fidelity",
    "poisson_bracket",
    "commutator_field",
    "IntertwineResult",
    "intertwining_kernel",
    "intertwine",
]
