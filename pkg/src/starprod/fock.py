"""Truncated Fock-space operator algebra.

Everything in the package is carried by dense ``dim x dim`` complex matrices
over the number basis |0>, ..., |dim-1>:

    a |n>  = sqrt(n) |n-1>          q = (a + a†)/sqrt(2)
    a†|n>  = sqrt(n+1) |n+1>        p = (a - a†)/(i sqrt(2))

Two independent routes to displaced operators are provided:

* ``displacement`` exponentiates the truncated generator alpha a† - conj(alpha) a
  (scipy's scaling-and-squaring ``expm``) and refuses when the vacuum overlap
  shows the block is too small;
* ``normal_ordered_elements`` evaluates the exact matrix elements of
  c·exp(λa†)·t^(a†a)·exp(μa), which for m >= n read

      c · sqrt(n!/m!) · λ^(m-n) · t^n · L_n^(m-n)(-λμ/t)

  (m < n swaps the roles of λ and μ). Displacements and displaced number
  powers D(α) t^(a†a) D(α)† are special cases, so quantizers built on them carry
  no truncation error of their own.

The top-level defect of [a, a†] (entry (N-1, N-1) equals 1-N) is left as is.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np
from scipy.linalg import expm
from scipy.special import eval_genlaguerre, gammaln

from .errors import DimensionMismatch, DomainError, TruncationError
from .settings import get_settings

logger = logging.getLogger(__name__)

ComplexLabel = complex
VALID_STATE_KINDS = ("fock", "coherent", "thermal")


def _default_tail() -> float:
    return get_settings().state_tail


@dataclass(frozen=True)
class FockSpace:
    """Truncation dimension plus the admissible tail weight of states."""

    dim: int
    tail_tolerance: float = field(default_factory=_default_tail)

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 2:
            raise DomainError(f"dim must be an integer >= 2, got {self.dim!r}")
        if not 0.0 <= self.tail_tolerance < 1.0:
            raise DomainError(f"tail_tolerance must lie in [0, 1), got {self.tail_tolerance!r}")

    def padded(self, extra: int) -> "FockSpace":
        return FockSpace(int(self.dim) + int(extra), self.tail_tolerance)


class Operator:
    """Immutable dense operator on a ``FockSpace``."""

    __slots__ = ("space", "entries")

    def __init__(self, space: FockSpace, entries):
        arr = np.array(entries, dtype=complex)
        if arr.shape != (space.dim, space.dim):
            raise DimensionMismatch(
                f"entries must have shape ({space.dim}, {space.dim}), got {arr.shape}"
            )
        arr.setflags(write=False)
        self.space = space
        self.entries = arr

    @classmethod
    def identity(cls, space: FockSpace) -> "Operator":
        return cls(space, np.eye(space.dim))

    @classmethod
    def zeros(cls, space: FockSpace) -> "Operator":
        return cls(space, np.zeros((space.dim, space.dim)))

    @property
    def dim(self) -> int:
        return self.space.dim

    def adjoint(self) -> "Operator":
        return Operator(self.space, self.entries.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self.entries))

    def distance(self, other: "Operator") -> float:
        """Frobenius distance to ``other``."""
        _check_same(self, other)
        return float(np.linalg.norm(self.entries - other.entries))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0) <= tol)

    def compress(self, space: FockSpace) -> "Operator":
        """Top-left block on a smaller (or equal) space."""
        if space.dim > self.dim:
            raise DimensionMismatch(f"cannot compress dim {self.dim} onto larger dim {space.dim}")
        return Operator(space, self.entries[: space.dim, : space.dim])

    def __matmul__(self, other: "Operator") -> "Operator":
        if not isinstance(other, Operator):
            return NotImplemented
        _check_same(self, other)
        return Operator(self.space, self.entries @ other.entries)

    def __add__(self, other: "Operator") -> "Operator":
        if not isinstance(other, Operator):
            return NotImplemented
        _check_same(self, other)
        return Operator(self.space, self.entries + other.entries)

    def __sub__(self, other: "Operator") -> "Operator":
        if not isinstance(other, Operator):
            return NotImplemented
        _check_same(self, other)
        return Operator(self.space, self.entries - other.entries)

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.entries)

    def __mul__(self, scalar) -> "Operator":
        if isinstance(scalar, Operator):
            return NotImplemented
        return Operator(self.space, self.entries * complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "Operator":
        return Operator(self.space, self.entries / complex(scalar))

    def __repr__(self) -> str:
        return f"Operator(dim={self.dim})"


def _check_same(*ops: Operator) -> None:
    dims = {op.dim for op in ops}
    if len(dims) > 1:
        raise DimensionMismatch(f"operators live on different spaces: dims {sorted(dims)}")


class Ladder(NamedTuple):
    a: Operator
    a_dagger: Operator
    q: Operator
    p: Operator
    identity: Operator


@lru_cache(maxsize=16)
def _annihilator(dim: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)
    a.setflags(write=False)
    return a


def build_ladder(space: FockSpace) -> Ladder:
    a = _annihilator(space.dim)
    ad = a.conj().T
    return Ladder(
        a=Operator(space, a),
        a_dagger=Operator(space, ad),
        q=Operator(space, (a + ad) / np.sqrt(2.0)),
        p=Operator(space, (a - ad) / (1j * np.sqrt(2.0))),
        identity=Operator.identity(space),
    )


def number_operator(space: FockSpace) -> Operator:
    return Operator(space, np.diag(np.arange(space.dim, dtype=float)))


def commutator(A: Operator, B: Operator) -> Operator:
    return A @ B - B @ A


def displacement(space: FockSpace, alpha: ComplexLabel) -> Operator:
    """D(α) = exp(α a† - conj(α) a) exponentiated inside the truncated block.

    Raises TruncationError when <0|D(α)|0> misses exp(-|α|²/2) by more than the
    configured bound, which means ``dim`` is too small for this ``alpha``.
    """
    alpha = complex(alpha)
    a = _annihilator(space.dim)
    gen = alpha * a.conj().T - alpha.conjugate() * a
    entries = expm(gen)
    bound = get_settings().displacement_origin
    defect = abs(entries[0, 0] - np.exp(-abs(alpha) ** 2 / 2.0))
    if defect > bound:
        raise TruncationError(
            f"displacement({alpha:.4g}) in dim {space.dim}: vacuum overlap off by "
            f"{defect:.2e} (bound {bound:.0e}); increase dim"
        )
    return Operator(space, entries)


def coherent_amplitudes(space: FockSpace, alpha: ComplexLabel) -> np.ndarray:
    """<n|α> = exp(-|α|²/2) α^n / sqrt(n!) by the power-series recurrence."""
    alpha = complex(alpha)
    out = np.empty(space.dim, dtype=complex)
    out[0] = np.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(1, space.dim):
        out[n] = out[n - 1] * alpha / np.sqrt(n)
    return out


def _real_or_complex_power(base, exponents: np.ndarray) -> np.ndarray:
    if np.isreal(base):
        return np.power(float(np.real(base)), exponents.astype(float))
    return np.power(complex(base), exponents)


def number_power(space: FockSpace, base: float) -> Operator:
    """Diagonal base^(a†a); negative bases use integer exponents only."""
    if base == 0:
        raise DomainError("number_power base must be non-zero, got 0")
    return Operator(space, np.diag(_real_or_complex_power(base, np.arange(space.dim))))


def parity(space: FockSpace) -> Operator:
    return number_power(space, -1.0)


def normal_ordered_elements(dim: int, scale, create, base, annihilate) -> np.ndarray:
    """Fock elements of ``scale · exp(create a†) · base^(a†a) · exp(annihilate a)``.

    ``scale``, ``create`` and ``annihilate`` may be arrays of a common shape S;
    the result then has shape S + (dim, dim). The Laguerre argument
    -create·annihilate/base has to be real, which holds for every displaced
    number power and displacement built in this package.
    """
    if base == 0:
        raise DomainError("base must be non-zero, got 0")
    scale = np.asarray(scale, dtype=complex)
    create = np.asarray(create, dtype=complex)
    annihilate = np.asarray(annihilate, dtype=complex)
    shape = np.broadcast(scale, create, annihilate).shape
    lead = shape + (1, 1)
    c = np.broadcast_to(scale, shape).reshape(lead)
    lam = np.broadcast_to(create, shape).reshape(lead)
    mu = np.broadcast_to(annihilate, shape).reshape(lead)

    arg = -(lam * mu) / base
    if np.any(np.abs(arg.imag) > 1e-12 * (1.0 + np.abs(arg.real))):
        raise DomainError("normal-ordered elements need a real Laguerre argument")

    levels = np.arange(dim)
    row = levels[:, None]
    col = levels[None, :]
    low = np.minimum(row, col)
    gap = np.abs(row - col)
    ratio = np.exp(0.5 * (gammaln(low + 1.0) - gammaln(np.maximum(row, col) + 1.0)))
    lag = eval_genlaguerre(low, gap, arg.real)
    off = np.where(row >= col, np.power(lam, gap), np.power(mu, gap))
    return c * ratio * off * _real_or_complex_power(base, low) * lag


def displaced_number_power_stack(space: FockSpace, alphas, base: float) -> np.ndarray:
    """Stack of D(α) base^(a†a) D(α)† for every α in ``alphas``."""
    if base == 0:
        raise DomainError("base must be non-zero, got 0")
    alphas = np.asarray(alphas, dtype=complex)
    shift = 1.0 - base
    scale = np.exp(-shift * np.abs(alphas) ** 2)
    return normal_ordered_elements(space.dim, scale, shift * alphas, base, shift * alphas.conj())


def displaced_number_power(space: FockSpace, alpha: ComplexLabel, base: float) -> Operator:
    return Operator(space, displaced_number_power_stack(space, complex(alpha), base))


def displacement_elements(space: FockSpace, alpha: ComplexLabel) -> Operator:
    """Closed-form D(α) elements (Laguerre form), free of truncation error."""
    alpha = complex(alpha)
    entries = normal_ordered_elements(
        space.dim, np.exp(-abs(alpha) ** 2 / 2.0), alpha, 1.0, -alpha.conjugate()
    )
    return Operator(space, entries)


def _parse_number(raw: str) -> complex:
    text = raw.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(text)
    except ValueError:
        raise DomainError(f"cannot parse a number from {raw!r}") from None


@dataclass(frozen=True)
class StateSpec:
    """``fock:n``, ``coherent:alpha`` or ``thermal:nbar``."""

    kind: str
    value: complex

    @classmethod
    def parse(cls, text: str) -> "StateSpec":
        kind, _, raw = str(text).partition(":")
        kind = kind.strip().lower()
        if kind not in VALID_STATE_KINDS:
            raise DomainError(f"state kind must be one of {VALID_STATE_KINDS}, got {kind!r}")
        if not raw.strip():
            raise DomainError(f"state {text!r} needs a value after ':'")
        return cls(kind, _parse_number(raw))

    def __str__(self) -> str:
        if self.kind == "coherent":
            return f"coherent:{self.value.real:g}{self.value.imag:+g}i"
        return f"{self.kind}:{self.value.real:g}"


def density_from_vector(space: FockSpace, vec: Sequence[complex]) -> Operator:
    v = np.asarray(vec, dtype=complex)
    return Operator(space, np.outer(v, v.conj()))


def make_state(space: FockSpace, kind: Union[str, StateSpec]) -> Operator:
    """Density operator for a standard state, renormalized inside the block.

    Raises TruncationError when the weight outside the block exceeds
    ``space.tail_tolerance``.
    """
    spec = kind if isinstance(kind, StateSpec) else StateSpec.parse(kind)
    if spec.kind == "fock":
        n = spec.value.real
        if spec.value.imag != 0 or n != int(n) or not 0 <= n < space.dim:
            raise DomainError(f"fock level must be an integer in [0, {space.dim}), got {spec.value!r}")
        vec = np.zeros(space.dim, dtype=complex)
        vec[int(n)] = 1.0
        return density_from_vector(space, vec)

    if spec.kind == "coherent":
        vec = coherent_amplitudes(space, spec.value)
        tail = max(0.0, 1.0 - float(np.vdot(vec, vec).real))
        if tail > space.tail_tolerance:
            raise TruncationError(
                f"coherent({spec.value:.4g}) leaves weight {tail:.2e} above dim {space.dim}"
            )
        return density_from_vector(space, vec / np.linalg.norm(vec))

    nbar = spec.value.real
    if spec.value.imag != 0 or nbar < 0:
        raise DomainError(f"thermal occupation must be a real number >= 0, got {spec.value!r}")
    if nbar == 0:
        return make_state(space, StateSpec("fock", 0))
    ratio = nbar / (1.0 + nbar)
    tail = ratio ** space.dim
    if tail > space.tail_tolerance:
        raise TruncationError(f"thermal({nbar:g}) leaves weight {tail:.2e} above dim {space.dim}")
    pops = ratio ** np.arange(space.dim)
    return Operator(space, np.diag(pops / pops.sum()))


def trace_product(ops: Iterable[Operator]) -> complex:
    """Tr[op_1 ... op_k], accumulated left to right; the last product is never formed."""
    ops = list(ops)
    if not ops:
        raise DomainError("trace_product needs at least one operator")
    _check_same(*ops)
    if len(ops) == 1:
        return ops[0].trace()
    acc = ops[0].entries
    for op in ops[1:-1]:
        acc = acc @ op.entries
    return complex(np.einsum("ij,ji->", acc, ops[-1].entries))


__all__ = [
    "ComplexLabel",
    "VALID_STATE_KINDS",
    "FockSpace",
    "Operator",
    "Ladder",
    "build_ladder",
    "number_operator",
    "commutator",
    "displacement",
    "coherent_amplitudes",
    "number_power",
    "parity",
    "normal_ordered_elements",
    "displaced_number_power_stack",
    "displaced_number_power",
    "displacement_elements",
    "StateSpec",
    "density_from_vector",
    "make_state",
    "trace_product",
]
