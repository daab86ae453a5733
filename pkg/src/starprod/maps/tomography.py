"""Symplectic tomography: U(X, μ, ν) = δ(X - μq - νp), D = (1/2π)·exp(iX - iνp - iμq).

Finite blocks have a discrete spectrum, so the delta becomes a Gaussian of
width ``delta_width`` placed at every eigenvalue of μq + νp. The eigenproblem
is solved in a padded block (dim + oversample) and the eigenvectors are cut
back to the working block: the eigenpairs of a truncated quadrature are the
Gauss-Hermite nodes, which only resolve the low levels when the padding is
generous. Consequences that hold exactly:

* ∫ w(X, μ, ν) dX = Tr ρ for every frame;
* w(λX, λμ, λν; |λ|δ) = w(X, μ, ν; δ)/|λ|.

The dequantizer uses exp(-iμq - iνp) = D(ξ) with ξ = (ν - iμ)/sqrt(2),
exponentiated in the padded block as well.

Tomographic symbols are not a complete set: Tr[U(x') D(x)] is no delta, and
the pair says so through ``delta_complete = False``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..errors import BranchError, DegenerateFrame, DomainError, ResourceError
from ..fock import FockSpace, Operator, build_ladder, commutator, displacement
from ..framework import LabelGrid, QuantizerPair, SymbolField
from ..settings import get_settings, map_ordered

logger = logging.getLogger(__name__)

Frame = Tuple[float, float]

# Distinct (mu, nu) frames kept per pair.
FRAME_CACHE_SIZE = 1024


@dataclass(frozen=True)
class TomoPoint:
    X: float
    mu: float
    nu: float

    def __post_init__(self):
        if self.mu == 0 and self.nu == 0:
            raise DegenerateFrame("tomographic frame (mu, nu) must not be (0, 0)")

    @classmethod
    def from_angle(cls, X: float, theta: float, squeeze: float = 0.0) -> "TomoPoint":
        """μ = e^λ cos θ, ν = e^-λ sin θ."""
        return cls(X, float(np.exp(squeeze) * np.cos(theta)), float(np.exp(-squeeze) * np.sin(theta)))

    def as_array(self) -> np.ndarray:
        return np.array([self.X, self.mu, self.nu])


def _coords(point) -> np.ndarray:
    if isinstance(point, TomoPoint):
        return point.as_array()
    return np.asarray(point, dtype=float)


class TomographicPair(QuantizerPair):
    name = "tomographic"
    axes = ("X", "mu", "nu")
    normalized = False
    delta_complete = False

    def __init__(self, space: FockSpace, delta_width: Optional[float] = None, *, oversample: Optional[int] = None):
        super().__init__(space)
        settings = get_settings()
        self.delta_width = float(settings.delta_width if delta_width is None else delta_width)
        if not self.delta_width > 0:
            raise DomainError(f"delta_width must be > 0, got {delta_width!r}")
        self.oversample = int(settings.oversample if oversample is None else oversample)
        if self.oversample < 0:
            raise DomainError(f"oversample must be >= 0, got {oversample!r}")
        self.padded = space.padded(self.oversample)
        ladder = build_ladder(self.padded)
        self._q = ladder.q.entries
        self._p = ladder.p.entries
        self._spectra = lru_cache(maxsize=FRAME_CACHE_SIZE)(self._eigen)
        self._shifts = lru_cache(maxsize=FRAME_CACHE_SIZE)(self._shift_block)
        self.name = f"tomographic:{self.delta_width:g}"

    def spectrum(self, mu: float, nu: float) -> Tuple[np.ndarray, np.ndarray]:
        """Eigenvalues of μq + νp (padded) and eigenvectors cut to the block."""
        return self._spectra(float(mu), float(nu))

    def shift(self, mu: float, nu: float) -> np.ndarray:
        """Block of exp(-iμq - iνp)."""
        return self._shifts(float(mu), float(nu))

    def cache_info(self) -> Dict[str, int]:
        """Frames currently held by the spectrum and shift caches."""
        return {"spectra": self._spectra.cache_info().currsize, "shifts": self._shifts.cache_info().currsize}

    def _eigen(self, mu: float, nu: float) -> Tuple[np.ndarray, np.ndarray]:
        vals, vecs = np.linalg.eigh(mu * self._q + nu * self._p)
        return vals, np.ascontiguousarray(vecs[: self.space.dim, :])

    def _shift_block(self, mu: float, nu: float) -> np.ndarray:
        xi = complex(nu, -mu) / np.sqrt(2.0)
        return np.ascontiguousarray(displacement(self.padded, xi).entries[: self.space.dim, : self.space.dim])

    def smoothing(self, offsets: np.ndarray) -> np.ndarray:
        width = self.delta_width
        return np.exp(-0.5 * (offsets / width) ** 2) / (np.sqrt(2.0 * np.pi) * width)

    @staticmethod
    def _frames(pts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        frames, inverse = np.unique(pts[:, 1:], axis=0, return_inverse=True)
        if np.any((frames[:, 0] == 0) & (frames[:, 1] == 0)):
            raise DegenerateFrame("tomographic frame (mu, nu) must not be (0, 0)")
        return frames, inverse.reshape(-1)

    def u_stack(self, points) -> np.ndarray:
        pts = self._points(points)
        out = np.empty((len(pts), self.space.dim, self.space.dim), dtype=complex)
        for g, (x, mu, nu) in enumerate(pts):
            if mu == 0 and nu == 0:
                raise DegenerateFrame("tomographic frame (mu, nu) must not be (0, 0)")
            vals, vecs = self.spectrum(mu, nu)
            out[g] = (vecs * self.smoothing(x - vals)) @ vecs.conj().T
        return out

    def d_stack(self, points) -> np.ndarray:
        pts = self._points(points)
        out = np.empty((len(pts), self.space.dim, self.space.dim), dtype=complex)
        for g, (x, mu, nu) in enumerate(pts):
            if mu == 0 and nu == 0:
                raise DegenerateFrame("tomographic frame (mu, nu) must not be (0, 0)")
            out[g] = np.exp(1j * x) / (2.0 * np.pi) * self.shift(mu, nu)
        return out

    def symbol_values(self, entries: np.ndarray, points) -> np.ndarray:
        pts = self._points(points)
        frames, inverse = self._frames(pts)
        values = np.empty(len(pts), dtype=complex)

        def run(f: int) -> Tuple[np.ndarray, np.ndarray]:
            vals, vecs = self.spectrum(*frames[f])
            # <v_k|A|v_k> for every eigenvector of the frame
            weights = np.einsum("ik,ij,jk->k", vecs.conj(), entries, vecs)
            sel = np.nonzero(inverse == f)[0]
            return sel, self.smoothing(pts[sel, 0][:, None] - vals[None, :]) @ weights

        for sel, vals in map_ordered(run, range(len(frames))):
            values[sel] = vals
        return values

    def dequantize(self, coeffs, points) -> np.ndarray:
        pts = self._points(points)
        coeffs = np.asarray(coeffs, dtype=complex)
        frames, inverse = self._frames(pts)

        def run(f: int) -> np.ndarray:
            sel = inverse == f
            phase = complex(np.sum(coeffs[sel] * np.exp(1j * pts[sel, 0]))) / (2.0 * np.pi)
            return phase * self.shift(*frames[f])

        acc = np.zeros((self.space.dim, self.space.dim), dtype=complex)
        for part in map_ordered(run, range(len(frames))):
            acc += part
        return acc

    def default_grid(self) -> LabelGrid:
        grids = get_settings().grids
        spec = grids.get("tomographic_x") or {"lo": -8.0, "hi": 8.0, "n": 161}
        return tomo_grid((float(spec["lo"]), float(spec["hi"]), int(spec["n"])),
                         angle_frames(int(grids.get("tomographic_angles", 8))))

    def characteristic(self, rho: Operator, mu: float, nu: float) -> complex:
        """∫ w(X, μ, ν) e^{iX} dX = Σ_k <v_k|ρ|v_k> e^{iλ_k} · e^{-δ²/2}, exactly."""
        vals, vecs = self.spectrum(mu, nu)
        weights = np.einsum("ik,ij,jk->k", vecs.conj(), rho.entries, vecs)
        return complex(np.dot(weights, np.exp(1j * vals)) * np.exp(-0.5 * self.delta_width ** 2))


def tomo_pair(space: FockSpace, delta_width: Optional[float] = None, *, oversample: Optional[int] = None) -> TomographicPair:
    return TomographicPair(space, delta_width, oversample=oversample)


def tomo_characteristic(rho: Operator, pair: TomographicPair, mu: float, nu: float) -> complex:
    if mu == 0 and nu == 0:
        raise DegenerateFrame("tomographic frame (mu, nu) must not be (0, 0)")
    return pair.characteristic(rho, mu, nu)


def angle_frames(count: int, squeeze: float = 0.0) -> List[Frame]:
    """``count`` frames θ = kπ/count on the (squeezed) unit circle."""
    if count < 1:
        raise DomainError(f"need at least one frame, got {count}")
    thetas = np.pi * np.arange(count) / count
    return [(float(np.exp(squeeze) * np.cos(t)), float(np.exp(-squeeze) * np.sin(t))) for t in thetas]


def tomo_grid(x_range: Tuple[float, float, int], frames: Sequence[Frame]) -> LabelGrid:
    """Midpoint X nodes repeated for each frame; weights are dX (per-frame integrals)."""
    lo, hi, n = x_range
    if n < 1 or not hi > lo:
        raise DomainError(f"X range needs hi > lo and n >= 1, got {x_range}")
    h = (hi - lo) / n
    xs = lo + h * (np.arange(n) + 0.5)
    rows = [(x, mu, nu) for mu, nu in frames for x in xs]
    return LabelGrid(np.array(rows), np.full(len(rows), h), TomographicPair.axes)


@dataclass(frozen=True, eq=False)
class Tomogram(SymbolField):
    """Real tomogram w(X, μ, ν) plus the smoothing width it was taken with."""

    delta_width: float = 0.0
    dim: int = 0

    def _per_frame(self, moment: int) -> pd.DataFrame:
        frame = self.to_frame()
        frame["w"] = frame["re"] * self.grid.weights
        frame["wx"] = frame["w"] * frame["X"] ** moment
        out = frame.groupby(["mu", "nu"], sort=True)["wx"].sum()
        return out.rename("value").reset_index()

    def x_integrals(self) -> pd.DataFrame:
        """∫ w dX for every frame (columns mu, nu, value)."""
        return self._per_frame(0)

    def x_moments(self, order: int = 2) -> pd.DataFrame:
        return self._per_frame(order)


def tomogram_of_state(
    rho: Operator,
    grid: Optional[LabelGrid] = None,
    *,
    pair: Optional[TomographicPair] = None,
    delta_width: Optional[float] = None,
) -> Tomogram:
    pair = pair or tomo_pair(rho.space, delta_width)
    grid = grid or pair.default_grid()
    values = pair.symbol_values(rho.entries, grid.points)
    residue = float(np.max(np.abs(values.imag)))
    if residue > 1e-10:
        logger.warning("tomogram has imaginary residue %.2e; is rho Hermitian?", residue)
    return Tomogram(grid, values.real, delta_width=pair.delta_width, dim=rho.dim)


@dataclass(frozen=True)
class TomoKernelValue:
    """Kernel factored as δ(constraint) · amplitude.

    ``constraint`` = μΣν_j - νΣμ_j at the arguments; ``normal`` = (-ν, μ) is the
    linear functional acting on (Σμ_j, Σν_j).
    """

    constraint: float
    amplitude: complex
    normal: Tuple[float, float]


def _branch(mu: float, nu: float) -> float:
    if mu == 0 or nu == 0:
        raise DegenerateFrame(f"kernel output frame needs mu != 0 and nu != 0, got ({mu}, {nu})")
    disc = 1.0 - 4.0 * mu * mu * nu * nu
    if disc < 0:
        raise BranchError(f"4 mu^2 nu^2 = {1.0 - disc:.6g} > 1 at output frame ({mu}, {nu})")
    return float(np.sqrt(disc))


def tomo_amplitude(xs, mus, nus, out) -> np.ndarray:
    """Amplitude of the N-symbol kernel; inputs have shape (..., N), broadcast."""
    X, mu, nu = _coords(out)
    root = _branch(mu, nu)
    xs = np.asarray(xs, dtype=float)
    mus = np.asarray(mus, dtype=float)
    nus = np.asarray(nus, dtype=float)
    n = mus.shape[-1]
    twist = np.zeros(np.broadcast(xs, mus, nus).shape[:-1])
    for k in range(n):
        for j in range(k + 1, n):
            twist = twist + nus[..., k] * mus[..., j] - nus[..., j] * mus[..., k]
    slope = (1.0 - root) / nu * nus.sum(axis=-1) + (1.0 + root) / mu * mus.sum(axis=-1)
    phase = 0.5 * (twist + 2.0 * xs.sum(axis=-1) - slope * X)
    return np.exp(1j * phase) / (2.0 * np.pi) ** n


def tomo_kernel(points: Sequence, out) -> TomoKernelValue:
    """N-symbol tomographic kernel at ``points`` -> ``out`` (δ factor kept symbolic)."""
    if len(points) < 2:
        raise DomainError(f"tomo_kernel needs N >= 2 inputs, got {len(points)}")
    arr = np.array([_coords(p) for p in points])
    X, mu, nu = _coords(out)
    amplitude = tomo_amplitude(arr[:, 0], arr[:, 1], arr[:, 2], out)
    constraint = mu * arr[:, 2].sum() - nu * arr[:, 1].sum()
    return TomoKernelValue(float(constraint), complex(amplitude), (-float(nu), float(mu)))


def tomo_composition_defect(points: Sequence, out, intermediate_x: float = 0.0) -> float:
    """|A3 - 2π·A2(x1, x2; y)·A2(y, x3; x)| / |A3| with y = (Y, μ1+μ2, ν1+ν2).

    The three-symbol kernel against its two-step composition through the
    intermediate frame fixed by the first constraint.
    """
    if len(points) != 3:
        raise DomainError(f"composition check takes three inputs, got {len(points)}")
    p1, p2, p3 = (_coords(p) for p in points)
    middle = np.array([intermediate_x, p1[1] + p2[1], p1[2] + p2[2]])
    first = tomo_kernel([p1, p2], middle).amplitude
    second = tomo_kernel([middle, p3], out).amplitude
    direct = tomo_kernel([p1, p2, p3], out).amplitude
    return float(abs(direct - 2.0 * np.pi * first * second) / abs(direct))


def canonical_pair_check(space: FockSpace, mu: float, nu: float) -> float:
    """max |[X, P] - i| away from the truncation edge.

    X = μq + νp and P = (1+S)/(2μ)·p - (1-S)/(2ν)·q with S = sqrt(1 - 4μ²ν²).
    """
    root = _branch(mu, nu)
    ladder = build_ladder(space)
    X = mu * ladder.q + nu * ladder.p
    P = (1.0 + root) / (2.0 * mu) * ladder.p - (1.0 - root) / (2.0 * nu) * ladder.q
    bracket = commutator(X, P).entries[:-1, :-1]
    return float(np.max(np.abs(bracket - 1j * np.eye(space.dim - 1))))


def tomo_star_via_kernel(
    rhos: Sequence[Operator],
    pair: TomographicPair,
    out_points: Sequence,
    frame_values: Sequence[float],
    *,
    budget: Optional[int] = None,
) -> np.ndarray:
    """Tomogram of ρ1...ρN at ``out_points`` through the N-symbol kernel.

    The X_j integrals are done in closed form (``characteristic``), the delta
    is resolved along ν_N, and the remaining 2N-1 frame variables run over the
    uniform lattice ``frame_values`` (spacing h, weight h each):

        w(X, μ, ν) = h^(2N-1)/|μ| · Σ Π_j χ_j(μ_j, ν_j) · A(0, ..., 0; X, μ, ν),
        ν_N = (ν Σμ_j - μ Σ_{j<N} ν_j)/μ.
    """
    n = len(rhos)
    if n < 2:
        raise DomainError(f"tomo_star_via_kernel needs N >= 2 operators, got {n}")
    lattice = np.asarray(frame_values, dtype=float)
    if lattice.ndim != 1 or len(lattice) < 2:
        raise DomainError("frame_values must be a 1-d lattice with at least two values")
    step = float(lattice[1] - lattice[0])
    if not np.allclose(np.diff(lattice), step):
        raise DomainError("frame_values must be uniformly spaced")
    count = len(lattice) ** (2 * n - 1)
    budget = budget or get_settings().quadrature_tuples
    if count > budget:
        raise ResourceError(f"{count} frame tuples exceed the budget {budget}")

    caches: List[Dict[Frame, complex]] = [{} for _ in rhos]

    def chi(j: int, mu: float, nu: float) -> complex:
        key = (round(float(mu), 12), round(float(nu), 12))
        cache = caches[j]
        if key not in cache:
            cache[key] = pair.characteristic(rhos[j], *key)
        return cache[key]

    axes = np.meshgrid(*([lattice] * (2 * n - 1)), indexing="ij")
    flat = [a.ravel() for a in axes]
    mus_in = np.stack(flat[0:2 * (n - 1):2] + [flat[-1]], axis=1)
    nus_free = np.stack(flat[1:2 * (n - 1):2], axis=1)

    # product of the free characteristic functions does not depend on the output
    free = np.ones(len(flat[0]), dtype=complex)
    for j in range(n - 1):
        free *= np.array([chi(j, m, v) for m, v in zip(mus_in[:, j], nus_free[:, j])])

    values = []
    for point in out_points:
        X, mu, nu = _coords(point)
        _branch(mu, nu)
        last_nu = (nu * mus_in.sum(axis=1) - mu * nus_free.sum(axis=1)) / mu
        nus = np.concatenate([nus_free, last_nu[:, None]], axis=1)
        last = np.array([chi(n - 1, m, v) for m, v in zip(mus_in[:, -1], last_nu)])
        amp = tomo_amplitude(np.zeros_like(mus_in), mus_in, nus, (X, mu, nu))
        values.append(step ** (2 * n - 1) / abs(mu) * complex(np.sum(free * last * amp)))
    logger.debug("tomographic kernel star: %d frame tuples, %d characteristic evaluations",
                 count, sum(len(c) for c in caches))
    return np.array(values)


__all__ = [
    "FRAME_CACHE_SIZE",
    "TomoPoint",
    "TomographicPair",
    "tomo_pair",
    "tomo_characteristic",
    "angle_frames",
    "tomo_grid",
    "Tomogram",
    "tomogram_of_state",
    "TomoKernelValue",
    "tomo_amplitude",
    "tomo_kernel",
    "tomo_composition_defect",
    "canonical_pair_check",
    "tomo_star_via_kernel",
]
