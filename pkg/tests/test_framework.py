"""Tests for the generic symbol machinery (grids, fields, star-products, quadratures)."""

from __future__ import annotations

import numpy as np
import pytest

from starprod.errors import DimensionMismatch, DomainError, ResourceError
from starprod.fock import FockSpace, Operator, make_state
from starprod.framework import (
    LabelGrid,
    SymbolField,
    commutator_field,
    fidelity,
    intertwine,
    pairing_kernel,
    poisson_bracket,
    reconstruct,
    star_via_kernel,
    star_via_operators,
    symbol_field,
    trace_power,
)
from starprod.maps.matrix import matrix_mechanics_pair
from starprod.maps.phase_space import sordered_pair, weyl_pair
from starprod.maps.tomography import angle_frames, tomo_grid, tomo_pair, tomogram_of_state


def _random_operator(space, seed, hermitian=False):
    rng = np.random.default_rng(seed)
    shape = (space.dim, space.dim)
    entries = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    if hermitian:
        entries = entries + entries.conj().T
    return Operator(space, entries)


def _random_density(space, seed):
    op = _random_operator(space, seed)
    rho = op @ op.adjoint()
    return rho / rho.trace()


@pytest.fixture()
def matrix_pair():
    return matrix_mechanics_pair(FockSpace(4))


# ----------------------- grids and fields -----------------------

def test_rectangular_grid_uses_midpoints():
    grid = LabelGrid.rectangular([(-1.0, 1.0, 4), (0.0, 3.0, 3)], ("a", "b"))
    assert len(grid) == 12
    assert grid.label_dim == 2
    assert grid.weights[0] == pytest.approx(0.5)
    assert sorted(set(grid.points[:, 0])) == pytest.approx([-0.75, -0.25, 0.25, 0.75])
    refined = grid.refined()
    assert len(refined) == 48
    assert refined.weights.sum() == pytest.approx(grid.weights.sum())


def test_grid_validation():
    with pytest.raises(DomainError):
        LabelGrid.rectangular([(1.0, -1.0, 4)])
    with pytest.raises(DomainError):
        LabelGrid.from_points([[0.0], [1.0]], weights=[1.0, 0.0])
    with pytest.raises(DimensionMismatch):
        LabelGrid.from_points([[0.0], [1.0]], weights=[1.0])
    with pytest.raises(DomainError):
        LabelGrid.from_points([[0.0], [1.0]]).refined()


def test_field_validation_and_frame():
    grid = LabelGrid.rectangular([(0.0, 1.0, 2)], ("x",))
    with pytest.raises(DimensionMismatch):
        SymbolField(grid, [1.0, 2.0, 3.0])
    field = SymbolField(grid, [1.0 + 2.0j, -1.0])
    frame = field.to_frame()
    assert list(frame.columns) == ["x", "re", "im"]
    assert frame["im"].tolist() == [2.0, 0.0]
    assert field.integral() == pytest.approx(0.5 * (1.0 + 2.0j - 1.0))
    assert (field - field).values.tolist() == [0j, 0j]


# ----------------------- matrix pair (exact quadrature) -----------------------

def test_round_trip_is_exact(matrix_pair):
    A = _random_operator(matrix_pair.space, 1)
    field = symbol_field(A, matrix_pair)
    assert reconstruct(field, matrix_pair).distance(A) < 1e-12


def test_pairing_kernel_is_kronecker(matrix_pair):
    assert pairing_kernel(matrix_pair, [1, 2], [1, 2]) == pytest.approx(1.0)
    assert pairing_kernel(matrix_pair, [1, 2], [2, 1]) == pytest.approx(0.0)


def test_kernel_route_matches_operator_route(matrix_pair):
    A = _random_operator(matrix_pair.space, 2)
    B = _random_operator(matrix_pair.space, 3)
    fA = symbol_field(A, matrix_pair)
    fB = symbol_field(B, matrix_pair)
    via_kernel = star_via_kernel(fA, fB, matrix_pair)
    via_ops = star_via_operators(A, B, matrix_pair)
    assert via_kernel.sup_distance(via_ops) < 1e-12


def test_kernel_route_needs_a_common_grid(matrix_pair):
    A = _random_operator(matrix_pair.space, 2)
    fA = symbol_field(A, matrix_pair)
    partial = LabelGrid.from_points([[0, 0], [1, 1]], axes=matrix_pair.axes)
    with pytest.raises(DimensionMismatch):
        star_via_kernel(fA, symbol_field(A, matrix_pair, partial), matrix_pair)


def test_poisson_bracket_matches_commutator(matrix_pair):
    A = _random_operator(matrix_pair.space, 4, hermitian=True)
    B = _random_operator(matrix_pair.space, 5, hermitian=True)
    bracket = poisson_bracket(symbol_field(A, matrix_pair), symbol_field(B, matrix_pair), matrix_pair)
    assert bracket.sup_distance(commutator_field(A, B, matrix_pair)) < 1e-12


def test_symbol_of_product_against_other_operator(matrix_pair):
    A = _random_operator(matrix_pair.space, 6)
    B = _random_operator(matrix_pair.space, 7)
    assert matrix_pair.trace_from_symbol(star_via_operators(A, B, matrix_pair)) == pytest.approx(
        np.trace(A.entries @ B.entries)
    )
    with pytest.raises(DimensionMismatch):
        star_via_operators(A, Operator.identity(FockSpace(3)), matrix_pair)


# ----------------------- trace powers -----------------------

@pytest.mark.parametrize("N", [2, 3])
def test_trace_power_enumerates_exactly(matrix_pair, N):
    rho = _random_density(matrix_pair.space, 8)
    result = trace_power(rho, matrix_pair, N)
    assert result.method == "grid"
    assert result.value == pytest.approx(np.trace(np.linalg.matrix_power(rho.entries, N)), abs=1e-12)


def test_trace_power_over_budget_needs_seed():
    pair = matrix_mechanics_pair(FockSpace(2))
    rho = Operator(pair.space, np.diag([0.7, 0.3]))
    with pytest.raises(ResourceError):
        trace_power(rho, pair, 3, budget=10)


def test_trace_power_monte_carlo_is_seeded():
    pair = matrix_mechanics_pair(FockSpace(2))
    rho = Operator(pair.space, np.diag([0.7, 0.3]))
    first = trace_power(rho, pair, 3, budget=10, seed=5, samples=20000)
    second = trace_power(rho, pair, 3, budget=10, seed=5, samples=20000)
    assert first.method == "monte-carlo"
    assert first.seed == 5
    assert first.value == second.value
    assert first.value.real == pytest.approx(0.7 ** 3 + 0.3 ** 3, abs=0.02)


def test_trace_power_rejects_first_power(matrix_pair):
    with pytest.raises(DomainError):
        trace_power(Operator.identity(matrix_pair.space), matrix_pair, 1)


def test_fidelity_is_trace_of_product(matrix_pair):
    rho1 = _random_density(matrix_pair.space, 9)
    rho2 = _random_density(matrix_pair.space, 10)
    result = fidelity(rho1, rho2, matrix_pair)
    assert result.value == pytest.approx(np.trace(rho1.entries @ rho2.entries), abs=1e-12)


# ----------------------- intertwining -----------------------

def test_weyl_to_sordered_and_back():
    rho = make_state(FockSpace(16, tail_tolerance=1e-4), "coherent:0.5")
    weyl = weyl_pair(rho.space)
    sordered = sordered_pair(rho.space, -0.4)
    weyl_grid = LabelGrid.rectangular([(-6.0, 6.0, 64)] * 2, weyl.axes)
    s_grid = LabelGrid.rectangular([(-4.5, 4.5, 64)] * 2, sordered.axes)
    original = symbol_field(rho, weyl, weyl_grid)

    there = intertwine(original, weyl, sordered, s_grid)
    assert there.reconstruction_residual < 1e-6
    assert there.field.sup_distance(symbol_field(rho, sordered, s_grid)) < 1e-3

    back = intertwine(there.field, sordered, weyl, weyl_grid)
    assert back.field.sup_distance(original) < 1e-2


def test_weyl_to_tomographic_matches_direct_tomogram():
    rho = make_state(FockSpace(16), "fock:0")
    weyl = weyl_pair(rho.space)
    tomo = tomo_pair(rho.space)
    source = symbol_field(rho, weyl, LabelGrid.rectangular([(-6.0, 6.0, 64)] * 2, weyl.axes))
    target_grid = tomo_grid((-4.0, 4.0, 41), angle_frames(4))
    result = intertwine(source, weyl, tomo, target_grid)
    direct = tomogram_of_state(rho, target_grid, pair=tomo)
    assert result.field.sup_distance(direct) < 1e-3


def test_intertwine_rejects_mismatched_spaces():
    source = weyl_pair(FockSpace(8))
    target = sordered_pair(FockSpace(10), 0.2)
    field = symbol_field(Operator.identity(source.space), source, LabelGrid.rectangular([(-1.0, 1.0, 2)] * 2))
    with pytest.raises(DimensionMismatch):
        intertwine(field, source, target)


# ----------------------- algebraic laws of the star-product -----------------------

def _fields(pair, seeds, hermitian=False):
    return [symbol_field(_random_operator(pair.space, s, hermitian), pair) for s in seeds]


def test_star_product_is_associative(matrix_pair):
    for trial in range(50):
        fA, fB, fC = _fields(matrix_pair, (3 * trial, 3 * trial + 1, 3 * trial + 2))
        left = star_via_kernel(star_via_kernel(fA, fB, matrix_pair), fC, matrix_pair)
        right = star_via_kernel(fA, star_via_kernel(fB, fC, matrix_pair), matrix_pair)
        assert left.sup_distance(right) < 1e-10


def test_moyal_star_is_associative_on_coherent_symbols():
    space = FockSpace(24)
    pair = weyl_pair(space)
    grid = LabelGrid.rectangular([(-5.0, 5.0, 24)] * 2, pair.axes)
    fA, fB, fC = (symbol_field(make_state(space, f"coherent:{a}"), pair, grid) for a in (0.5, -0.3, 0.2))
    outs = LabelGrid.from_points([[0.0, 0.0], [0.4, -0.2], [-0.6, 0.3], [0.2, 0.8], [1.0, 0.1]], axes=pair.axes)
    ab = star_via_kernel(fA, fB, pair)
    bc = star_via_kernel(fB, fC, pair)
    left = star_via_kernel(ab, fC, pair, outs)
    right = star_via_kernel(fA, bc, pair, outs)
    assert left.sup_distance(right) < 1e-3
    # ρ_a ⋆ ρ_b ⋆ ρ_c is the symbol of the operator product
    exact = star_via_operators(
        make_state(space, "coherent:0.5") @ make_state(space, "coherent:-0.3"),
        make_state(space, "coherent:0.2"),
        pair,
        outs,
    )
    assert left.sup_distance(exact) < 1e-3


def test_poisson_bracket_is_antisymmetric(matrix_pair):
    fA, fB = _fields(matrix_pair, (20, 21), hermitian=True)
    forward = poisson_bracket(fA, fB, matrix_pair)
    backward = poisson_bracket(fB, fA, matrix_pair)
    assert np.array_equal(forward.values, -backward.values)


def test_poisson_bracket_obeys_jacobi(matrix_pair):
    fA, fB, fC = _fields(matrix_pair, (22, 23, 24), hermitian=True)
    total = (
        poisson_bracket(fA, poisson_bracket(fB, fC, matrix_pair), matrix_pair)
        + poisson_bracket(fB, poisson_bracket(fC, fA, matrix_pair), matrix_pair)
        + poisson_bracket(fC, poisson_bracket(fA, fB, matrix_pair), matrix_pair)
    )
    assert np.max(np.abs(total.values)) < 1e-9


def test_poisson_bracket_is_a_derivation(matrix_pair):
    fA, fB, fC = _fields(matrix_pair, (25, 26, 27), hermitian=True)
    lhs = poisson_bracket(fA, star_via_kernel(fB, fC, matrix_pair), matrix_pair)
    rhs = star_via_kernel(poisson_bracket(fA, fB, matrix_pair), fC, matrix_pair) + star_via_kernel(
        fB, poisson_bracket(fA, fC, matrix_pair), matrix_pair
    )
    assert lhs.sup_distance(rhs) < 1e-9
