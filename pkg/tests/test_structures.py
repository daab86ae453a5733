"""Tests for structure tensors, the associativity equation and kernel checks."""

from __future__ import annotations

import numpy as np
import pytest

from starprod.errors import DimensionMismatch, DomainError, ResourceError
from starprod.fock import FockSpace
from starprod.framework import LabelGrid
from starprod.maps.phase_space import sordered_pair, weyl_pair
from starprod.maps.tomography import tomo_pair
from starprod.structures import (
    BUILTIN_TENSORS,
    KernelSample,
    StructureTensor,
    akb_tensor,
    antisymmetry_residual,
    assoc_check,
    builtin_tensor,
    closed_kernel_sample,
    commutator_constants,
    family1_tensor,
    kernel_assoc_check,
    kernel_sample,
    kronecker_kernel,
    lie_jacobi_check,
    random_triple_check,
    standard_matrix_tensor,
    su2_constants,
    tensor_product,
)


def _perturbed(M, index, value):
    entries = np.array(M.entries)
    entries[index] = value
    return StructureTensor(entries)


# ----------------------- matrix tensors -----------------------

def test_standard_tensor_is_matrix_multiplication():
    M = standard_matrix_tensor(3)
    rng = np.random.default_rng(0)
    A, B = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    np.testing.assert_allclose(M.product(A.ravel(), B.ravel()), (A @ B).ravel(), atol=1e-12)
    np.testing.assert_allclose(tensor_product(np.eye(3).ravel(), B.ravel(), M), B.ravel())
    assert assoc_check(M) == (True, 0.0)


def test_akb_with_identity_is_standard():
    assert np.array_equal(akb_tensor(np.eye(2)).entries, standard_matrix_tensor(2).entries)


@pytest.mark.parametrize("seed", range(10))
def test_akb_is_associative_for_any_k(seed):
    k = np.random.default_rng(seed).normal(size=(2, 2))
    result = assoc_check(akb_tensor(k))
    assert result.passed
    assert result.max_residual < 1e-12


def test_akb_vectorizes_a_k_b():
    k = np.array([[1.0, 2.0], [0.0, -1.0]])
    A = np.array([[1.0, -2.0], [3.0, 0.5]])
    B = np.array([[0.0, 1.0], [4.0, 2.0]])
    np.testing.assert_allclose(akb_tensor(k).product(A.ravel(), B.ravel()), (A @ k @ B).ravel())


def test_family1_product_and_associativity():
    M = family1_tensor()
    a = np.array([1.0, 2.0, 3.0, 4.0])
    b = np.array([5.0, 6.0, 7.0, 8.0])
    expected = [a[0] * b[0], a[1] * b[1], a[2] * b[2], a[0] * b[3] + a[3] * b[2]]
    np.testing.assert_allclose(M.product(a, b), expected)
    assert assoc_check(M) == (True, 0.0)
    assert not M.is_symmetric()


def test_perturbed_tensors_fail():
    broken = _perturbed(standard_matrix_tensor(2), (0, 1, 2), 1.1)
    result = assoc_check(broken)
    assert not result.passed
    assert result.max_residual == pytest.approx(0.1)

    broken = _perturbed(family1_tensor(), (3, 0, 3), 1.1)
    result = assoc_check(broken)
    assert not result.passed
    assert result.max_residual == pytest.approx(0.11)


def test_builtin_tensors_are_associative_or_lie():
    for name in BUILTIN_TENSORS:
        M = builtin_tensor(name)
        check = lie_jacobi_check(M) if name == "su2" else assoc_check(M)
        assert check.passed, name
    with pytest.raises(DomainError):
        builtin_tensor("octonions")


def test_builtin_aliases():
    assert np.array_equal(builtin_tensor("appendix1-family1").entries, family1_tensor().entries)
    assert np.array_equal(builtin_tensor("appendix1-akb").entries, builtin_tensor("akb").entries)


def test_tensor_validation():
    with pytest.raises(DimensionMismatch):
        StructureTensor(np.zeros((2, 2, 3)))
    with pytest.raises(DimensionMismatch):
        tensor_product(np.ones(3), np.ones(4), standard_matrix_tensor(2))
    with pytest.raises(DimensionMismatch):
        akb_tensor(np.ones((2, 3)))
    with pytest.raises(DomainError):
        standard_matrix_tensor(0)


def test_complex_entries_are_kept():
    M = akb_tensor(np.array([[1j, 0.0], [0.0, 1.0]]))
    assert np.iscomplexobj(M.entries)
    assert assoc_check(M).passed


# ----------------------- Lie brackets -----------------------

def test_su2_satisfies_jacobi():
    C = su2_constants()
    assert antisymmetry_residual(C) == 0.0
    assert lie_jacobi_check(C) == (True, 0.0)


def test_commutator_of_associative_product_is_lie():
    C = commutator_constants(akb_tensor(np.array([[1.0, 2.0], [0.0, -1.0]])))
    assert antisymmetry_residual(C) == 0.0
    assert lie_jacobi_check(C).passed


def test_random_bracket_fails_jacobi():
    raw = np.random.default_rng(3).normal(size=(3, 3, 3))
    C = StructureTensor(raw - raw.transpose(0, 2, 1))
    result = lie_jacobi_check(C)
    assert not result.passed
    assert result.max_residual > 1e-3


def test_non_antisymmetric_constants_do_not_pass():
    assert not lie_jacobi_check(standard_matrix_tensor(2)).passed


def test_pointwise_product_is_commutative():
    entries = np.zeros((3, 3, 3))
    for i in range(3):
        entries[i, i, i] = 1.0
    M = StructureTensor(entries)
    assert M.is_symmetric()
    assert np.count_nonzero(commutator_constants(M).entries) == 0


# ----------------------- random triples -----------------------

def test_random_triples():
    assert random_triple_check(standard_matrix_tensor(3), samples=50, seed=1).passed
    broken = _perturbed(standard_matrix_tensor(2), (0, 1, 2), 1.1)
    result = random_triple_check(broken, samples=50, seed=1)
    assert not result.passed
    assert random_triple_check(broken, samples=50, seed=1) == result


# ----------------------- kernels -----------------------

@pytest.fixture()
def line():
    return LabelGrid.rectangular([(0.0, 2.0, 4)], ("x",))


def test_kronecker_kernel_is_associative(line):
    K = kronecker_kernel(line)
    assert K.values[1, 1, 1] == pytest.approx(4.0)
    result = kernel_assoc_check(K)
    assert result.passed
    assert result.max_residual == 0.0


def test_kernel_check_detects_broken_kernel(line):
    values = np.array(kronecker_kernel(line).values)
    values[0, 1, 2] = 1.0
    assert not kernel_assoc_check(KernelSample(line, values)).passed


def test_kernel_budget_needs_seed(line):
    K = kronecker_kernel(line)
    with pytest.raises(ResourceError):
        kernel_assoc_check(K, budget=100)
    sampled = kernel_assoc_check(K, budget=100, seed=3)
    assert sampled.passed


def test_kernel_sample_shape(line):
    with pytest.raises(DimensionMismatch):
        KernelSample(line, np.zeros((4, 4, 3)))


def test_kernel_check_on_a_subset_of_labels(line):
    K = kronecker_kernel(line)
    assert kernel_assoc_check(K, labels=[0, 2]).max_residual == 0.0
    with pytest.raises(DomainError):
        kernel_assoc_check(K, labels=[0, 4])


# ----------------------- closed-form kernel samples -----------------------

def _hermite_grid(n, axes):
    """Product Gauss-Hermite rule rescaled to plain integrals over the plane."""
    nodes, weights = np.polynomial.hermite.hermgauss(n)
    weights = weights * np.exp(nodes ** 2)
    u, v = np.meshgrid(nodes, nodes, indexing="ij")
    return LabelGrid.from_points(np.stack([u.ravel(), v.ravel()], axis=1), np.outer(weights, weights).ravel(), axes)


def _inner_labels(grid, radius):
    return np.nonzero(np.all(np.abs(grid.points) <= radius, axis=1))[0]


def test_closed_sample_matches_pair_kernel():
    pair = sordered_pair(FockSpace(8), 0.4)
    grid = LabelGrid.rectangular([(-1.0, 1.0, 3)] * 2, pair.axes)
    K = closed_kernel_sample(pair, grid)
    for x, y, z in [(0, 1, 2), (4, 4, 4), (8, 3, 5)]:
        expected = pair.two_symbol_kernel(grid.points[y], grid.points[z], grid.points[x])
        assert K.values[x, y, z] == pytest.approx(expected)


def test_closed_sample_agrees_with_fock_trace_for_positive_order():
    pair = sordered_pair(FockSpace(48), 0.4)
    grid = LabelGrid.rectangular([(-0.5, 0.5, 3)] * 2, pair.axes)
    closed = closed_kernel_sample(pair, grid).values
    traced = kernel_sample(pair, grid).values
    assert np.max(np.abs(closed - traced)) < 1e-5


def test_kernel_residual_falls_as_quadrature_is_refined():
    pair = sordered_pair(FockSpace(4), 0.4)
    residuals = []
    for n in (8, 16):
        grid = _hermite_grid(n, pair.axes)
        labels = _inner_labels(grid, 0.4)
        assert len(labels) == 4
        residuals.append(kernel_assoc_check(closed_kernel_sample(pair, grid), labels=labels).max_residual)
    coarse, fine = residuals
    assert fine < coarse / 1.5


def test_damped_moyal_sample():
    pair = weyl_pair(FockSpace(4))
    grid = LabelGrid.rectangular([(-3.0, 3.0, 8)] * 2, pair.axes)
    bare = closed_kernel_sample(pair, grid)
    damped = closed_kernel_sample(pair, grid, damping=1.5)
    np.testing.assert_allclose(np.abs(bare.values), 1.0 / np.pi ** 2)
    window = np.exp(-np.sum(grid.points ** 2, axis=1) / 4.5)
    np.testing.assert_allclose(damped.values, bare.values * window[None, :, None] * window[None, None, :])
    result = kernel_assoc_check(damped, budget=5000, seed=4)
    assert np.isfinite(result.max_residual)
    assert result == kernel_assoc_check(damped, budget=5000, seed=4)


def test_closed_sample_errors():
    with pytest.raises(DomainError):
        closed_kernel_sample(tomo_pair(FockSpace(4)))
    with pytest.raises(DomainError):
        closed_kernel_sample(weyl_pair(FockSpace(4)), damping=0.0)
