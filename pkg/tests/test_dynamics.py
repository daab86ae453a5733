"""Tests for Heisenberg evolution of symbols."""

from __future__ import annotations

import numpy as np
import pytest

from starprod.dynamics import conjugation_series, heisenberg_evolve, rk4_series
from starprod.errors import DimensionMismatch, DomainError, StabilityError
from starprod.fock import FockSpace, Operator, build_ladder, number_operator
from starprod.framework import LabelGrid, poisson_bracket, symbol_field
from starprod.maps.matrix import matrix_mechanics_pair
from starprod.maps.phase_space import sordered_pair, weyl_pair


def _small_grid(pair, half=1.0, n=4):
    return LabelGrid.rectangular([(-half, half, n), (-half, half, n)], pair.axes)


def test_rk4_on_scalar_exponential():
    times, states = rk4_series(np.array([1.0]), lambda y: -y, 1.0, 0.01, record_every=10)
    assert times[0] == 0.0
    assert times[-1] == pytest.approx(1.0)
    assert len(states) == 11
    assert states[-1][0].real == pytest.approx(np.exp(-1.0), rel=1e-9)


def test_rk4_records_final_step():
    times, _ = rk4_series(np.array([1.0]), lambda y: 0 * y, 0.3, 0.1, record_every=2)
    assert times.tolist() == pytest.approx([0.0, 0.2, 0.3])


def test_rk4_step_validation():
    with pytest.raises(DomainError):
        rk4_series(np.array([1.0]), lambda y: y, 1.0, 0.0)
    with pytest.raises(DomainError):
        rk4_series(np.array([1.0]), lambda y: y, -1.0, 0.1)


def test_conjugation_series_at_zero_is_identity():
    space = FockSpace(6)
    ladder = build_ladder(space)
    (start,) = conjugation_series(ladder.q, number_operator(space), np.array([0.0]))
    np.testing.assert_allclose(start, ladder.q.entries, atol=1e-12)


def test_weyl_rk4_matches_exact_series():
    space = FockSpace(12)
    pair = weyl_pair(space)
    result = heisenberg_evolve(build_ladder(space).q, number_operator(space), pair, 1.0, 0.01, _small_grid(pair, 3.0, 8))
    assert result.max_deviation() < 1e-8
    assert len(result.fields) == len(result.times) == len(result.exact)


def test_quadrature_rotates_under_number_hamiltonian():
    space = FockSpace(48)
    pair = sordered_pair(space, -0.4)
    grid = _small_grid(pair)
    result = heisenberg_evolve(build_ladder(space).q, number_operator(space), pair, np.pi / 2.0, 0.01, grid)
    t = result.times[-1]
    x1, x2 = grid.points[:, 0], grid.points[:, 1]
    expected = np.sqrt(2.0) * (x1 * np.cos(t) + x2 * np.sin(t))
    np.testing.assert_allclose(result.fields[-1].values, expected, atol=1e-6)


def test_operator_steps_match_field_steps():
    space = FockSpace(5)
    pair = matrix_mechanics_pair(space)
    rng = np.random.default_rng(8)
    raw = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    A0 = Operator(space, raw + raw.conj().T)
    H = number_operator(space)
    f_H = symbol_field(H, pair)

    def derivative(f):
        return poisson_bracket(f_H, f, pair).scaled(1j)

    f, dt = symbol_field(A0, pair), 0.1
    for _ in range(2):
        k1 = derivative(f)
        k2 = derivative(f + k1.scaled(dt / 2.0))
        k3 = derivative(f + k2.scaled(dt / 2.0))
        k4 = derivative(f + k3.scaled(dt))
        f = f + (k1 + k2.scaled(2.0) + k3.scaled(2.0) + k4).scaled(dt / 6.0)
    result = heisenberg_evolve(A0, H, pair, 0.2, dt)
    assert result.fields[-1].sup_distance(f) < 1e-10


def test_large_step_is_unstable():
    space = FockSpace(12)
    pair = weyl_pair(space)
    everything = Operator(space, np.ones((12, 12)))
    with pytest.raises(StabilityError):
        heisenberg_evolve(everything, number_operator(space), pair, 5.0, 1.0, _small_grid(pair))


def test_evolution_input_checks():
    space = FockSpace(6)
    pair = weyl_pair(space)
    ladder = build_ladder(space)
    with pytest.raises(DimensionMismatch):
        heisenberg_evolve(ladder.q, number_operator(FockSpace(7)), pair, 1.0, 0.1)
    with pytest.raises(DomainError):
        heisenberg_evolve(ladder.q, ladder.a, pair, 1.0, 0.1)


def test_result_frame_layout():
    space = FockSpace(8)
    pair = weyl_pair(space)
    grid = _small_grid(pair, 1.0, 2)
    result = heisenberg_evolve(build_ladder(space).p, number_operator(space), pair, 0.1, 0.05, grid)
    frame = result.to_frame()
    assert list(frame.columns) == ["t", "q", "p", "re", "im", "exact_re", "exact_im"]
    assert len(frame) == len(result.times) * len(grid)
    assert result.deviations().shape == (len(result.times),)
