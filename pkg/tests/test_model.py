import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import hermite_function, operator_hamiltonian, quad_kinetic, quad_matrix_element
from sbdimer.errors import DomainError
from sbdimer.model import (DOWN, SET_A, UP, BasisSpec, DimerParams, ModelParams,
                           build_hamiltonian, hamiltonian_element, parity_operator,
                           reduce_dimer_params)

params = st.builds(
    ModelParams,
    p=st.floats(0, 30),
    r=st.floats(0.01, 2),
    eps_plus=st.floats(-10, 10),
    eps_minus=st.floats(-10, 10),
)


@pytest.mark.parametrize("d, expected", [
    (DimerParams(0, 0, 0, 1, 0.5), (0.0, 1.0, 0.0, 0.0)),
    (DimerParams(10, -10, 0.2, 0.1, 0.5), (4.0, 0.1, 0.0, 10.0)),
    (DimerParams(5, 5, 0.2, 0.1, 0.5), (4.0, 0.1, 5.0, 0.0)),
])
def test_reduce_dimer_params(d, expected):
    m = reduce_dimer_params(d)
    assert (m.p, m.r, m.eps_plus, m.eps_minus) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("omega, v", [(0, 1), (-1, 1), (1, 0), (1, -2)])
def test_reduce_rejects_bad_domain(omega, v):
    with pytest.raises(DomainError):
        reduce_dimer_params(DimerParams(1, 0, 0.1, omega, v))


def test_model_params_domain():
    with pytest.raises(DomainError):
        ModelParams(p=-1, r=0.1)
    with pytest.raises(DomainError):
        ModelParams(p=1, r=0)
    with pytest.raises(DomainError):
        BasisSpec(n_osc=10, keep=21)
    with pytest.raises(DomainError):
        BasisSpec(n_osc=10, keep=0)


def test_spin_flip_element():
    for m in (SET_A, ModelParams(p=0.3, r=2.0, eps_plus=1.0, eps_minus=-3.0)):
        assert hamiltonian_element(m, UP, 5, DOWN, 5) == -0.5
        assert hamiltonian_element(m, DOWN, 5, UP, 5) == -0.5


def test_diagonal_element_against_quadrature():
    r = SET_A.r
    psi0 = hermite_function(0, r)
    osc = quad_kinetic(psi0, psi0, r) + quad_matrix_element(psi0, psi0, lambda x: 0.5 * r * r * x * x, r)
    expected = SET_A.eps_plus + SET_A.eps_minus + osc
    assert expected == pytest.approx(5.05, abs=1e-7)
    assert hamiltonian_element(SET_A, UP, 0, UP, 0) == pytest.approx(expected, abs=1e-7)


def test_vibronic_element_against_quadrature():
    r, p = SET_A.r, SET_A.p
    coupling = lambda x: math.sqrt(p / 2) * r * x
    for k in range(4):
        ref = quad_matrix_element(hermite_function(k + 1, r), hermite_function(k, r), coupling, r)
        assert hamiltonian_element(SET_A, UP, k + 1, UP, k) == pytest.approx(ref, abs=1e-10)
        assert hamiltonian_element(SET_A, DOWN, k, DOWN, k + 1) == pytest.approx(-ref, abs=1e-10)
    assert hamiltonian_element(SET_A, UP, 1, UP, 0) == pytest.approx(math.sqrt(0.4) / 2, abs=1e-12)
    assert math.sqrt(0.4) / 2 == pytest.approx(0.3162278, abs=1e-7)


def test_element_zero_outside_band_and_range():
    assert hamiltonian_element(SET_A, UP, 3, UP, 5) == 0.0
    assert hamiltonian_element(SET_A, UP, 3, DOWN, 4) == 0.0
    with pytest.raises(IndexError):
        hamiltonian_element(SET_A, UP, 10, UP, 9, n_osc=10)
    with pytest.raises(IndexError):
        hamiltonian_element(SET_A, 2, 0, UP, 0)


def test_single_level_matrix():
    m = ModelParams(p=0, r=0.7, eps_minus=1.3)
    h = build_hamiltonian(m, BasisSpec(n_osc=1, keep=2)).toarray()
    np.testing.assert_array_equal(h, [[1.3 + 0.35, -0.5], [-0.5, -1.3 + 0.35]])


def test_matches_elementwise_closed_forms():
    n = 2
    h = build_hamiltonian(SET_A, BasisSpec(n_osc=n, keep=4))
    dense = h.toarray()
    for i in range(2 * n):
        for j in range(2 * n):
            ref = hamiltonian_element(SET_A, i % 2, i // 2, j % 2, j // 2)
            assert dense[i, j] == ref
            assert h.entry(i, j) == ref


@settings(max_examples=30, deadline=None)
@given(params, st.integers(1, 40))
def test_symmetric_and_banded(m, n):
    dense = build_hamiltonian(m, BasisSpec(n_osc=n, keep=1)).toarray()
    assert np.array_equal(dense, dense.T)
    i, j = np.indices(dense.shape)
    assert np.all(dense[np.abs(i // 2 - j // 2) > 1] == 0)


@settings(max_examples=30, deadline=None)
@given(params, st.integers(1, 30))
def test_agrees_with_operator_products(m, n):
    dense = build_hamiltonian(m, BasisSpec(n_osc=n, keep=1)).toarray()
    ref = operator_hamiltonian(m.p, m.r, m.eps_plus, m.eps_minus, n)
    np.testing.assert_allclose(dense, ref, atol=1e-12 * (1 + np.abs(ref).max()))


def test_matvec_matches_dense():
    h = build_hamiltonian(SET_A, BasisSpec(n_osc=50, keep=1))
    rng = np.random.default_rng(0)
    v = rng.standard_normal((100, 3))
    np.testing.assert_allclose(h.matvec(v), h.toarray() @ v, atol=1e-12)
    np.testing.assert_allclose(h.matvec(v[:, 0]), h.toarray() @ v[:, 0], atol=1e-12)


@pytest.mark.parametrize("p", [0.0, 1.0, 20.0])
def test_parity_commutes_when_symmetric(p):
    m = ModelParams(p=p, r=0.1, eps_plus=0.7, eps_minus=0.0)
    for n in (1, 2, 7, 30):
        h = build_hamiltonian(m, BasisSpec(n_osc=n, keep=1)).toarray()
        pi = parity_operator(n)
        assert np.array_equal(h @ pi, pi @ h)


def test_parity_broken_by_asymmetry():
    h = build_hamiltonian(SET_A, BasisSpec(n_osc=7, keep=1)).toarray()
    pi = parity_operator(7)
    assert np.abs(h @ pi - pi @ h).max() > 1.0
