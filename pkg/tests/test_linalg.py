import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st

from condent import linalg as la
from condent.errors import DimensionMismatch, NegativeEigenvalue, NotHermitian, ShrinkNotAllowed
from condent.states import classical_correlated, maximally_entangled

from .conftest import random_density, random_hermitian


def test_eig_diagonal_sorted():
    s = la.eig_hermitian(np.diag([1.0, 3.0, 2.0]))
    assert np.allclose(s.values, [3, 2, 1])


def test_eig_pauli_x():
    s = la.eig_hermitian([[0, 1], [1, 0]])
    assert np.allclose(s.values, [1, -1])


def test_eig_reconstruction(rng):
    h = random_hermitian(rng, 4)
    s = la.eig_hermitian(h)
    assert la.max_abs(s.reconstruct() - h) <= 1e-10
    assert la.max_abs(s.basis.conj().T @ s.basis - np.eye(4)) <= la.EPS_EIG


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        la.eig_hermitian([[0, 1], [0, 0]])


def test_eig_matches_scipy(rng):
    h = random_hermitian(rng, 5)
    assert np.allclose(la.eig_hermitian(h).values, sla.eigvalsh(h)[::-1], atol=1e-12)


def test_power_half_diagonal():
    assert np.allclose(la.mpower(np.diag([4.0, 9.0]), 0.5), np.diag([2, 3]))


def test_log2_uniform_qubit():
    assert np.allclose(la.mlog2(np.eye(2) / 2), -np.eye(2))


def test_pinv_sqrt_support_convention():
    assert np.allclose(la.pinv_sqrt(np.diag([2.0, 0.0])), np.diag([2**-0.5, 0]))


def test_hermitian_function_rejects_negative():
    with pytest.raises(NegativeEigenvalue):
        la.mlog2(np.diag([1.0, -1e-3]))


def test_hermitian_function_unknown_tag():
    with pytest.raises(ValueError):
        la.hermitian_function(np.eye(2), "exp")


def test_matrix_functions_against_scipy(rng):
    rho = random_density(rng, 4)
    assert np.allclose(la.mlog2(rho), sla.logm(rho) / np.log(2), atol=1e-9)
    assert np.allclose(la.mpower(rho, 0.3), sla.fractional_matrix_power(rho, 0.3), atol=1e-9)
    assert np.allclose(la.pinv_sqrt(rho), sla.inv(sla.sqrtm(rho)), atol=1e-7)


def test_kron_examples():
    assert np.allclose(la.kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.allclose(la.kron(np.diag([1, 0]), np.diag([2, 5])), np.diag([2, 5, 0, 0]))
    assert np.allclose(la.kron(), np.ones((1, 1)))


def test_kron_mixed_product(rng):
    a, b, c, d = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(4))
    assert np.allclose(la.kron(a, b) @ la.kron(c, d), la.kron(a @ c, b @ d))


def test_partial_trace_examples():
    assert np.allclose(la.partial_trace(maximally_entangled(2).matrix, [2, 2], [0]), np.eye(2) / 2)
    omega = np.diag([0.25, 0.75])
    tau = np.array([[0.6, 0.2j], [-0.2j, 0.4]])
    assert np.allclose(la.partial_trace(np.kron(2 * omega, tau), [2, 2], [1]), 2 * tau)
    assert np.allclose(la.partial_trace(classical_correlated(2).matrix, [2, 2], [0]), np.eye(2) / 2)


def test_partial_trace_elementwise_oracle(rng):
    m = random_density(rng, 6)
    t = m.reshape(2, 3, 2, 3)
    expect_a = sum(t[:, j, :, j] for j in range(3))
    expect_b = sum(t[i, :, i, :] for i in range(2))
    assert np.allclose(la.partial_trace(m, [2, 3], [0]), expect_a)
    assert np.allclose(la.partial_trace(m, [2, 3], [1]), expect_b)


def test_partial_trace_dims_checked():
    with pytest.raises(DimensionMismatch):
        la.partial_trace(np.eye(4), [2, 3], [0])
    with pytest.raises(DimensionMismatch):
        la.partial_trace(np.eye(4), [2, 2], [2])


def test_permute_systems_swaps_factors(rng):
    a, b = random_density(rng, 2), random_density(rng, 3)
    assert np.allclose(la.permute_systems(np.kron(a, b), [2, 3], [1, 0]), np.kron(b, a))


def test_embed_direct_sum():
    assert np.allclose(la.embed_direct_sum([[1.0]], 3), np.diag([1, 0, 0]))
    m = np.array([[0.5, 0.1], [0.1, 0.5]])
    assert np.allclose(la.embed_direct_sum(m, 2), m)
    with pytest.raises(ShrinkNotAllowed):
        la.embed_direct_sum(np.eye(3), 2)


def test_embed_spectrum_padded(rng):
    m = random_density(rng, 3)
    e = la.embed_direct_sum(m, 5)
    assert np.allclose(la.eig_hermitian(e).values, np.concatenate([la.eig_hermitian(m).values, [0, 0]]))


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_reconstruction_property(d, seed):
    h = random_hermitian(np.random.default_rng(seed), d)
    s = la.eig_hermitian(h)
    assert np.all(np.diff(s.values) <= 0)
    assert la.max_abs(s.reconstruct() - h) <= la.EPS_EIG


@given(st.lists(st.integers(1, 3), min_size=1, max_size=3), st.integers(0, 2**32 - 1))
def test_full_partial_trace_is_trace(dims, seed):
    d = int(np.prod(dims))
    m = random_hermitian(np.random.default_rng(seed), d)
    assert np.isclose(la.partial_trace(m, dims, [])[0, 0], np.trace(m))


@given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_power_times_pinv_is_support_projector(d, rank, seed):
    rank = min(rank, d)
    m = random_density(np.random.default_rng(seed), d, rank)
    prod = la.mpower(m, 1.0) @ la.hermitian_function(m, "pinv")
    assert la.max_abs(prod - la.support_projector(m)) <= la.EPS_EIG


@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_kron_associative_and_trace_multiplicative(da, db, dc, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_hermitian(rng, d) for d in (da, db, dc))
    assert np.allclose(la.kron(la.kron(a, b), c), la.kron(a, la.kron(b, c)))
    assert np.isclose(np.trace(la.kron(a, b)), np.trace(a) * np.trace(b))


def test_real_embedding_preserves_psd(rng):
    from condent.sdp import real_embedding

    for _ in range(20):
        h = random_hermitian(rng, 3)
        low = np.linalg.eigvalsh(h)[0]
        low_r = np.linalg.eigvalsh(real_embedding(h))[0]
        assert np.isclose(low, low_r)
