import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockszego.errors import (
    IndefiniteMatrix,
    InvalidInput,
    NotHermitian,
    SingularMatrix,
)
from blockszego.linalg import (
    as_dense,
    dense_eigenvalues,
    frobenius_norm,
    hermitian_psd_sqrt,
    left_solve_hpd,
    right_solve_hpd,
    small_inverse,
    spectral_norm,
    thin_qr_rank_revealing,
)
from blockszego.operators import haar_unitary
from blockszego.diagnostics import match_eigenvalues

from conftest import crandn


def test_as_dense_rejects_nonfinite():
    with pytest.raises(InvalidInput):
        as_dense(np.array([[1.0, np.nan]]))
    M = as_dense(np.arange(4.0).reshape(2, 2))
    assert M.dtype == np.complex128 and M.flags.f_contiguous


def test_qr_zero_matrix_has_rank_zero():
    qr = thin_qr_rank_revealing(np.zeros((6, 3)))
    assert qr.rank == 0 and qr.Q.shape == (6, 0) and qr.R.shape == (0, 3)


def test_qr_orthonormal_input(rng):
    W = haar_unitary(8, rng)[:, :3]
    qr = thin_qr_rank_revealing(W)
    assert qr.rank == 3
    # Q equals W up to column phases, R is a diagonal phase matrix
    assert np.allclose(np.abs(np.diag(qr.R)), 1, atol=1e-13)
    assert np.allclose(qr.R, np.diag(np.diag(qr.R)), atol=1e-13)
    assert np.allclose(qr.Q @ qr.R, W, atol=1e-13)


def test_qr_detects_rank_one(rng):
    v = crandn(rng, 10)
    v /= np.linalg.norm(v)
    W = np.column_stack([v, 2 * v])
    qr = thin_qr_rank_revealing(W)
    assert qr.rank == 1
    assert np.linalg.norm(W - qr.Q @ qr.R) <= 1e-12 * np.linalg.norm(W)


def test_qr_relative_scale_flags_roundoff_residual(rng):
    X = crandn(rng, 20, 2)
    W = 1e-15 * crandn(rng, 20, 2)
    assert thin_qr_rank_revealing(W).rank == 2
    assert thin_qr_rank_revealing(W, tol=1e-10, scale=np.linalg.norm(X, 2)).rank == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 8), st.integers(0, 2**32 - 1))
def test_qr_reconstruction_property(s, extra, seed):
    rng = np.random.default_rng(seed)
    n = s + extra
    W = crandn(rng, n, s)
    qr = thin_qr_rank_revealing(W)
    r = qr.rank
    assert np.linalg.norm(W - qr.Q @ qr.R) <= 1e-12 * np.linalg.norm(W)
    assert np.linalg.norm(qr.Q.conj().T @ qr.Q - np.eye(r)) <= 1e-12 * np.sqrt(r)


def test_sqrt_identity_and_scalar():
    assert np.allclose(hermitian_psd_sqrt(np.eye(3)), np.eye(3))
    assert hermitian_psd_sqrt(np.array([[0.75]]))[0, 0].real == pytest.approx(0.8660254037844386, rel=1e-15)


def test_sqrt_from_eigendecomposition(rng):
    U = haar_unitary(2, rng)
    M = U @ np.diag([4.0, 1.0]) @ U.conj().T
    S = hermitian_psd_sqrt(M)
    assert np.allclose(S, U @ np.diag([2.0, 1.0]) @ U.conj().T, atol=1e-13)
    assert np.allclose(S @ S, M, atol=1e-13)


def test_sqrt_clamps_roundoff_negatives():
    a = np.array([[1 - 1e-17]])
    S = hermitian_psd_sqrt(np.eye(1) - a @ a.conj().T)
    assert np.isfinite(S).all()


def test_sqrt_errors():
    with pytest.raises(NotHermitian):
        hermitian_psd_sqrt(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(IndefiniteMatrix):
        hermitian_psd_sqrt(np.diag([1.0, -0.5]))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_sqrt_involution_property(s, seed):
    rng = np.random.default_rng(seed)
    G = crandn(rng, s, s)
    S = G @ G.conj().T  # Hermitian psd
    R = hermitian_psd_sqrt(S @ S)
    assert np.linalg.norm(R - S) <= 1e-10 * np.linalg.norm(S)


def test_small_inverse(rng):
    assert np.allclose(small_inverse(np.eye(3)), np.eye(3))
    assert np.allclose(small_inverse(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))
    M = haar_unitary(3, rng) @ np.diag([1.0, 2.0, 3.0]) @ haar_unitary(3, rng)
    assert np.linalg.norm(M @ small_inverse(M) - np.eye(3)) <= 1e-13
    with pytest.raises(SingularMatrix):
        small_inverse(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_hpd_solves(rng):
    G = crandn(rng, 4, 4)
    rho = G @ G.conj().T + np.eye(4)
    Y = crandn(rng, 30, 4)
    assert np.allclose(right_solve_hpd(Y, rho) @ rho, Y, atol=1e-12)
    Z = crandn(rng, 4, 7)
    assert np.allclose(rho @ left_solve_hpd(rho, Z), Z, atol=1e-12)


def test_dense_eigenvalues_examples():
    ev = dense_eigenvalues(np.diag([1, 1j, -1]))
    assert match_eigenvalues(ev, [1, 1j, -1]) <= 1e-15
    t = 0.7
    rot = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    assert match_eigenvalues(dense_eigenvalues(rot), [np.exp(1j * t), np.exp(-1j * t)]) <= 1e-14
    companion = np.array([[0.0, 1.0], [1.0, 0.0]])  # z^2 - 1
    assert match_eigenvalues(dense_eigenvalues(companion), [1, -1]) <= 1e-15


def test_dense_eigenvalues_size_cap():
    with pytest.raises(InvalidInput):
        dense_eigenvalues(np.eye(5), max_dim=4)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_eigenvalues_invariant_under_unitary_conjugation(k, seed):
    rng = np.random.default_rng(seed)
    M = crandn(rng, k, k)
    U = haar_unitary(k, rng)
    gap = match_eigenvalues(dense_eigenvalues(M), dense_eigenvalues(U.conj().T @ M @ U))
    assert gap <= 1e-10 * max(1.0, np.linalg.norm(M, 2))


def test_norms():
    assert spectral_norm(np.eye(3)) == pytest.approx(1)
    assert frobenius_norm(np.eye(3)) == pytest.approx(np.sqrt(3))
    u = np.array([0.6, 0.8])
    v = np.array([1.0, 0.0])
    assert spectral_norm(np.outer(u, v)) == pytest.approx(1)
    assert frobenius_norm(np.outer(u, v)) == pytest.approx(1)
    assert spectral_norm(np.diag([3.0, 4.0])) == pytest.approx(4)
    assert frobenius_norm(np.diag([3.0, 4.0])) == pytest.approx(5)
