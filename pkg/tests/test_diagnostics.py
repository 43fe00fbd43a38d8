import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockszego.diagnostics import (
    ExperimentResult,
    match_eigenvalues,
    orthogonality_error,
    projection_error,
    ritz_distances,
    similarity_check,
    verify_verblunsky,
)
from blockszego.errors import DimensionMismatch
from blockszego.krylov import block_isometric_arnoldi, cmv_cutoff, hessenberg_from_schur, start_block
from blockszego.operators import DenseOperator, unitary_with_spectrum

from conftest import crandn


def test_orthogonality_duplicated_block(rng):
    # the Gram matrix gains two off-diagonal identity blocks
    for s in (1, 3):
        Q, _ = np.linalg.qr(crandn(rng, 20, 2 * s))
        X = np.hstack([Q, Q[:, :s]])
        assert orthogonality_error(X) == pytest.approx(np.sqrt(2 * s), rel=1e-12)
        assert orthogonality_error(Q) <= 1e-14
    assert orthogonality_error(np.hstack([Q[:, :1], Q[:, :1]])) >= np.sqrt(2) - 1e-12


def test_projection_error_zeroed_block(rng):
    A = unitary_with_spectrum(np.exp(2j * np.pi * rng.random(30)), seed=3)
    V1, _ = start_block(crandn(rng, 30, 2))
    res = block_isometric_arnoldi(A, V1, 5, finalize=True)
    H = hessenberg_from_schur(res.alphas).dense()
    assert projection_error(A, res.basis, H) <= 1e-12
    bad = H.copy()
    blk = bad[2:4, 0:2].copy()
    bad[2:4, 0:2] = 0
    assert projection_error(A, res.basis, bad) == pytest.approx(np.linalg.norm(blk), rel=1e-10)
    with pytest.raises(DimensionMismatch):
        projection_error(A, res.basis, H[:4, :4])


def test_ritz_distances_examples():
    d = ritz_distances(np.diag([1, 1, 1j]), 1.0, 3)
    assert np.allclose(d, [0, 0, np.sqrt(2)])
    # the nilpotent down-shift has all Ritz values at 0
    assert np.allclose(ritz_distances(np.eye(5, k=-1), 1.0, 3), 1.0)
    padded = ritz_distances(np.eye(2), 1.0, 4)
    assert np.isnan(padded[2:]).all()


def test_similarity_invariance(rng):
    A = unitary_with_spectrum(np.exp(2j * np.pi * rng.random(40)), seed=4)
    V1, _ = start_block(crandn(rng, 40, 2))
    res = block_isometric_arnoldi(A, V1, 6, finalize=True)
    H = hessenberg_from_schur(res.alphas).dense()
    U, _ = np.linalg.qr(crandn(rng, 12, 12))
    assert similarity_check(H, U.conj().T @ H @ U) <= 1e-10
    assert similarity_check(H, cmv_cutoff(res.alphas)) <= 1e-10


def test_match_eigenvalues_repeated():
    a = np.array([1, 1, 1j, -1])
    b = np.array([-1, 1j, 1 + 1e-13, 1])
    assert match_eigenvalues(a, b) <= 1e-12
    with pytest.raises(DimensionMismatch):
        match_eigenvalues(a, b[:3])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_match_eigenvalues_permutation_invariant(n, seed):
    rng = np.random.default_rng(seed)
    a = np.exp(2j * np.pi * rng.random(n))
    assert match_eigenvalues(a, rng.permutation(a)) == 0.0


def test_verify_verblunsky_scalar():
    rep = verify_verblunsky(np.array([0.99]))
    assert rep.ok and rep.norms[0] == pytest.approx(0.99)
    assert np.sqrt(rep.min_eig[0]) == pytest.approx(0.14106735979665894, rel=1e-12)
    assert rep.rho_identity[0] <= 1e-15
    bad = verify_verblunsky(np.array([0.3, 1.5]))
    assert not bad.ok and "FAILED" in str(bad)


def test_verify_verblunsky_matrix(rng):
    a = crandn(rng, 4, 3, 3)
    a /= 2 * np.linalg.norm(a, 2, axis=(1, 2))[:, None, None]
    rep = verify_verblunsky(a)
    assert rep.ok and np.all(rep.rho_identity <= 1e-14)
    assert np.allclose(rep.norms, 0.5)


def test_experiment_result_csv_round_trip(tmp_path):
    r = ExperimentResult(["m", "time_arnoldi", "label"])
    r.add(m=10, time_arnoldi=0.123456789012345, label="x")
    r.add(m=20, time_arnoldi=float("nan"), label="y")
    p = tmp_path / "t.csv"
    r.to_csv(p)
    back = ExperimentResult.read_csv(p)
    assert back.columns == r.columns
    assert back.rows[0] == [10, 0.123456789012345, "x"]
    assert np.isnan(back.rows[1][1])
    assert np.allclose(r.column("m"), [10, 20])
    with pytest.raises(DimensionMismatch):
        r.add(m=3)
    r.meta["seed"] = 0
    r.write_meta(tmp_path / "t.meta")
    assert (tmp_path / "t.meta").read_text() == "seed = 0\n"
