import numpy as np
import pytest

from blockszego.experiments import (
    floquet_problem,
    gaussian_block,
    loglog_slope,
    ritz_problem,
    ritz_start_block,
    run_algorithm,
    sweep,
    timing_table,
    verify_suite,
)

from conftest import SWEEP_MS


def test_loglog_slope_recovers_power():
    ms = np.array([10, 20, 40])
    assert loglog_slope(ms, 3.0 * ms ** 2) == pytest.approx(2.0)


def test_gaussian_block_seeded():
    assert np.array_equal(gaussian_block(30, 2, 4), gaussian_block(30, 2, 4))
    assert not np.array_equal(gaussian_block(30, 2, 4), gaussian_block(30, 2, 5))


def test_run_algorithm_rejects_unknown():
    A, B = floquet_problem(20, 1, 0)
    with pytest.raises(ValueError):
        run_algorithm("lanczos", A, B, 2)


def test_laurent_baseline_has_no_projection():
    A, B = floquet_problem(50, 2, 0)
    assert run_algorithm("laurent_gs", A, B, 3).projected is None
    assert run_algorithm("cmv", A, B, 3).projected is not None


def test_timing_table_schema():
    A, B = floquet_problem(100, 2, 0)
    t = timing_table(sweep(A, B, (2, 4), project=False, repeats=2))
    assert t.columns == ["m", "time_arnoldi", "time_isometric", "time_laurent_gs", "time_cmv"]
    assert t.column("m").tolist() == [2.0, 4.0] and np.all(t.column("time_cmv") > 0)


@pytest.mark.slow
def test_arnoldi_to_isometric_time_ratio_grows(floquet_sweep):
    _, records = floquet_sweep
    t = {(r.algorithm, r.m): r.time for r in records}
    lo, hi = SWEEP_MS[0], SWEEP_MS[-1]
    assert t["arnoldi", hi] / t["isometric", hi] > t["arnoldi", lo] / t["isometric", lo]


def test_ritz_start_block_touches_eigenspace():
    A = ritz_problem(100, 0)
    B = ritz_start_block(A, 4, np.random.default_rng(0))
    comp = np.linalg.svd(A.eigenvectors[:, :4].conj().T @ B, compute_uv=False)
    assert comp.min() > 0.5


def test_verify_suite_default_and_corrupted():
    checks = verify_suite()
    assert all(c.passed for c in checks) and len(checks) == 11
    bad = verify_suite(corrupt_alpha=True)
    assert [c.name for c in bad if not c.passed]
