import os
import subprocess
import sys

import numpy as np
import pytest

from blockszego import cli
from blockszego.config import OUTPUT_ENV
from blockszego.diagnostics import ExperimentResult
from blockszego.operators import read_matrix_market, read_sidecar


def run(*argv):
    try:
        return cli.main(list(argv))
    except SystemExit as exc:
        return exc.code


def drop_time(path):
    res = ExperimentResult.read_csv(path)
    keep = [i for i, c in enumerate(res.columns) if not c.startswith("time")]
    return [[repr(r[i]) for i in keep] for r in res.rows]


def test_print_config(capsys):
    assert run("print-config") == 0
    out = capsys.readouterr().out
    for sec in ("[matrix]", "[run]", "[tolerances]", "[timing]", "[ritz]", "[output]"):
        assert sec in out


def test_config_file_overrides(tmp_path, capsys):
    ini = tmp_path / "c.ini"
    ini.write_text("[run]\ns = 7\n")
    assert run("--config", str(ini), "print-config") == 0
    assert "s = 7" in capsys.readouterr().out
    assert run("--config", str(tmp_path / "missing.ini"), "print-config") == 3


def test_usage_errors_exit_invalid(tmp_path):
    assert run("--bogus") == 3
    assert run("experiment", "nonsense") == 3
    assert run("run", "--n", "abc") == 3
    assert run("run", "--algorithms", "lanczos", "--n", "20", "--s", "1", "--m", "2",
               "--output-dir", str(tmp_path)) == 3
    assert run("run", "--matrix", str(tmp_path / "nope.mtx"), "--output-dir", str(tmp_path)) == 3


def test_run_writes_csv_and_is_deterministic(tmp_path):
    args = ("run", "--n", "200", "--s", "2", "--m", "5, 8", "--seed", "3")
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(*args, "--output-dir", str(a)) == 0
    assert run(*args, "--output-dir", str(b)) == 0
    rows = drop_time(a / "run.csv")
    assert rows == drop_time(b / "run.csv")
    res = ExperimentResult.read_csv(a / "run.csv")
    assert res.columns == cli.RUN_COLUMNS and len(res.rows) == 8
    assert np.all(res.column("orth") <= 1e-12)
    meta = (a / "run.csv.meta").read_text()
    assert "seed = 3" in meta and "kind = floquet" in meta


def test_run_dump_basis(tmp_path):
    assert run("run", "--n", "60", "--s", "2", "--m", "4", "--algorithms", "cmv", "--dump-basis",
               "--output-dir", str(tmp_path)) == 0
    from blockszego.krylov import parse_counters, read_basis
    basis = read_basis(tmp_path / "basis_cmv_m4.bin")
    assert basis.matrix.shape == (60, 8)
    c = parse_counters((tmp_path / "basis_cmv_m4.counters").read_text())
    assert c["inner_products"] == 3 + 1 and c["algorithm"] == "cmv"


def test_run_identity_deflates(tmp_path):
    assert run("run", "--kind", "identity", "--n", "10", "--s", "2", "--m", "3",
               "--output-dir", str(tmp_path)) == 2
    res = ExperimentResult.read_csv(tmp_path / "run.csv")
    assert res.column("deflated_at").tolist() == [1.0] * 4
    assert res.column("deflation_rank").tolist() == [0.0] * 4


def test_gen_round_trip(tmp_path, capsys):
    out = tmp_path / "u.mtx"
    assert run("gen", "--kind", "unitary-spectrum", "--n", "40", "--seed", "2", "-o", str(out)) == 0
    A = read_matrix_market(out)
    meta = read_sidecar(str(out) + ".json")
    assert meta["kind"] == "unitary-spectrum" and meta["repeated"] == 4
    from blockszego.operators import gapped_spectrum
    from blockszego.diagnostics import match_eigenvalues
    lam = gapped_spectrum(40, 2, repeated=4, gap=0.35)
    assert match_eigenvalues(np.linalg.eigvals(A.matrix), lam) <= 1e-10
    assert run("run", "--matrix", str(out), "--s", "1", "--m", "3", "--output-dir", str(tmp_path)) == 0
    assert "path" in (tmp_path / "run.csv.meta").read_text()


def test_gen_floquet_zero_alphas(tmp_path):
    out = tmp_path / "z.mtx"
    assert run("gen", "--kind", "floquet", "--zero-alphas", "--n", "8", "-o", str(out)) == 0
    P = read_matrix_market(out).matrix
    assert np.array_equal(np.abs(P) @ np.ones(8), np.ones(8))


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    assert run("run", "--n", "40", "--s", "1", "--m", "2", "--algorithms", "isometric") == 0
    assert (tmp_path / "env" / "run.csv").exists()
    # an explicit flag wins over the environment
    assert run("run", "--n", "40", "--s", "1", "--m", "2", "--algorithms", "isometric",
               "--output-dir", str(tmp_path / "flag")) == 0
    assert (tmp_path / "flag" / "run.csv").exists()


def test_experiment_accuracy_and_timing(tmp_path):
    for name in ("accuracy", "timing"):
        assert run("experiment", name, "--n", "300", "--s", "2", "--ms", "4, 8",
                   "--output-dir", str(tmp_path)) == 0
        res = ExperimentResult.read_csv(tmp_path / f"{name}_floquet_n300_s2.csv")
        assert res.column("m").tolist() == [4.0, 8.0]
    acc = ExperimentResult.read_csv(tmp_path / "accuracy_floquet_n300_s2.csv")
    cols = [c for c in acc.columns if c.startswith(("orth", "proj"))]
    assert len(cols) == 7
    assert all(np.all(acc.column(c) <= 1e-12) for c in cols)


def test_experiment_ritz(tmp_path):
    assert run("experiment", "ritz", "--n", "100", "--ms", "1-4", "--output-dir", str(tmp_path)) == 0
    res = ExperimentResult.read_csv(tmp_path / "repeated_eigenvalue_ritz_distances_isometric_complex.csv")
    assert res.columns[:2] == ["m", "s1_closest1"] and len(res.rows) == 4
    first = (tmp_path / "repeated_eigenvalue_ritz_distances_isometric_complex.csv").read_text()
    assert run("experiment", "ritz", "--n", "100", "--ms", "1-4", "--output-dir", str(tmp_path)) == 0
    assert (tmp_path / "repeated_eigenvalue_ritz_distances_isometric_complex.csv").read_text() == first


def test_verify_and_negative_control(capsys):
    assert run("verify") == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert run("verify", "--corrupt-alpha") == 4
    assert "FAIL" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "blockszego", "print-config"],
                          capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 0 and "[matrix]" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "blockszego", "--nope"], capture_output=True, text=True)
    assert proc.returncode == 3
