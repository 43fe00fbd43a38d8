import numpy as np
import pytest

from blockszego.experiments import best_of, floquet_problem, sweep

SWEEP_N, SWEEP_S, SWEEP_MS = 20000, 10, (10, 20, 30, 40, 50, 60)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def floquet_sweep():
    """The large Floquet sweep shared by the accuracy and timing criteria.

    Single wall-clock timings of the short runs are noisy; the methods with
    a slope check keep the fastest of three constructions.
    """
    A, B = floquet_problem(SWEEP_N, SWEEP_S, seed=0)
    records = sweep(A, B, SWEEP_MS)
    best_of(A, B, records, 3, algorithms=("arnoldi", "isometric", "cmv"))
    return A, records


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" not in getattr(rep, "nodeid", "") or rep.when != "call":
                if not (outcome == "error" and "test_acceptance.py" in getattr(rep, "nodeid", "")):
                    continue
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" not in props:
                continue
            verdict = "PASS" if outcome == "passed" else "FAIL"
            lines.append((props["criterion"], f"criterion {props['criterion']:>2}: {verdict}  {props.get('detail', '')}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
