import numpy as np
import pytest
from scipy.linalg import expm

ACCEPTANCE_LINES: list[str] = []


def jc_dense(n_max, lam, omega=0.0):
    """Dense resonant JC Hamiltonian on the ``[g; e]`` ordering, built independently."""
    d = n_max + 1
    h = np.zeros((2 * d, 2 * d), dtype=complex)
    for n in range(n_max):
        # sigma_+ a : |g, n+1> -> sqrt(n+1) |e, n>
        h[d + n, n + 1] = lam * np.sqrt(n + 1)
        h[n + 1, d + n] = lam * np.sqrt(n + 1)
    for n in range(d):
        h[n, n] += omega * (n - 0.5)
        h[d + n, d + n] += omega * (n + 0.5)
    return h


def dense_propagator(n_max, lam, t, omega=0.0):
    return expm(-1j * t * jc_dense(n_max, lam, omega))


def random_vector(rng, size):
    v = rng.normal(size=size) + 1j * rng.normal(size=size)
    return v / np.linalg.norm(v)


@pytest.fixture
def acceptance_report():
    def record(criterion, ok, detail):
        line = f"{criterion} {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
