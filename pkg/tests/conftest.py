import time

import numpy as np
import pytest

from sparsesqrt import SolverConfig, SparseMatrix, bandwidth_l, siai, siai_f, tridiag

SUMMARY = []


def spd_matrix(seed, n, cond_decades=2.0):
    """Seeded ``Q diag(logspace) Q^T`` with condition number ``10**cond_decades``."""
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    a = (q * np.logspace(0.0, cond_decades, n)) @ q.T
    return 0.5 * (a + a.T)


def sqrt_oracle(a):
    w, v = np.linalg.eigh(a)
    return (v * np.sqrt(w)) @ v.T


def norm1(m):
    return float(np.abs(m).sum(axis=0).max())


def dense_of(m):
    return m.to_dense() if isinstance(m, SparseMatrix) else np.asarray(m)


def spd_suite(base_seed=0, count=20, sizes=range(10, 31)):
    sizes = list(sizes)
    return [spd_matrix(base_seed + i, sizes[i % len(sizes)]) for i in range(count)]


class _Run:
    def __init__(self, solver, a, cfg):
        self.trajectory = []
        t0 = time.perf_counter()
        self.result = solver(a, cfg, callback=lambda st: self.trajectory.append(bandwidth_l(st.X)))
        self.wall = time.perf_counter() - t0


@pytest.fixture(scope="session")
def big_tridiag():
    return tridiag(10_000, -1.0)


@pytest.fixture(scope="session")
def big_unfiltered(big_tridiag):
    """Unfiltered sparse run on n = 10000; several minutes, so done once."""
    return _Run(siai, big_tridiag, SolverConfig(tol=1e-13, error_mode="rel"))


@pytest.fixture(scope="session")
def big_filtered(big_tridiag):
    return _Run(siai_f, big_tridiag, SolverConfig(tol=1e-13, error_mode="rel"))


@pytest.fixture
def report():
    """Record a one-line verdict that is echoed in the terminal summary."""

    def _report(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} {label}" + (f": {detail}" if detail else "")
        SUMMARY.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if SUMMARY:
        terminalreporter.section("acceptance criteria")
        for line in SUMMARY:
            terminalreporter.write_line(line)
