"""Shared test oracles.

The dense operators here are assembled with explicit index loops straight
from the difference equations, independently of the solver's stencil code,
so they can serve as oracles for it.
"""

import numpy as np
import pytest


def dense_laplacian_part(M: int, topology: str) -> np.ndarray:
    """Matrix of (4*v - neighbors) with the topology's boundary rows.

    The full operator for coefficient a is this matrix plus diag(a).
    Unknown (i, j) sits at row i*M + j.
    """
    n = M * M
    L = np.zeros((n, n))
    for i in range(M):
        for j in range(M):
            row = i * M + j
            L[row, row] += 4.0
            L[row, i * M + (j - 1) % M] -= 1.0
            L[row, i * M + (j + 1) % M] -= 1.0
            if topology == "torus":
                L[row, ((i - 1) % M) * M + j] -= 1.0
                L[row, ((i + 1) % M) * M + j] -= 1.0
            else:
                if i == 0:
                    L[row, 1 * M + j] -= 2.0
                else:
                    L[row, (i - 1) * M + j] -= 1.0
                    if i + 1 <= M - 1:
                        L[row, (i + 1) * M + j] -= 1.0
                    # i+1 == M is the implicit zero Dirichlet row
    return L


def dense_solve(a: np.ndarray, f: np.ndarray, q1: float, topology: str) -> np.ndarray:
    """Direct solution of the linear system, flux folded into the RHS."""
    M = a.shape[0]
    A = dense_laplacian_part(M, topology) + np.diag(a.ravel())
    b = f.astype(float).copy()
    if topology == "strip":
        b[0, :] -= 2.0 * q1 / M
    return np.linalg.solve(A, b.ravel()).reshape(M, M)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
