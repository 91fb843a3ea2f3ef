import numpy as np
import pytest
from scipy.linalg import expm

from trilinear.fock import SpaceLayout


def two_mode_expm_split(n_b, n_r, x):
    """Breathing-mode pmf from expm of ``x (a^+ b + a b^+)`` on a two-mode space."""
    cut = n_b + n_r
    a = np.diag(np.sqrt(np.arange(1, cut + 1, dtype=float)), 1)
    eye = np.eye(cut + 1)
    A, B = np.kron(a, eye), np.kron(eye, a)
    gen = A.T @ B + A @ B.T
    psi0 = np.zeros((cut + 1) ** 2)
    psi0[n_b * (cut + 1) + n_r] = 1.0
    psi = expm(1j * x * gen) @ psi0
    return (np.abs(psi.reshape(cut + 1, cut + 1)) ** 2).sum(axis=1)


@pytest.fixture
def small_layout():
    return SpaceLayout(4, 6)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
