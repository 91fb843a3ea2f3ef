import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from trilinear import analytic
from trilinear.analytic import (
    beam_splitter_amplitudes, beam_splitter_dpmf, beam_splitter_pmf, ramsey_populations, squeezed_cutoff,
    squeezed_vacuum_amplitudes, squeezed_vacuum_dpmf, squeezed_vacuum_pmf, twin_fock_discrepancy, twin_fock_pmf,
    twin_fock_pmf_printed,
)
from conftest import two_mode_expm_split

N_ORACLE = 600


@pytest.fixture(scope="module")
def squeeze_oracle():
    a = np.diag(np.sqrt(np.arange(1, N_ORACLE + 1, dtype=float)), 1)

    def state(r, phi):
        gen = 0.5 * r * (np.exp(-1j * phi) * a @ a - np.exp(1j * phi) * a.T @ a.T)
        vac = np.zeros(N_ORACLE + 1)
        vac[0] = 1.0
        return expm(gen) @ vac

    return state


def test_squeezed_reference_values():
    p = squeezed_vacuum_pmf(1.466, 40)
    assert abs(p[0] - 0.438) < 1e-3
    assert abs(p[2] - 0.177) < 1e-3
    assert np.all(p[1::2] == 0)


@pytest.mark.parametrize("r", [0.1, 0.733, 1.466, 2.0])
def test_squeezed_matches_matrix_exponential(squeeze_oracle, r):
    psi = squeeze_oracle(r, analytic.SQUEEZE_PHASE)
    assert np.max(np.abs(squeezed_vacuum_pmf(r, 80) - np.abs(psi[:81]) ** 2)) < 1e-10
    assert np.max(np.abs(squeezed_vacuum_amplitudes(r, 80) - psi[:81])) < 1e-10


def test_squeezed_phase_convention(squeeze_oracle):
    psi = squeeze_oracle(0.5, 0.3)
    assert np.max(np.abs(squeezed_vacuum_amplitudes(0.5, 40, phi=0.3) - psi[:41])) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 3.0))
def test_squeezed_pmf_normalized(r):
    n_max = squeezed_cutoff(r)
    p = squeezed_vacuum_pmf(r, n_max)
    assert abs(p.sum() - 1) < 1e-12
    mean = np.dot(np.arange(n_max + 1), p)
    assert math.isclose(mean, math.sinh(r) ** 2, rel_tol=1e-9, abs_tol=1e-12)


def test_squeezed_derivative():
    r, h = 0.8, 1e-6
    fd = (squeezed_vacuum_pmf(r + h, 60) - squeezed_vacuum_pmf(r - h, 60)) / (2 * h)
    assert np.max(np.abs(squeezed_vacuum_dpmf(r, 60) - fd)) < 1e-8


def test_negative_squeeze_rejected():
    with pytest.raises(ValueError):
        squeezed_vacuum_pmf(-0.1, 10)


@pytest.mark.parametrize("n", range(0, 6))
@pytest.mark.parametrize("x", [0.0, 0.2, 0.7, math.pi / 4, 1.3])
def test_beam_splitter_oracle(n, x):
    assert np.max(np.abs(beam_splitter_pmf(n, x) - two_mode_expm_split(n, 0, x))) < 1e-10
    assert np.max(np.abs(twin_fock_pmf(n, x) - two_mode_expm_split(n, n, x))) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 4), st.integers(0, 4), st.floats(-2.0, 2.0))
def test_amplitudes_unitary(n_b, n_r, x):
    amp = beam_splitter_amplitudes(n_b, n_r, x)
    assert abs(np.sum(np.abs(amp) ** 2) - 1) < 1e-12
    assert np.max(np.abs((np.abs(amp) ** 2).sum(axis=1) - two_mode_expm_split(n_b, n_r, x))) < 1e-10


def test_beam_splitter_derivative():
    x, h = 0.4, 1e-6
    fd = (beam_splitter_pmf(3, x + h) - beam_splitter_pmf(3, x - h)) / (2 * h)
    assert np.max(np.abs(beam_splitter_dpmf(3, x) - fd)) < 1e-8


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_twin_fock_balanced_parity(n):
    # at a 50:50 split only even k_b survive
    p = twin_fock_pmf(n, math.pi / 4)
    assert np.max(p[1::2]) < 1e-14
    assert abs(p.sum() - 1) < 1e-12
    if n == 1:
        assert np.allclose(p, [0.5, 0, 0.5])


def test_printed_double_sum_discrepancy():
    rows = twin_fock_discrepancy()
    by_n = {}
    for n, x, total, diff in rows:
        by_n.setdefault(n, []).append((total, diff))
    for n in (0, 1):
        assert all(d < 1e-12 for _, d in by_n[n])
    # the typeset form stops being a distribution from n = 2 on
    assert any(abs(t - 1) > 1e-3 for t, _ in by_n[2])
    assert twin_fock_pmf_printed(3, 0.3).shape == (7,)


def test_ramsey():
    down, up = ramsey_populations(2, 0.5, 1.0)
    assert math.isclose(down, math.cos(1.0) ** 2) and math.isclose(down + up, 1.0)


def test_effective_params():
    p = analytic.effective_params(2.0, 10.0, 0.5, 3.0)
    assert math.isclose(p.r, 0.6) and math.isclose(p.theta, 0.2) and p.phi == analytic.SQUEEZE_PHASE
