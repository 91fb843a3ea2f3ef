"""Ready-made ``ProbabilityModel``s: effective-theory closed forms and exact propagation."""

from __future__ import annotations

import numpy as np

from . import analytic
from .estimation import ProbabilityModel
from .fock import Ket, SpaceLayout, StateSpec, fock_probs, prepare_state, spin_probs
from .hamiltonians import DriveConfig, h_case1, h_case2
from .propagation import DEFAULT_SETTINGS, EigenPropagator, PropagatorSettings, check_state


def squeezing_model(g_b: float, omega: float, t: float, lam_max: float, analytic_derivative: bool = True,
                    n_max: int | None = None) -> ProbabilityModel:
    """Rocking-mode Fock counting on the squeezed vacuum; ``r = 2 g_b lam t / w``.

    ``lam_max`` fixes the truncation so every probe shares one outcome space.
    """
    rate = 2 * g_b * t / omega
    if n_max is None:
        n_max = analytic.squeezed_cutoff(abs(rate * lam_max) * 1.05 + 1e-3)

    def p(lam):
        return analytic.squeezed_vacuum_pmf(rate * lam, n_max)

    def dp(lam):
        return analytic.squeezed_vacuum_dpmf(rate * lam, n_max) * rate

    return ProbabilityModel(p, dp if analytic_derivative else None, lambda_scale=lam_max)


def beam_splitter_model(n_b: int, g_r: float, omega: float, t: float, analytic_derivative: bool = True):
    rate = 2 * g_r * t / omega

    def p(lam):
        return analytic.beam_splitter_pmf(n_b, rate * lam)

    def dp(lam):
        return analytic.beam_splitter_dpmf(n_b, rate * lam) * rate

    return ProbabilityModel(p, dp if analytic_derivative else None, lambda_scale=1 / rate)


def twin_fock_model(n: int, g_r: float, omega: float, t: float) -> ProbabilityModel:
    rate = 2 * g_r * t / omega
    return ProbabilityModel(lambda lam: analytic.twin_fock_pmf(n, rate * lam), lambda_scale=1 / rate)


def ramsey_model(n: int, g_r: float, omega: float, t: float, analytic_derivative: bool = True):
    rate = 2 * g_r * t / omega

    def p(lam):
        return np.array(analytic.ramsey_populations(n, rate * lam, 1.0))

    def dp(lam):
        phase = n * rate * lam
        d = -2 * np.cos(phase) * np.sin(phase) * n * rate
        return np.array([d, -d])

    return ProbabilityModel(p, dp if analytic_derivative else None, lambda_scale=1 / rate)


def hamiltonian_for(drive: DriveConfig):
    return h_case1 if drive.case == 1 else h_case2


def exact_state_fn(drive: DriveConfig, layout: SpaceLayout, state: StateSpec | str, t: float,
                   settings: PropagatorSettings = DEFAULT_SETTINGS):
    """``lam -> psi(t)`` from the full rotating-frame Hamiltonian."""
    builder = hamiltonian_for(drive)
    psi0 = prepare_state(layout, state)

    def state_at(lam: float) -> Ket:
        psi = EigenPropagator(builder(layout, drive.with_lambda(lam))).evolve(psi0, t)
        check_state(psi, settings)
        return psi

    return state_at


def measure(psi: Ket, measurement: str) -> np.ndarray:
    if measurement == "spin":
        return np.array(spin_probs(psi))
    if measurement in ("fock_b", "fock_r"):
        return fock_probs(psi, measurement[-1])
    raise ValueError(f"unknown measurement {measurement!r}")


def exact_model(drive: DriveConfig, layout: SpaceLayout, state: StateSpec | str, t: float, measurement: str,
                settings: PropagatorSettings = DEFAULT_SETTINGS) -> ProbabilityModel:
    state_at = exact_state_fn(drive, layout, state, t, settings)
    scale = abs(drive.lambda_) or abs(drive.g) ** 2 / abs(drive.omega)
    return ProbabilityModel(lambda lam: measure(state_at(lam), measurement), lambda_scale=scale)
