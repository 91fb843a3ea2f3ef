"""Fisher information and Cramer-Rao bounds for estimating the trilinear coupling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .fock import Ket

PROBABILITY_FLOOR = 1e-12


@dataclass
class ProbabilityModel:
    """Outcome distribution as a function of the coupling ``lam`` (rad/s).

    ``derivative`` (same signature, returning d p / d lam) selects analytic
    derivatives; without it central differences with one Richardson step are used.
    ``lambda_scale`` sets the absolute step when probing at ``lam = 0``.
    """

    evaluator: Callable[[float], np.ndarray]
    derivative: Optional[Callable[[float], np.ndarray]] = None
    fd_rel_step: float = 1e-4
    lambda_scale: float = 1.0
    normalization_tol: float = 1e-9

    @property
    def derivative_mode(self) -> str:
        return "analytic" if self.derivative is not None else "central_difference"

    def __call__(self, lam: float) -> np.ndarray:
        return np.asarray(self.evaluator(lam), dtype=float)

    def step(self, lam: float) -> float:
        return self.fd_rel_step * (abs(lam) if lam != 0 else self.lambda_scale)


@dataclass
class FisherReport:
    value: float
    dropped_probability: float
    dropped_derivative_sq: float


@dataclass
class EstimationResult:
    cfi: Optional[float]
    qfi: Optional[float]
    delta_lambda: float
    nu: int


def _validate_pmf(p: np.ndarray, tol: float) -> None:
    if np.any(p < -tol):
        raise ValueError(f"probability vector has negative entries (min {p.min():.3e})")
    if abs(p.sum() - 1.0) > tol:
        raise ValueError(f"probability vector sums to {p.sum():.12g}")


def richardson_derivative(f: Callable[[float], np.ndarray], x: float, h: float, executor=None) -> np.ndarray:
    probes = [x + h, x - h, x + h / 2, x - h / 2]
    values = list(executor.map(f, probes)) if executor is not None else [f(p) for p in probes]
    d_h = (values[0] - values[1]) / (2 * h)
    d_h2 = (values[2] - values[3]) / h
    return (4 * d_h2 - d_h) / 3


def fisher_report(model: ProbabilityModel, lam: float, executor=None) -> FisherReport:
    p = model(lam)
    _validate_pmf(p, model.normalization_tol)
    if model.derivative is not None:
        dp = np.asarray(model.derivative(lam), dtype=float)
    else:
        dp = richardson_derivative(model, lam, model.step(lam), executor)
    keep = p > PROBABILITY_FLOOR
    value = float(np.sum(dp[keep] ** 2 / p[keep]))
    return FisherReport(value, float(p[~keep].sum()), float(np.sum(dp[~keep] ** 2)))


def cfi(model: ProbabilityModel, lam: float, executor=None) -> float:
    """Classical Fisher information ``sum_n (d p_n / d lam)^2 / p_n``."""
    return fisher_report(model, lam, executor).value


def _amplitudes(state) -> np.ndarray:
    return state.amplitudes if isinstance(state, Ket) else np.asarray(state, dtype=complex)


def qfi_pure(
    state_fn: Callable[[float], object],
    lam: float,
    rel_step: float = 1e-4,
    lambda_scale: float = 1.0,
    norm_tol: float = 1e-9,
) -> float:
    """Pure-state quantum Fisher information ``4 (<d psi|d psi> - |<psi|d psi>|^2)``.

    The global phase of every probed state is fixed so that the amplitude that
    is largest at ``lam`` is real and non-negative before differencing.
    """
    psi = _amplitudes(state_fn(lam))
    if abs(np.linalg.norm(psi) - 1) > norm_tol:
        raise ValueError("state is not normalized")
    anchor = int(np.argmax(np.abs(psi)))

    def aligned(x):
        v = _amplitudes(state_fn(x))
        if abs(np.linalg.norm(v) - 1) > norm_tol:
            raise ValueError(f"state at lambda={x} is not normalized")
        a = v[anchor]
        return v * (np.conj(a) / abs(a)) if abs(a) > 0 else v

    h = rel_step * (abs(lam) if lam != 0 else lambda_scale)
    dpsi = richardson_derivative(aligned, lam, h)
    psi = aligned(lam)
    overlap = np.vdot(psi, dpsi)
    value = 4 * (np.vdot(dpsi, dpsi).real - abs(overlap) ** 2)
    return max(float(value), 0.0)


def cramer_rao(fisher: float, nu: int = 1) -> float:
    """Smallest standard deviation ``1 / sqrt(nu F)`` allowed by Fisher information ``F``."""
    if not fisher > 0:
        raise ValueError("Fisher information must be positive")
    if int(nu) != nu or nu < 1:
        raise ValueError("repetitions must be a positive integer")
    return 1.0 / math.sqrt(nu * fisher)


def qfi_squeezed_analytic(g_b: float, omega: float, t: float, nu: int = 1) -> EstimationResult:
    """QFI ``8 g_b^2 t^2 / w^2`` of the squeezing scheme, saturated by Fock counting."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    qfi = 8.0 * g_b**2 * t**2 / omega**2
    if qfi == 0:
        raise ZeroDivisionError("vanishing Fisher information (g_b = 0 or t = 0)")
    return EstimationResult(cfi=qfi, qfi=qfi, delta_lambda=cramer_rao(qfi, nu), nu=nu)


SCHEMES = ("fock_nb", "twin_fock", "ramsey_n", "squeezing")


def analytic_cfi(scheme: str, n: int, g: float, omega: float, t: float) -> float:
    """Closed-form CFI of the effective-theory schemes.

    fock_nb: ``16 n g^2 t^2 / w^2``; twin_fock: ``32 n (n+1) g^2 t^2 / w^2``;
    ramsey_n: ``16 n^2 g^2 t^2 / w^2``; squeezing: ``8 g^2 t^2 / w^2`` (n ignored).
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    base = g**2 * t**2 / omega**2
    if scheme == "fock_nb":
        return 16 * n * base
    if scheme == "twin_fock":
        return 32 * n * (n + 1) * base
    if scheme == "ramsey_n":
        return 16 * n**2 * base
    if scheme == "squeezing":
        return 8 * base
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
