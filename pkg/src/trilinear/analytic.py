"""Closed-form predictions of the effective (second-order) dynamics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

SQUEEZE_PHASE = -math.pi / 2


@dataclass(frozen=True)
class EffectiveParams:
    r: float
    phi: float
    theta: float


def squeeze_parameter(g_b: float, omega: float, lam: float, t: float) -> float:
    return 2.0 * g_b * lam / omega * t


def beam_splitter_rate(g_r: float, omega: float, lam: float) -> float:
    return 2.0 * g_r * lam / omega


def effective_params(g: float, omega: float, lam: float, t: float) -> EffectiveParams:
    return EffectiveParams(
        r=squeeze_parameter(g, omega, lam, t),
        phi=SQUEEZE_PHASE,
        theta=beam_splitter_rate(g, omega, lam),
    )


def _log_central_binomial_over_4k(k: np.ndarray) -> np.ndarray:
    return gammaln(2 * k + 1) - 2 * gammaln(k + 1) - 2 * k * math.log(2.0)


def squeezed_vacuum_pmf(r: float, n_max: int) -> np.ndarray:
    """Fock distribution of squeezed vacuum on ``n = 0..n_max`` (odd entries vanish)."""
    if r < 0:
        raise ValueError("squeeze parameter must be non-negative")
    p = np.zeros(n_max + 1)
    k = np.arange(n_max // 2 + 1, dtype=float)
    if r == 0:
        p[0] = 1.0
        return p
    log_p = 2 * k * math.log(math.tanh(r)) - math.log(math.cosh(r)) + _log_central_binomial_over_4k(k)
    p[::2] = np.exp(log_p)
    return p


def squeezed_vacuum_dpmf(r: float, n_max: int) -> np.ndarray:
    """Derivative of :func:`squeezed_vacuum_pmf` with respect to ``r``."""
    p = squeezed_vacuum_pmf(r, n_max)
    n = np.arange(n_max + 1)
    if r == 0:
        return np.zeros_like(p)
    return p * (n / (math.sinh(r) * math.cosh(r)) - math.tanh(r))


def squeezed_vacuum_amplitudes(r: float, n_max: int, phi: float = SQUEEZE_PHASE) -> np.ndarray:
    """Amplitudes of ``exp((r/2)(e^{-i phi} a^2 - e^{i phi} a^+2)) |0>``."""
    amp = np.zeros(n_max + 1, dtype=complex)
    k = np.arange(n_max // 2 + 1, dtype=float)
    phase = -np.exp(1j * phi)
    if r == 0:
        amp[0] = 1.0
        return amp
    log_mag = k * math.log(math.tanh(r)) - 0.5 * math.log(math.cosh(r)) + 0.5 * _log_central_binomial_over_4k(k)
    amp[::2] = np.exp(log_mag) * phase**k
    return amp


def squeezed_cutoff(r: float, tail_tol: float = 1e-16) -> int:
    """Smallest even ``n_max`` with squeezed-vacuum tail mass below ``tail_tol``."""
    if r == 0:
        return 0
    t2 = math.tanh(r) ** 2
    k = 0
    while True:
        k += 16
        p = squeezed_vacuum_pmf(r, 2 * k)
        tail = p[-1] * t2 / (1 - t2)  # geometric bound on what is left
        if tail < tail_tol * 1e-2:
            return 2 * k


def beam_splitter_pmf(n_b: int, theta_t: float) -> np.ndarray:
    """Breathing-mode distribution after splitting ``|n_b, 0>``: ``C(n,k) cos^2k sin^2(n-k)``."""
    if n_b < 0:
        raise ValueError("n_b must be non-negative")
    c2, s2 = math.cos(theta_t) ** 2, math.sin(theta_t) ** 2
    return np.array([math.comb(n_b, k) * c2**k * s2 ** (n_b - k) for k in range(n_b + 1)])


def beam_splitter_dpmf(n_b: int, theta_t: float) -> np.ndarray:
    """Derivative of :func:`beam_splitter_pmf` with respect to ``theta_t``."""
    c, s = math.cos(theta_t), math.sin(theta_t)
    out = np.zeros(n_b + 1)
    for k in range(n_b + 1):
        term = 0.0
        if k > 0:
            term += -2 * k * c ** (2 * k - 1) * s * s ** (2 * (n_b - k))
        if k < n_b:
            term += 2 * (n_b - k) * s ** (2 * (n_b - k) - 1) * c * c ** (2 * k)
        out[k] = math.comb(n_b, k) * term
    return out


def beam_splitter_amplitudes(n_b: int, n_r: int, theta_t: float) -> np.ndarray:
    """``exp(i x (a^+ b + a b^+)) |n_b, n_r>`` as an ``(N+1, N+1)`` array, ``N = n_b + n_r``.

    Uses the mode rotation ``a^+ -> cos x a^+ + i sin x b^+`` (and likewise for
    ``b^+``) on the creation-operator polynomial; exact at any photon number.
    """
    total = n_b + n_r
    c, s = math.cos(theta_t), math.sin(theta_t)
    # coefficients of a^+^p b^+^q in (c A + i s B)^n_b (i s A + c B)^n_r
    poly = np.zeros((total + 1, total + 1), dtype=complex)
    for j in range(n_b + 1):
        cj = math.comb(n_b, j) * c**j * (1j * s) ** (n_b - j)
        for m in range(n_r + 1):
            cm = math.comb(n_r, m) * (1j * s) ** m * c ** (n_r - m)
            poly[j + m, total - j - m] += cj * cm
    norm = 1.0 / math.sqrt(math.factorial(n_b) * math.factorial(n_r))
    amp = np.zeros_like(poly)
    for p in range(total + 1):
        q = total - p
        amp[p, q] = poly[p, q] * norm * math.sqrt(math.factorial(p) * math.factorial(q))
    return amp


def twin_fock_pmf(n: int, theta_t: float) -> np.ndarray:
    """Breathing-mode distribution ``k_b = 0..2n`` after splitting the twin state ``|n, n>``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    amp = beam_splitter_amplitudes(n, n, theta_t)
    return (np.abs(amp) ** 2).sum(axis=1)


def twin_fock_pmf_printed(n: int, theta_t: float) -> np.ndarray:
    """The double-sum expression as typeset, kept only to tabulate its discrepancy.

    Not a valid distribution for ``n >= 2``.
    """
    s, c = math.sin(theta_t), math.cos(theta_t)
    amps = np.zeros(2 * n + 1)
    for k in range(n + 1):
        for l in range(n + 1):
            kb = n + k - l
            coeff = (
                math.factorial(n)
                * math.sqrt(math.factorial(kb) * math.factorial(n - k + l))
                / (math.factorial(k) * math.factorial(n - k) * math.factorial(l) * math.factorial(n - k))
            )
            amps[kb] += (-1) ** (n - k) * s ** (2 * n - k - l) * c ** (k + l) * coeff
    return amps**2


def twin_fock_discrepancy(n_values=range(0, 6), theta_values=(0.1, 0.3, math.pi / 4, 0.9)) -> list:
    """Rows ``(n, theta_t, sum_printed, max_abs_diff)`` comparing the printed form to the exact one."""
    rows = []
    for n in n_values:
        for x in theta_values:
            printed = twin_fock_pmf_printed(n, x)
            exact = twin_fock_pmf(n, x)
            rows.append((n, x, float(printed.sum()), float(np.max(np.abs(printed - exact)))))
    return rows


def ramsey_populations(n: int, theta: float, t: float) -> tuple:
    """Spin populations ``(cos^2(n theta t), sin^2(n theta t))`` for the binomial input family."""
    phase = n * theta * t
    return math.cos(phase) ** 2, math.sin(phase) ** 2
