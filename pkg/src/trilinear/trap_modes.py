"""Two-ion crystal geometry, normal modes and the breathing/rocking coupling.

Positions are in units of the length scale ``l = (e^2 / 4 pi eps0 m w_z^2)^(1/3)``
and stiffness matrices in units of ``m w_z^2``, so axial eigenvalues are
independent of the trap strength.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import AMU, ELEMENTARY_CHARGE, EPSILON_0, HBAR

# dimensionless curvature prefactors per axis
_B_AXIS = {"x": -1.0, "y": -1.0, "z": 2.0}


class UnstableCrystalError(ValueError):
    """A normal-mode eigenvalue is negative: the linear string is not a minimum."""


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrapConfig:
    ion_mass: float = 40 * AMU
    ion_charge: float = ELEMENTARY_CHARGE
    omega_x: float = 2 * math.pi * 4.0e6
    omega_y: float = 2 * math.pi * 4.5e6
    omega_z: float = 2 * math.pi * 1.0e6
    n_ions: int = 2

    def __post_init__(self):
        for name in ("ion_mass", "ion_charge", "omega_x", "omega_y", "omega_z"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if int(self.n_ions) != self.n_ions or self.n_ions < 1:
            raise ValueError(f"n_ions must be a positive integer, got {self.n_ions!r}")
        if not (self.omega_x > self.omega_z and self.omega_y > self.omega_z):
            raise ValueError("radial trap frequencies must exceed the axial one for a linear crystal")

    def beta(self, axis: str) -> float:
        return {"x": self.omega_x, "y": self.omega_y, "z": self.omega_z}[axis] / self.omega_z


@dataclass(frozen=True)
class ModeSpectrum:
    axis: str
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns are modes
    mode_frequencies: np.ndarray


@dataclass(frozen=True)
class CouplingConstants:
    length_scale: float
    ground_state_size: float
    lambda_: float
    omega_b: float
    omega_rock_x: float
    omega_rock_y: float


@dataclass
class ResonanceReport:
    case: int
    detuning: float
    omega_b: float
    omega_rock: float
    required_omega_x: float
    lambda_: float
    omega_rock_y: float
    threshold: float
    breathing_ratio_ok: bool
    y_mode_ok: bool
    warnings: list = field(default_factory=list)


def _potential_gradient(u: np.ndarray) -> np.ndarray:
    d = u[:, None] - u[None, :]
    np.fill_diagonal(d, np.inf)
    return u - np.sum(np.sign(d) / d**2, axis=1)


def _potential_hessian(u: np.ndarray) -> np.ndarray:
    d = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(d, np.inf)
    off = -2.0 / d**3
    hess = off.copy()
    np.fill_diagonal(hess, 1.0 - off.sum(axis=1))
    return hess


def _potential(u: np.ndarray) -> float:
    iu = np.triu_indices(len(u), 1)
    return 0.5 * float(u @ u) + float(np.sum(1.0 / np.abs(u[:, None] - u[None, :])[iu]))


def equilibrium_positions(cfg: TrapConfig, max_iter: int = 200, tol: float = 1e-13) -> np.ndarray:
    """Dimensionless equilibrium positions of a linear string, sorted ascending.

    Damped Newton on the force balance with the analytic Hessian, started from
    uniform spacing ``2.018 / N**0.559``.
    """
    n = cfg.n_ions
    if n < 2:
        raise ValueError("equilibrium positions need at least two ions")
    spacing = 2.018 / n**0.559
    u = (np.arange(n) - (n - 1) / 2) * spacing
    for _ in range(max_iter):
        grad = _potential_gradient(u)
        if np.max(np.abs(grad)) < tol:
            break
        step = np.linalg.solve(_potential_hessian(u), grad)
        energy = _potential(u)
        damping = 1.0
        while damping > 1e-6:
            trial = u - damping * step
            if np.all(np.diff(trial) > 0) and _potential(trial) <= energy + 1e-15:
                break
            damping *= 0.5
        u = trial
    else:
        raise ConvergenceError(f"equilibrium solver did not converge in {max_iter} iterations")
    u = u - u.mean()
    return np.sort(u)


def stiffness_matrix(cfg: TrapConfig, axis: str, u: np.ndarray) -> np.ndarray:
    b = _B_AXIS[axis]
    u = np.asarray(u, dtype=float)
    d = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(d, np.inf)
    inv3 = 1.0 / d**3
    a = -b * inv3
    np.fill_diagonal(a, cfg.beta(axis) ** 2 + b * inv3.sum(axis=1))
    return a


def jacobi_eigh(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100):
    """Cyclic Jacobi eigen-decomposition of a small real symmetric matrix.

    Returns ascending eigenvalues and the matching orthonormal eigenvectors as
    columns, signed so that the first non-negligible component is positive.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.max(np.abs(a)), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.T @ a[idx, :]
                v[:, idx] = v[:, idx] @ rot
    else:
        raise ConvergenceError("Jacobi sweeps did not converge")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    w, v = w[order], v[:, order]
    for k in range(n):
        lead = np.argmax(np.abs(v[:, k]) > 1e-12)
        if v[lead, k] < 0:
            v[:, k] = -v[:, k]
    return w, v


def normal_modes(a: np.ndarray, axis: str = "z", omega_z: float = 1.0) -> ModeSpectrum:
    """Eigenmodes of a stiffness matrix; frequencies are ``sqrt(gamma) * omega_z``."""
    a = np.asarray(a, dtype=float)
    if not np.array_equal(a, a.T):
        raise ValueError("stiffness matrix must be symmetric")
    gamma, vecs = jacobi_eigh(a)
    if np.any(gamma < 0):
        raise UnstableCrystalError(f"unstable crystal: negative {axis} eigenvalue {gamma.min():.6g}")
    return ModeSpectrum(axis, gamma, vecs, np.sqrt(gamma) * omega_z)


def mode_spectrum(cfg: TrapConfig, axis: str) -> ModeSpectrum:
    u = equilibrium_positions(cfg)
    return normal_modes(stiffness_matrix(cfg, axis, u), axis, cfg.omega_z)


def trilinear_coupling(cfg: TrapConfig) -> CouplingConstants:
    if cfg.n_ions != 2:
        raise NotImplementedError("nonlinear coupling is only implemented for two ions")
    coulomb = cfg.ion_charge**2 / (4 * math.pi * EPSILON_0)
    length = (coulomb / (cfg.ion_mass * cfg.omega_z**2)) ** (1.0 / 3.0)
    if not math.isfinite(length):
        raise ValueError("length scale diverges; omega_z is too small")
    omega_b = math.sqrt(3.0) * cfg.omega_z
    z_b = math.sqrt(HBAR / (2 * cfg.ion_mass * omega_b))
    lam = omega_b * z_b / (2 ** (5.0 / 6.0) * length)
    return CouplingConstants(
        length_scale=length,
        ground_state_size=z_b,
        lambda_=lam,
        omega_b=omega_b,
        omega_rock_x=math.sqrt(cfg.omega_x**2 - cfg.omega_z**2),
        omega_rock_y=math.sqrt(cfg.omega_y**2 - cfg.omega_z**2),
    )


def resonance_check(cfg: TrapConfig, case: int, detuning: float, threshold: float = 20.0) -> ResonanceReport:
    """Radial frequency needed for the chosen sideband resonance and RWA sanity flags.

    Case 1 needs ``w_b = 2 w_rock + w``, case 2 ``w_b = 2 w_rock - w``.
    """
    if case not in (1, 2):
        raise ValueError(f"case must be 1 or 2, got {case!r}")
    coupling = trilinear_coupling(cfg)
    omega_b = coupling.omega_b
    omega_rock = (omega_b - detuning) / 2 if case == 1 else (omega_b + detuning) / 2
    if omega_rock <= 0:
        raise ValueError("no real radial frequency satisfies the resonance condition")
    lam = coupling.lambda_
    ok_b = omega_b >= threshold * lam
    ok_y = abs(coupling.omega_rock_y - omega_b) >= threshold * lam
    warnings = []
    if not ok_b:
        warnings.append(f"lambda/omega_b = {lam / omega_b:.3g} exceeds 1/{threshold:g}")
    if not ok_y:
        warnings.append("y rocking mode is within threshold*lambda of the breathing mode")
    return ResonanceReport(
        case=case,
        detuning=detuning,
        omega_b=omega_b,
        omega_rock=omega_rock,
        required_omega_x=math.sqrt(omega_rock**2 + cfg.omega_z**2),
        lambda_=lam,
        omega_rock_y=coupling.omega_rock_y,
        threshold=threshold,
        breathing_ratio_ok=ok_b,
        y_mode_ok=ok_y,
        warnings=warnings,
    )
