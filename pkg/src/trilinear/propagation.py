"""Unitary evolution under time-independent Hamiltonians.

Two routes: a cached hermitian eigendecomposition (default) and a Lanczos
short-recurrence propagator with full re-orthogonalization for larger spaces.
Every returned state is checked for norm drift and for population piling up in
the last two Fock levels of either mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .fock import Ket, LinOp, SpaceLayout, StateSpec, fock_probs, prepare_state, spin_probs, tail_mass


class TruncationError(RuntimeError):
    """Population reached the Fock cutoff of a mode."""

    def __init__(self, mode: str, mass: float, tol: float):
        self.mode = mode
        self.mass = mass
        super().__init__(f"truncation breach in mode {mode!r}: tail mass {mass:.3e} > {tol:.1e}")


class NormError(RuntimeError):
    pass


@dataclass(frozen=True)
class PropagatorSettings:
    method: str = "eig"  # "eig" or "krylov"
    krylov_dim: int = 30
    krylov_tol: float = 1e-12
    time_step: float = 1e-4
    norm_tol: float = 1e-9
    tail_mass_tol: float = 1e-6
    check_tail: bool = True

    def __post_init__(self):
        if self.method not in ("eig", "krylov"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.time_step <= 0:
            raise ValueError("time_step must be positive")
        for name in ("norm_tol", "tail_mass_tol", "krylov_tol"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.krylov_dim < 2:
            raise ValueError("krylov_dim must be at least 2")


DEFAULT_SETTINGS = PropagatorSettings()


def check_state(psi: Ket, settings: PropagatorSettings) -> None:
    drift = abs(psi.norm() - 1.0)
    if drift > settings.norm_tol:
        raise NormError(f"norm drift {drift:.3e} exceeds {settings.norm_tol:.1e}")
    if settings.check_tail:
        for mode in ("b", "r"):
            mass = tail_mass(psi, mode)
            if mass > settings.tail_mass_tol:
                raise TruncationError(mode, mass, settings.tail_mass_tol)


class EigenPropagator:
    """Diagonalizes ``H`` once; evolves any state to any time by phase factors."""

    def __init__(self, h: LinOp):
        m = h.matrix
        if h.is_real():
            m = np.real(m)
        self.layout = h.layout
        self.energies, self.vectors = np.linalg.eigh(m)

    def coefficients(self, psi0: Ket) -> np.ndarray:
        return self.vectors.conj().T @ psi0.amplitudes

    def _to_basis(self, c: np.ndarray) -> np.ndarray:
        if np.iscomplexobj(self.vectors):
            return self.vectors @ c
        # avoids upcasting the eigenvector matrix to complex
        return self.vectors @ c.real + 1j * (self.vectors @ c.imag)

    def evolve_coefficients(self, coeffs: np.ndarray, t: float) -> Ket:
        return Ket(self._to_basis(np.exp(-1j * self.energies * t) * coeffs), self.layout)

    def evolve_many(self, psi0: Ket, times) -> list:
        coeffs = self.coefficients(psi0)
        phases = np.exp(-1j * np.outer(self.energies, np.asarray(times, dtype=float))) * coeffs[:, None]
        amps = self._to_basis(phases)
        return [Ket(amps[:, i], self.layout) for i in range(amps.shape[1])]

    def evolve(self, psi0: Ket, t: float) -> Ket:
        return self.evolve_coefficients(self.coefficients(psi0), t)


def lanczos_step(matvec: Callable, v: np.ndarray, dt: float, m: int, tol: float):
    """One Krylov step ``exp(-i H dt) v``; returns ``(w, error_estimate)``."""
    beta0 = np.linalg.norm(v)
    basis = np.zeros((m + 1, v.size), dtype=complex)
    alpha = np.zeros(m)
    beta = np.zeros(m)
    basis[0] = v / beta0
    k = m
    for j in range(m):
        w = matvec(basis[j])
        alpha[j] = np.real(np.vdot(basis[j], w))
        # full re-orthogonalization, twice for stability
        for _ in range(2):
            w = w - basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
        beta[j] = np.linalg.norm(w)
        if beta[j] < tol * max(1.0, abs(alpha[j])):
            k = j + 1
            break
        basis[j + 1] = w / beta[j]
    small = _tridiagonal_expm_e1(alpha[:k], beta[: k - 1], dt)
    err = 0.0
    if k == m:
        # compare against the (m-1)-dimensional approximation
        coarse = _tridiagonal_expm_e1(alpha[: k - 1], beta[: k - 2], dt)
        err = beta0 * float(np.linalg.norm(small[: k - 1] - coarse) + abs(small[-1]))
    return beta0 * (basis[:k].T @ small), err


def _tridiagonal_expm_e1(alpha: np.ndarray, beta: np.ndarray, dt: float) -> np.ndarray:
    if len(alpha) == 1:
        return np.exp(-1j * alpha * dt)
    evals, evecs = eigh_tridiagonal(alpha, beta)
    return evecs @ (np.exp(-1j * evals * dt) * evecs[0].conj())


def krylov_evolve(h: LinOp, psi0: Ket, t: float, settings: PropagatorSettings = DEFAULT_SETTINGS) -> Ket:
    m = h.matrix
    matvec = (lambda x: m @ x) if not h.is_real() else (lambda x, mr=np.real(m): mr @ x)
    v = psi0.amplitudes.astype(complex)
    if t == 0:
        return Ket(v.copy(), psi0.layout)
    direction = np.sign(t)
    remaining = abs(t)
    spread = np.max(np.sum(np.abs(m), axis=1))  # bound on the spectral radius
    dt = min(remaining, max(settings.krylov_dim / 3, 1.0) / max(spread, 1e-300))
    while remaining > 0:
        dt = min(dt, remaining)
        w, err = lanczos_step(matvec, v, direction * dt, settings.krylov_dim, settings.krylov_tol)
        if err > settings.krylov_tol and dt > 1e-300:
            dt *= 0.5
            continue
        v = w
        remaining -= dt
        if err < 0.1 * settings.krylov_tol:
            dt *= 1.5
    return Ket(v, psi0.layout)


def evolve(h: LinOp, psi0: Ket, t: float, settings: PropagatorSettings = DEFAULT_SETTINGS) -> Ket:
    if not h.hermitian:
        raise ValueError("evolve needs a hermitian Hamiltonian")
    if abs(psi0.norm() - 1) > settings.norm_tol:
        raise NormError("initial state is not normalized")
    if settings.method == "eig":
        psi = EigenPropagator(h).evolve(psi0, t)
    else:
        psi = krylov_evolve(h, psi0, t, settings)
    check_state(psi, settings)
    return psi


# --- observable series -----------------------------------------------------

def observable_names(observables: Sequence[str], layout: SpaceLayout) -> list:
    names = []
    for obs in observables:
        if obs == "spin":
            names += ["p_down", "p_up"]
        elif obs in ("fock_b", "fock_r"):
            mode = obs[-1]
            names += [f"p_n{mode}_{k}" for k in range(layout.cutoff(mode) + 1)]
        else:
            raise ValueError(f"unknown observable {obs!r}")
    return names


def extract(psi: Ket, observables: Sequence[str]) -> list:
    values = []
    for obs in observables:
        if obs == "spin":
            values += list(spin_probs(psi))
        else:
            values += list(fock_probs(psi, obs[-1]))
    return values


@dataclass
class SeriesTable:
    columns: list
    rows: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float).reshape(len(self.rows), len(self.columns))


def observable_series(
    h: LinOp,
    psi0: Ket,
    t_grid: Sequence[float],
    observables: Sequence[str] = ("spin",),
    settings: PropagatorSettings = DEFAULT_SETTINGS,
    propagator: EigenPropagator | None = None,
    on_state: Callable | None = None,
) -> SeriesTable:
    """Tabulate observables along a time grid; columns are ``t`` then the observables.

    ``on_state(t, psi)`` is called for every sampled state when given.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) < 0):
        raise ValueError("time grid must be monotone")
    table = SeriesTable(["t"] + observable_names(observables, h.layout))
    if t_grid.size == 0:
        return table
    if settings.method == "eig":
        prop = propagator or EigenPropagator(h)
        states = prop.evolve_many(psi0, t_grid)
    else:
        def _krylov_states():
            psi, t_prev = psi0, 0.0
            for t in t_grid:
                psi = krylov_evolve(h, psi, t - t_prev, settings)
                t_prev = t
                yield psi
        states = _krylov_states()
    for t, psi in zip(t_grid, states):
        check_state(psi, settings)
        if on_state is not None:
            on_state(t, psi)
        table.rows.append([float(t)] + extract(psi, observables))
    return table


# --- truncation scan -------------------------------------------------------

@dataclass
class ScanReport:
    cutoffs: list
    max_change: list  # between successive cutoffs; first entry is nan
    tail_masses: list  # (b, r) per cutoff
    converged_at: tuple | None
    tol: float

    @property
    def converged(self) -> bool:
        return self.converged_at is not None


def truncation_scan(
    builder: Callable[[SpaceLayout], LinOp],
    state: StateSpec | str,
    t: float,
    ladder: Sequence[tuple],
    tol: float = 1e-6,
    settings: PropagatorSettings = DEFAULT_SETTINGS,
) -> ScanReport:
    """Compare probabilities (both Fock marginals and spin) between successive cutoffs."""
    ladder = [tuple(c) for c in ladder]
    for lo, hi in zip(ladder, ladder[1:]):
        if hi[0] < lo[0] or hi[1] < lo[1]:
            raise ValueError("cutoff ladder must be ascending")
    previous = None
    changes, tails = [], []
    converged_at = None
    for cut in ladder:
        layout = SpaceLayout(*cut)
        psi = EigenPropagator(builder(layout)).evolve(prepare_state(layout, state), t)
        probs = (fock_probs(psi, "b"), fock_probs(psi, "r"), np.array(spin_probs(psi)))
        tails.append((tail_mass(psi, "b"), tail_mass(psi, "r")))
        if previous is None:
            changes.append(float("nan"))
        else:
            diff = 0.0
            for old, new in zip(previous, probs):
                padded = np.zeros(len(new))
                padded[: len(old)] = old
                diff = max(diff, float(np.max(np.abs(new - padded))))
            changes.append(diff)
            if diff < tol and converged_at is None:
                converged_at = previous_cut
        previous, previous_cut = probs, cut
    if len(ladder) == 1 and tails[0][0] <= tol and tails[0][1] <= tol:
        converged_at = ladder[0]
    return ScanReport(ladder, changes, tails, converged_at, tol)
