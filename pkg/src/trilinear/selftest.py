"""Numerical hygiene checks run by ``trilinear selftest``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import FIGURES, load_experiment, shipped_config
from .fock import prepare_state
from .models import hamiltonian_for
from .propagation import EigenPropagator, PropagatorSettings, evolve, krylov_evolve, truncation_scan

NORM_TOL = 1e-9
ENERGY_TOL = 1e-8
KRYLOV_TOL = 1e-7
SCAN_TOL = 1e-6
# extra Fock levels added on top of the shipped cutoffs for the convergence check
SCAN_MARGIN = (4, 10)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _setup(name: str):
    cfg = load_experiment(shipped_config(name))
    drive = cfg.drive
    h = hamiltonian_for(drive)(cfg.layout, drive)
    return cfg, h, prepare_state(cfg.layout, cfg.initial_state)


def check_unitarity(names=FIGURES) -> list:
    checks = []
    for name in names:
        cfg, h, psi0 = _setup(name)
        e0 = psi0.expect(h)
        norm_drift, energy_drift = 0.0, 0.0
        for psi in EigenPropagator(h).evolve_many(psi0, cfg.times()):
            norm_drift = max(norm_drift, abs(psi.norm() - 1))
            energy_drift = max(energy_drift, abs(psi.expect(h) - e0) / max(abs(e0), 1.0))
        checks.append(Check(f"norm drift [{name}]", norm_drift < NORM_TOL, f"{norm_drift:.2e} < {NORM_TOL:.0e}"))
        checks.append(Check(f"<H> drift [{name}]", energy_drift < ENERGY_TOL,
                            f"{energy_drift:.2e} < {ENERGY_TOL:.0e} (relative)"))
    return checks


def check_composition(name: str = "fig2") -> Check:
    cfg, h, psi0 = _setup(name)
    t1, t2 = 0.37 * cfg.drive.duration, 0.41 * cfg.drive.duration
    settings = PropagatorSettings()
    direct = evolve(h, psi0, t1 + t2, settings)
    stepped = evolve(h, evolve(h, psi0, t1, settings), t2, settings)
    err = float(np.max(np.abs(direct.amplitudes - stepped.amplitudes)))
    return Check(f"composition [{name}]", err < 1e-8, f"{err:.2e} < 1e-08")


def check_krylov(name: str = "fig2") -> Check:
    cfg, h, psi0 = _setup(name)
    t = cfg.drive.duration
    exact = EigenPropagator(h).evolve(psi0, t)
    approx = krylov_evolve(h, psi0, t, PropagatorSettings(method="krylov"))
    err = float(np.max(np.abs(exact.amplitudes - approx.amplitudes)))
    return Check(f"eig vs krylov [{name}, t={t * 1e3:g} ms]", err < KRYLOV_TOL, f"{err:.2e} < {KRYLOV_TOL:.0e}")


def check_truncation(names=FIGURES) -> list:
    checks = []
    for name in names:
        cfg = load_experiment(shipped_config(name))
        drive = cfg.drive
        builder = hamiltonian_for(drive)
        ladder = [(cfg.cutoff_b, cfg.cutoff_r), (cfg.cutoff_b + SCAN_MARGIN[0], cfg.cutoff_r + SCAN_MARGIN[1])]
        report = truncation_scan(lambda layout: builder(layout, drive), cfg.initial_state, drive.duration, ladder,
                                 tol=SCAN_TOL)
        change = report.max_change[-1]
        checks.append(Check(f"truncation scan [{name}, {ladder[0]} -> {ladder[1]}]", report.converged,
                            f"{change:.2e} < {SCAN_TOL:.0e}"))
    return checks


def run_selftest(quick: bool = False) -> list:
    names = ("fig2", "fig4a") if quick else FIGURES
    checks = check_unitarity(names)
    checks.append(check_composition())
    checks.append(check_krylov("fig4a" if quick else "fig2"))
    checks += check_truncation(names)
    return checks
