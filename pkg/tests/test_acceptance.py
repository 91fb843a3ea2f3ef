"""End-to-end acceptance criteria; each prints one PASS/FAIL line."""

import math
from pathlib import Path

import numpy as np
import pytest

from trilinear.analytic import (
    beam_splitter_pmf, squeezed_vacuum_amplitudes, squeezed_vacuum_pmf, twin_fock_pmf,
)
from trilinear.cli import main
from trilinear.config import load_experiment, shipped_config
from trilinear.constants import TWO_PI
from trilinear.estimation import analytic_cfi, cfi, qfi_pure
from trilinear.experiments import Table, fit_oscillation
from trilinear.fock import SpaceLayout, fock_probs, prepare_state, spin_probs
from trilinear.hamiltonians import DriveConfig, h_case1
from trilinear.models import (
    beam_splitter_model, exact_model, hamiltonian_for, ramsey_model, squeezing_model, twin_fock_model,
)
from trilinear.propagation import EigenPropagator, PropagatorSettings, check_state
from trilinear.selftest import run_selftest

from conftest import ACCEPTANCE_LINES, two_mode_expm_split

KHZ = TWO_PI * 1e3
ROOT = Path(__file__).resolve().parents[1]


def report(number, title, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'}  criterion {number}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


def shipped_run(name, times):
    cfg = load_experiment(shipped_config(name))
    drive = cfg.drive
    h = hamiltonian_for(drive)(cfg.layout, drive)
    states = EigenPropagator(h).evolve_many(prepare_state(cfg.layout, cfg.initial_state), times)
    for psi in states:
        check_state(psi, cfg.settings)
    return cfg, states


def test_criterion_1_squeezing_figure():
    drive = DriveConfig(1, 3.5 * KHZ, 15 * KHZ, 0.05 * KHZ)
    t = 10e-3
    r = 2 * drive.g * drive.lambda_ * t / drive.omega
    target = squeezed_vacuum_pmf(r, 6)[[0, 2, 4, 6]]
    details, ok = [], abs(r - 1.466) < 1e-3
    # 20/40 as stated; the last two rocking levels hold ~2e-3 at 10 ms, so the tail guard is off here
    for cut, settings in (((20, 40), PropagatorSettings(check_tail=False)), ((10, 100), PropagatorSettings())):
        lay = SpaceLayout(*cut)
        psi = EigenPropagator(h_case1(lay, drive)).evolve(prepare_state(lay, "+ fock(0,0)"), t)
        check_state(psi, settings)
        p = fock_probs(psi, "r")
        dev = float(np.max(np.abs(p[[0, 2, 4, 6]] - target)))
        odd = float(np.max(p[1::2]))
        ok = ok and dev < 0.05 and odd < 0.02
        details.append(f"{cut[0]}/{cut[1]}: max|dp|={dev:.2e}, max odd={odd:.1e}")
    report(1, "Fig. 1 squeezed-vacuum populations", ok, f"r={r:.4f}; " + "; ".join(details))


def test_criterion_2_beam_splitter_figure():
    times = np.linspace(0, 20e-3, 201)
    cfg, states = shipped_run("fig2", times)
    theta = TWO_PI * 0.023333e3
    dev = max(float(np.max(np.abs(fock_probs(psi, "b")[:3] - beam_splitter_pmf(2, theta * t))))
              for t, psi in zip(times, states))
    report(2, "Fig. 2 beam-splitter populations", dev < 0.05, f"max|dp|={dev:.2e} over 0..20 ms")


def test_criterion_3_twin_fock_figure():
    cfg, (psi,) = shipped_run("fig3", [8e-3])
    theta = 2 * cfg.drive.g * cfg.drive.lambda_ / cfg.drive.omega
    exact = fock_probs(psi, "b")[:11]
    model = twin_fock_pmf(5, theta * 8e-3)
    dev = float(np.max(np.abs(exact - model)))
    s_exact, s_model = np.sign(np.diff(exact)), np.sign(np.diff(model))
    flips = int(np.sum(s_model[1:] != s_model[:-1]))
    same = bool(np.array_equal(s_exact, s_model))
    ok = dev < 0.05 and same and flips >= 5
    report(3, "Fig. 3 twin-Fock interference", ok,
           f"max|dp|={dev:.2e}, difference-sign patterns equal={same}, sign flips={flips}")


@pytest.mark.parametrize("name,n", [("fig4a", 1), ("fig4b", 2)])
def test_criterion_4_ramsey_frequency(name, n):
    cfg = load_experiment(shipped_config(name))
    times = cfg.times()
    _, states = shipped_run(name, times)
    p_down = np.array([spin_probs(psi)[0] for psi in states])
    fitted = fit_oscillation(times, p_down)
    expected = 2 * n * TWO_PI * 0.04e3
    err = abs(fitted / expected - 1)
    report(4, f"Fig. 4 binomial({n}) oscillation", err < 0.05,
           f"fitted/{2 * n}theta = {fitted / expected:.4f}")


def test_criterion_5_saturation():
    g, omega, t, lam = 3.5 * KHZ, 15 * KHZ, 10e-3, 0.05 * KHZ
    closed = 8 * g**2 * t**2 / omega**2
    c = cfi(squeezing_model(g, omega, t, lam), lam)
    rate = 2 * g * t / omega
    q = qfi_pure(lambda x: squeezed_vacuum_amplitudes(rate * x, 200), lam)
    analytic_ok = abs(c / closed - 1) < 1e-6 and abs(q / closed - 1) < 1e-6

    t5 = 5e-3
    drive = DriveConfig(1, g, omega, lam, t5)
    exact = cfi(exact_model(drive, SpaceLayout(10, 60), "+ fock(0,0)", t5, "fock_r"), lam)
    closed5 = 8 * g**2 * t5**2 / omega**2
    ok = analytic_ok and abs(exact / closed5 - 1) < 0.1
    report(5, "CFI saturates QFI", ok,
           f"analytic cfi/closed-1={c / closed - 1:.1e}, qfi/closed-1={q / closed - 1:.1e}; "
           f"exact 5 ms cfi/closed={exact / closed5:.4f}")


def test_criterion_6_scaling():
    g, omega, t = 3.5 * KHZ, 45 * KHZ, 20e-3
    lam = 0.15 * KHZ
    fock = [cfi(beam_splitter_model(n, g, omega, t), lam) / n for n in (1, 2, 4)]
    fock_spread = (max(fock) - min(fock)) / np.mean(fock)
    twin = [cfi(twin_fock_model(n, g, omega, t), lam) / (n * (n + 1)) for n in (1, 2, 3)]
    twin_spread = (max(twin) - min(twin)) / np.mean(twin)
    ramsey = [cfi(ramsey_model(n, g, omega, t), lam) / analytic_cfi("ramsey_n", n, g, omega, t) - 1
              for n in (1, 2, 3)]
    ramsey_err = max(abs(x) for x in ramsey)
    ok = fock_spread < 1e-9 and twin_spread < 0.02 and ramsey_err < 1e-9
    report(6, "Fisher scaling laws", ok,
           f"fock_nb spread={fock_spread:.1e}, twin_fock spread={twin_spread:.1e}, ramsey err={ramsey_err:.1e}")


@pytest.mark.slow
def test_criterion_7_numerical_hygiene():
    checks = run_selftest()
    failed = [c.name for c in checks if not c.passed]
    report(7, "selftest numerical hygiene", not failed,
           f"{len(checks) - len(failed)}/{len(checks)} checks" + (f"; failed: {failed}" if failed else ""))


def test_criterion_8_oracle_equivalence(tmp_path):
    worst = 0.0
    for n in range(0, 6):
        for x in (0.0, 0.17, 0.5, math.pi / 4, 1.2, 2.9):
            worst = max(worst, float(np.max(np.abs(beam_splitter_pmf(n, x) - two_mode_expm_split(n, 0, x)))))
            worst = max(worst, float(np.max(np.abs(twin_fock_pmf(n, x) - two_mode_expm_split(n, n, x)))))
    assert main(["discrepancy", "--out", str(tmp_path)]) == 0
    fresh = (tmp_path / "twin_fock_discrepancy.csv").read_text()
    committed = ROOT / "docs" / "twin_fock_discrepancy.csv"
    same = committed.exists() and committed.read_text() == fresh
    report(8, "closed forms vs matrix exponential", worst < 1e-10 and same,
           f"max|dp|={worst:.1e} for n<=5; committed discrepancy table current={same}")
