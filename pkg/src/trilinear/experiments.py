"""Config-driven experiments: time series, analytic overlays, Fisher information, sweeps."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import curve_fit

from . import analytic
from .config import ExperimentConfig, TrapSettings
from .constants import angular_to_khz
from .estimation import analytic_cfi, cramer_rao
from .fock import Ket, fock_probs, prepare_state, spin_probs
from .models import hamiltonian_for, measure
from .propagation import EigenPropagator, check_state, krylov_evolve
from .trap_modes import mode_spectrum, resonance_check, trilinear_coupling


def fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.12g}"


@dataclass
class Table:
    header: list
    rows: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        i = self.header.index(name)
        return np.array([float(r[i]) for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([fmt(v) for v in row])
        return buf.getvalue()


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    tables: dict
    summary: dict

    def write(self, out_dir) -> list:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for name, table in self.tables.items():
            path = out / f"{name}.csv"
            path.write_text(table.to_csv())
            written.append(path)
        path = out / "summary.txt"
        path.write_text(format_summary(self.summary))
        written.append(path)
        return written


def format_summary(summary: dict) -> str:
    return "".join(f"{k} = {fmt(v)}\n" for k, v in summary.items())


# --- analytic overlay selection

def overlay_kind(cfg: ExperimentConfig) -> str | None:
    s = cfg.initial_state
    if cfg.case == 1:
        if s.kind == "fock" and s.n_r == 0:
            return "squeezing"
        return None
    if s.kind == "fock" and s.n_r == 0:
        return "fock_nb"
    if s.kind == "twin" or (s.kind == "fock" and s.n_b == s.n_r):
        return "twin_fock"
    if s.kind == "binomial" and s.spin in ("up", "down"):
        return "ramsey_n"
    return None


def phonon_number(cfg: ExperimentConfig) -> int:
    s = cfg.initial_state
    return s.n_b if s.kind == "fock" else s.n


def default_measurement(cfg: ExperimentConfig) -> str:
    if cfg.measurement != "auto":
        return cfg.measurement
    kind = overlay_kind(cfg)
    if cfg.case == 1:
        return "fock_r"
    return "spin" if kind == "ramsey_n" else "fock_b"


def analytic_columns(cfg: ExperimentConfig, t: float) -> dict:
    """Effective-theory predictions at time ``t`` (s), keyed by the exact column name."""
    drive = cfg.drive
    kind = overlay_kind(cfg)
    n = phonon_number(cfg)
    out = {}
    if kind == "squeezing":
        r = analytic.squeeze_parameter(drive.g, drive.omega, drive.lambda_, t)
        p = analytic.squeezed_vacuum_pmf(abs(r), cfg.cutoff_r)
        out.update({f"p_nr_{k}": p[k] for k in cfg.levels("r")})
    elif kind in ("fock_nb", "twin_fock"):
        x = analytic.beam_splitter_rate(drive.g, drive.omega, drive.lambda_) * t
        p = analytic.beam_splitter_pmf(n, x) if kind == "fock_nb" else analytic.twin_fock_pmf(n, x)
        total = n if kind == "fock_nb" else 2 * n
        out.update({f"p_nb_{k}": (p[k] if k < len(p) else 0.0) for k in cfg.levels("b")})
        out.update({f"p_nr_{k}": (p[total - k] if 0 <= total - k < len(p) else 0.0) for k in cfg.levels("r")})
    elif kind == "ramsey_n":
        theta = analytic.beam_splitter_rate(drive.g, drive.omega, drive.lambda_)
        down, up = analytic.ramsey_populations(n, theta, t)
        if cfg.initial_state.spin == "up":
            down, up = up, down
        out.update({"p_down": down, "p_up": up})
    return out


def analytic_fisher(cfg: ExperimentConfig, t: float) -> float:
    kind = overlay_kind(cfg)
    if kind is None:
        return float("nan")
    drive = cfg.drive
    return analytic_cfi(kind, phonon_number(cfg), drive.g, drive.omega, t)


# --- propagation helpers

def _trajectory(cfg: ExperimentConfig, lam: float, times: np.ndarray) -> list:
    """States at every sample time for coupling ``lam``."""
    drive = cfg.drive.with_lambda(lam)
    h = hamiltonian_for(drive)(cfg.layout, drive)
    psi0 = prepare_state(cfg.layout, cfg.initial_state)
    settings = cfg.settings
    if settings.method == "eig":
        states = EigenPropagator(h).evolve_many(psi0, times)
    else:
        states, psi, t_prev = [], psi0, 0.0
        for t in times:
            psi = krylov_evolve(h, psi, t - t_prev, settings)
            t_prev = t
            states.append(psi)
    for psi in states:
        check_state(psi, settings)
    return states


def _fd_step(cfg: ExperimentConfig, rel_step: float = 1e-4) -> float:
    drive = cfg.drive
    return rel_step * (abs(drive.lambda_) or drive.g**2 / abs(drive.omega))


def fisher_series(cfg: ExperimentConfig, times: np.ndarray, want_qfi: bool, center_states: list | None = None):
    """CFI (for the configured measurement) and optionally QFI at every time.

    Central differences in lambda with one Richardson refinement; each probe is a
    separate diagonalization reused across the whole time grid.
    """
    lam = cfg.drive.lambda_
    h = _fd_step(cfg)
    measurement = default_measurement(cfg)
    center = center_states or _trajectory(cfg, lam, times)
    probes = {d: _trajectory(cfg, lam + d, times) for d in (h, -h, h / 2, -h / 2)}
    cfis, qfis = [], []
    for i, psi in enumerate(center):
        p = measure(psi, measurement)
        d1 = (measure(probes[h][i], measurement) - measure(probes[-h][i], measurement)) / (2 * h)
        d2 = (measure(probes[h / 2][i], measurement) - measure(probes[-h / 2][i], measurement)) / h
        dp = (4 * d2 - d1) / 3
        keep = p > 1e-12
        cfis.append(float(np.sum(dp[keep] ** 2 / p[keep])))
        if want_qfi:
            anchor = int(np.argmax(np.abs(psi.amplitudes)))

            def aligned(state: Ket) -> np.ndarray:
                a = state.amplitudes[anchor]
                return state.amplitudes * (np.conj(a) / abs(a))

            v = aligned(psi)
            g1 = (aligned(probes[h][i]) - aligned(probes[-h][i])) / (2 * h)
            g2 = (aligned(probes[h / 2][i]) - aligned(probes[-h / 2][i])) / h
            dv = (4 * g2 - g1) / 3
            qfis.append(max(4 * (np.vdot(dv, dv).real - abs(np.vdot(v, dv)) ** 2), 0.0))
    return cfis, qfis


def _delta(fisher: float, nu: int) -> float:
    return cramer_rao(fisher, nu) if fisher > 0 else float("inf")


# --- experiment

def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    times = cfg.times()
    drive = cfg.drive
    states = _trajectory(cfg, drive.lambda_, times)
    overlay = [analytic_columns(cfg, t) for t in times]
    t_ms = times * 1e3
    tables = {}
    deviations = {}

    def series(mode_key, names, values_fn):
        table = Table(["t_ms"] + names)
        extra = [n for n in names if n in overlay[0]] if overlay and overlay[0] else []
        table.header += [f"analytic_{n}" for n in extra]
        dev = 0.0
        for t, psi, ov in zip(t_ms, states, overlay):
            vals = values_fn(psi)
            row = [t] + vals + [ov[n] for n in extra]
            for n, v in zip(names, vals):
                if n in extra:
                    dev = max(dev, abs(v - ov[n]))
            table.rows.append(row)
        tables[mode_key] = table
        if extra:
            deviations[mode_key] = dev

    for mode in ("b", "r"):
        key = f"fock_{mode}"
        if key in cfg.outputs:
            levels = cfg.levels(mode)
            series(key, [f"p_n{mode}_{k}" for k in levels],
                   lambda psi, m=mode, lv=levels: [fock_probs(psi, m)[k] for k in lv])
    if "spin" in cfg.outputs:
        series("spin", ["p_down", "p_up"], lambda psi: list(spin_probs(psi)))

    summary = {
        "name": cfg.name,
        "scheme": cfg.scheme,
        "initial_state": str(cfg.initial_state),
        "cutoffs": f"{cfg.cutoff_b}/{cfg.cutoff_r}",
        "g_over_omega": drive.ratios["g/omega"],
        "lambda_over_omega": drive.ratios["lambda/omega"],
        "weak_coupling": "yes" if drive.weak_coupling else "no",
    }
    if cfg.case == 1:
        summary["squeeze_r_final"] = analytic.squeeze_parameter(drive.g, drive.omega, drive.lambda_, times[-1])
    else:
        theta = analytic.beam_splitter_rate(drive.g, drive.omega, drive.lambda_)
        summary["theta_over_2pi_khz"] = angular_to_khz(theta)
    summary["analytic_model"] = overlay_kind(cfg) or "none"
    for key, dev in deviations.items():
        summary[f"max_deviation_{key}"] = dev
    if deviations:
        summary["max_deviation"] = max(deviations.values())
    summary["max_norm_drift"] = max(abs(psi.norm() - 1) for psi in states)

    if "cfi" in cfg.outputs or "qfi" in cfg.outputs:
        cfis, qfis = fisher_series(cfg, times, "qfi" in cfg.outputs, states)
        nu = cfg.repetitions
        if "cfi" in cfg.outputs:
            table = Table(["t_ms", "cfi", "analytic_cfi", "delta_lambda", "measurement"])
            for t, c in zip(times, cfis):
                table.rows.append([t * 1e3, c, analytic_fisher(cfg, t), _delta(c, nu), default_measurement(cfg)])
            tables["cfi"] = table
            summary["cfi_final"] = cfis[-1]
            summary["analytic_cfi_final"] = analytic_fisher(cfg, times[-1])
            summary["delta_lambda_final"] = _delta(cfis[-1], nu)
        if "qfi" in cfg.outputs:
            table = Table(["t_ms", "qfi", "delta_lambda_quantum"])
            for t, q in zip(times, qfis):
                table.rows.append([t * 1e3, q, _delta(q, nu)])
            tables["qfi"] = table
            summary["qfi_final"] = qfis[-1]
    return ExperimentResult(cfg, tables, summary)


# --- frequency fitting

def fit_oscillation(t: np.ndarray, y: np.ndarray) -> float:
    """Angular frequency of ``a + b cos(W t + phi)`` fitted to samples (rad/s).

    Seeded by the peak of a zero-padded FFT, refined by least squares.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    dt = t[1] - t[0]
    yc = y - y.mean()
    n_fft = 64 * len(y)
    spectrum = np.abs(np.fft.rfft(yc * np.hanning(len(y)), n_fft))
    freqs = np.fft.rfftfreq(n_fft, dt) * 2 * math.pi
    guess = freqs[1 + np.argmax(spectrum[1:])]
    phase0 = math.atan2(-np.dot(yc, np.sin(guess * t)), np.dot(yc, np.cos(guess * t)))

    def model(tt, a, b, w, phi):
        return a + b * np.cos(w * tt + phi)

    popt, _ = curve_fit(model, t, y, p0=[y.mean(), (y.max() - y.min()) / 2, guess, phase0], maxfev=20000)
    return abs(float(popt[2]))


# --- sweeps

SWEEP_OUTPUTS = ("cfi", "qfi", "analytic_cfi", "delta_lambda", "fit_omega", "p_down_final", "max_deviation")


def _sweep_point(args):
    cfg, outputs = args
    values = {}
    times = cfg.times()
    needs_series = "fit_omega" in outputs or "max_deviation" in outputs or "p_down_final" in outputs
    center = None
    if needs_series:
        center = _trajectory(cfg, cfg.drive.lambda_, times)
        p_down = np.array([spin_probs(psi)[0] for psi in center])
        if "fit_omega" in outputs:
            values["fit_omega"] = fit_oscillation(times, p_down)
        if "p_down_final" in outputs:
            values["p_down_final"] = p_down[-1]
        if "max_deviation" in outputs:
            dev = 0.0
            for t, psi in zip(times, center):
                for name, v in analytic_columns(cfg, t).items():
                    if name.startswith("p_nb_"):
                        exact = fock_probs(psi, "b")[int(name[5:])]
                    elif name.startswith("p_nr_"):
                        exact = fock_probs(psi, "r")[int(name[5:])]
                    else:
                        exact = spin_probs(psi)[0 if name == "p_down" else 1]
                    dev = max(dev, abs(exact - v))
            values["max_deviation"] = dev
    if {"cfi", "qfi", "delta_lambda"} & set(outputs):
        t_final = times[-1:]
        cfis, qfis = fisher_series(cfg, t_final, "qfi" in outputs, [center[-1]] if center else None)
        values["cfi"] = cfis[0]
        if qfis:
            values["qfi"] = qfis[0]
        values["delta_lambda"] = _delta(cfis[0], cfg.repetitions)
    if "analytic_cfi" in outputs:
        values["analytic_cfi"] = analytic_fisher(cfg, times[-1])
    return [values.get(o, float("nan")) for o in outputs]


def _guarded_point(args):
    try:
        return _sweep_point(args), ""
    except Exception as exc:  # recorded per point; the sweep carries on
        return None, f"{type(exc).__name__}: {exc}"


def sweep(cfg: ExperimentConfig, axis: str, values, outputs=("cfi", "delta_lambda"), jobs: int = 1) -> Table:
    """One row per value, in input order; failing points get an ``error`` entry."""
    bad = [o for o in outputs if o not in SWEEP_OUTPUTS]
    if bad:
        raise ValueError(f"unknown sweep outputs {bad}; choose from {SWEEP_OUTPUTS}")
    configs = [cfg.with_value(axis, v) for v in values]  # config errors abort before any work
    table = Table([axis] + list(outputs) + ["error"])
    tasks = [(c, tuple(outputs)) for c in configs]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_guarded_point, tasks))
    else:
        results = [_guarded_point(t) for t in tasks]
    for value, (vals, err) in zip(values, results):
        if vals is None:
            vals = [float("nan")] * len(outputs)
        table.rows.append([value] + vals + [err])
    return table


# --- trap modes report

def modes_report(settings: TrapSettings) -> tuple:
    """Human-readable report and a CSV table of the normal modes."""
    trap = settings.trap
    coupling = trilinear_coupling(trap)
    lines = [
        f"length scale l        = {coupling.length_scale * 1e6:.6g} um",
        f"breathing z_b         = {coupling.ground_state_size * 1e9:.6g} nm",
        f"lambda/2pi            = {angular_to_khz(coupling.lambda_):.6g} kHz",
        f"omega_b/2pi           = {angular_to_khz(coupling.omega_b):.6g} kHz",
        f"omega_rock_x/2pi      = {angular_to_khz(coupling.omega_rock_x):.6g} kHz",
        f"omega_rock_y/2pi      = {angular_to_khz(coupling.omega_rock_y):.6g} kHz",
        "",
        "axis  mode  gamma         freq/2pi [kHz]  eigenvector",
    ]
    table = Table(["axis", "mode", "gamma", "freq_over_2pi_khz"] + [f"b_{k}" for k in range(trap.n_ions)])
    for axis in ("x", "y", "z"):
        spec = mode_spectrum(trap, axis)
        for p in range(trap.n_ions):
            vec = spec.eigenvectors[:, p]
            freq = angular_to_khz(spec.mode_frequencies[p])
            lines.append(f"{axis:>4}  {p:>4}  {spec.eigenvalues[p]:<12.8g}  {freq:<14.8g}  "
                         + " ".join(f"{v:+.6f}" for v in vec))
            table.rows.append([axis, p, spec.eigenvalues[p], freq] + list(vec))
    lines.append("")
    for case in (1, 2):
        rep = resonance_check(trap, case, settings.detuning, settings.threshold)
        lines.append(f"case {case}: detuning/2pi = {angular_to_khz(rep.detuning):.6g} kHz -> "
                     f"omega_rock/2pi = {angular_to_khz(rep.omega_rock):.6g} kHz, "
                     f"required omega_x/2pi = {angular_to_khz(rep.required_omega_x):.6g} kHz; "
                     f"omega_b >> lambda: {'ok' if rep.breathing_ratio_ok else 'VIOLATED'}, "
                     f"|omega_y,rock - omega_b| >> lambda: {'ok' if rep.y_mode_ok else 'VIOLATED'}")
        lines += [f"  warning: {w}" for w in rep.warnings]
    return "\n".join(lines) + "\n", table
