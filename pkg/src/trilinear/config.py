"""Flat ``dotted.key = value`` configuration files.

Grammar: one assignment per line, ``#`` starts a comment, blank lines are
ignored, keys are case-sensitive, lists are comma separated.  Frequencies are
entered as frequency/2pi in kHz and times in ms; they are converted to rad/s and
seconds by the accessors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .constants import AMU, ELEMENTARY_CHARGE, khz_to_angular
from .fock import SpaceLayout, StateSpec, parse_state
from .hamiltonians import DriveConfig
from .propagation import PropagatorSettings
from .trap_modes import TrapConfig


class ConfigError(ValueError):
    pass


OUTPUT_KINDS = ("fock_b", "fock_r", "spin", "cfi", "qfi")
MEASUREMENTS = ("auto", "fock_b", "fock_r", "spin")


def parse_pairs(text: str) -> dict:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def _int_list(value: str) -> tuple:
    return tuple(int(v) for v in value.split(",") if v.strip())


def _str_list(value: str) -> tuple:
    return tuple(v.strip() for v in value.split(",") if v.strip())


# key -> (attribute, parser, formatter)
_EXPERIMENT_KEYS = {
    "name": ("name", str, str),
    "scheme": ("scheme", str, str),
    "drive.g_over_2pi": ("g_over_2pi", float, repr),
    "drive.omega_over_2pi": ("omega_over_2pi", float, repr),
    "drive.lambda_over_2pi": ("lambda_over_2pi", float, repr),
    "time.t_final": ("t_final", float, repr),
    "time.n_samples": ("n_time_samples", int, str),
    "state.initial": ("initial_state", parse_state, str),
    "cutoff.b": ("cutoff_b", int, str),
    "cutoff.r": ("cutoff_r", int, str),
    "outputs": ("outputs", _str_list, ", ".join),
    "output.levels_b": ("levels_b", _int_list, lambda v: ", ".join(map(str, v))),
    "output.levels_r": ("levels_r", _int_list, lambda v: ", ".join(map(str, v))),
    "propagation.method": ("method", str, str),
    "propagation.tail_mass_tol": ("tail_mass_tol", float, repr),
    "estimation.measurement": ("measurement", str, str),
    "estimation.repetitions": ("repetitions", int, str),
}
_REQUIRED = ("scheme", "drive.g_over_2pi", "drive.omega_over_2pi", "drive.lambda_over_2pi", "time.t_final",
             "state.initial")


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str
    g_over_2pi: float
    omega_over_2pi: float
    lambda_over_2pi: float
    t_final: float  # ms
    initial_state: StateSpec
    name: str = "experiment"
    n_time_samples: int = 101
    cutoff_b: int = 20
    cutoff_r: int = 40
    outputs: tuple = ("fock_b", "fock_r", "spin")
    levels_b: tuple = ()
    levels_r: tuple = ()
    method: str = "eig"
    tail_mass_tol: float = 1e-6
    measurement: str = "auto"
    repetitions: int = 1

    def __post_init__(self):
        if self.scheme not in ("case1", "case2"):
            raise ConfigError(f"scheme must be case1 or case2, got {self.scheme!r}")
        for name in ("g_over_2pi", "omega_over_2pi", "lambda_over_2pi", "t_final"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if self.omega_over_2pi == 0:
            raise ConfigError("detuning omega must be non-zero")
        if self.t_final < 0:
            raise ConfigError("time.t_final must be non-negative")
        if self.n_time_samples < 1:
            raise ConfigError("time.n_samples must be at least 1")
        if self.cutoff_b < 0 or self.cutoff_r < 0:
            raise ConfigError("cutoffs must be non-negative")
        bad = [o for o in self.outputs if o not in OUTPUT_KINDS]
        if bad or not self.outputs:
            raise ConfigError(f"outputs must be a non-empty subset of {OUTPUT_KINDS}, got {self.outputs}")
        for levels, cut, key in ((self.levels_b, self.cutoff_b, "b"), (self.levels_r, self.cutoff_r, "r")):
            if any(not 0 <= k <= cut for k in levels):
                raise ConfigError(f"output.levels_{key} must lie within 0..{cut}")
        if self.method not in ("eig", "krylov"):
            raise ConfigError(f"propagation.method must be eig or krylov, got {self.method!r}")
        if not 0 < self.tail_mass_tol < 1:
            raise ConfigError("propagation.tail_mass_tol must lie in (0, 1)")
        if self.measurement not in MEASUREMENTS:
            raise ConfigError(f"estimation.measurement must be one of {MEASUREMENTS}")
        if self.repetitions < 1:
            raise ConfigError("estimation.repetitions must be a positive integer")
        for nb, nr in self.initial_state.motional_amplitudes():
            if nb > self.cutoff_b or nr > self.cutoff_r:
                raise ConfigError(f"initial state {self.initial_state} exceeds the cutoffs")

    # --- derived quantities in SI units

    @property
    def case(self) -> int:
        return 1 if self.scheme == "case1" else 2

    @property
    def drive(self) -> DriveConfig:
        return DriveConfig(self.case, khz_to_angular(self.g_over_2pi), khz_to_angular(self.omega_over_2pi),
                           khz_to_angular(self.lambda_over_2pi), self.t_final * 1e-3)

    @property
    def layout(self) -> SpaceLayout:
        return SpaceLayout(self.cutoff_b, self.cutoff_r)

    @property
    def settings(self) -> PropagatorSettings:
        return PropagatorSettings(method=self.method, tail_mass_tol=self.tail_mass_tol)

    def times(self) -> np.ndarray:
        """Sample times in seconds."""
        if self.n_time_samples == 1:
            return np.array([self.t_final * 1e-3])
        return np.linspace(0.0, self.t_final * 1e-3, self.n_time_samples)

    def levels(self, mode: str) -> tuple:
        chosen = self.levels_b if mode == "b" else self.levels_r
        return chosen or tuple(range((self.cutoff_b if mode == "b" else self.cutoff_r) + 1))

    # --- (de)serialization

    def to_text(self) -> str:
        defaults = {f.name: f.default for f in fields(self)}
        lines = []
        for key, (attr, _, fmt) in _EXPERIMENT_KEYS.items():
            value = getattr(self, attr)
            if key not in _REQUIRED and attr in defaults and value == defaults[attr] and key != "name":
                continue
            lines.append(f"{key} = {fmt(value)}")
        return "\n".join(lines) + "\n"

    def with_value(self, key: str, value) -> "ExperimentConfig":
        """Copy with one dotted key replaced; ``state.n`` rescales the initial state."""
        if key == "state.n":
            try:
                return replace(self, initial_state=self.initial_state.with_n(int(value)))
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        if key not in _EXPERIMENT_KEYS:
            raise ConfigError(f"unknown key {key!r}")
        attr, parser, _ = _EXPERIMENT_KEYS[key]
        try:
            parsed = parser(value) if isinstance(value, str) else type(getattr(self, attr))(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
        return replace(self, **{attr: parsed})


def experiment_from_text(text: str) -> ExperimentConfig:
    pairs = parse_pairs(text)
    unknown = sorted(set(pairs) - set(_EXPERIMENT_KEYS))
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")
    missing = [k for k in _REQUIRED if k not in pairs]
    if missing:
        raise ConfigError(f"missing keys: {', '.join(missing)}")
    kwargs = {}
    for key, value in pairs.items():
        attr, parser, _ = _EXPERIMENT_KEYS[key]
        try:
            kwargs[attr] = parser(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from exc
    return ExperimentConfig(**kwargs)


def load_experiment(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return experiment_from_text(text)


# --- trap configuration

_TRAP_KEYS = {
    "trap.mass_amu": float,
    "trap.charge_e": float,
    "trap.omega_x_over_2pi": float,
    "trap.omega_y_over_2pi": float,
    "trap.omega_z_over_2pi": float,
    "trap.n_ions": int,
    "resonance.omega_over_2pi": float,
    "resonance.threshold": float,
}


@dataclass(frozen=True)
class TrapSettings:
    trap: TrapConfig
    detuning: float  # rad/s
    threshold: float = 20.0


def trap_from_text(text: str) -> TrapSettings:
    pairs = parse_pairs(text)
    unknown = sorted(set(pairs) - set(_TRAP_KEYS))
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")
    try:
        values = {k: _TRAP_KEYS[k](v) for k, v in pairs.items()}
        trap = TrapConfig(
            ion_mass=values.get("trap.mass_amu", 40.0) * AMU,
            ion_charge=values.get("trap.charge_e", 1.0) * ELEMENTARY_CHARGE,
            omega_x=khz_to_angular(values.get("trap.omega_x_over_2pi", 4000.0)),
            omega_y=khz_to_angular(values.get("trap.omega_y_over_2pi", 4500.0)),
            omega_z=khz_to_angular(values.get("trap.omega_z_over_2pi", 1000.0)),
            n_ions=values.get("trap.n_ions", 2),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return TrapSettings(trap, khz_to_angular(values.get("resonance.omega_over_2pi", 15.0)),
                        values.get("resonance.threshold", 20.0))


def load_trap(path) -> TrapSettings:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return trap_from_text(text)


CONFIG_DIR = Path(__file__).parent / "configs"
FIGURES = ("fig1", "fig2", "fig3", "fig4a", "fig4b")


def shipped_config(name: str) -> Path:
    path = CONFIG_DIR / f"{name}.cfg"
    if not path.exists():
        raise ConfigError(f"no shipped config named {name!r}")
    return path
