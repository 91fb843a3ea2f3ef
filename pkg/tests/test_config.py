import math

import pytest

from trilinear.config import (
    FIGURES, ConfigError, experiment_from_text, load_experiment, load_trap, parse_pairs, shipped_config,
    trap_from_text, CONFIG_DIR,
)
from trilinear.fock import StateSpec

MINIMAL = """\
scheme = case2
drive.g_over_2pi = 3.5     # kHz
drive.omega_over_2pi = 45
drive.lambda_over_2pi = 0.15
time.t_final = 2
state.initial = + fock(2,0)
cutoff.b = 6
cutoff.r = 8
"""


def test_parse_pairs_grammar():
    pairs = parse_pairs("# header\n\n a = 1 \nb.c=x, y # tail\n")
    assert pairs == {"a": "1", "b.c": "x, y"}


@pytest.mark.parametrize("text", ["a = 1\na = 2\n", "just words\n", " = 3\n"])
def test_parse_pairs_rejects(text):
    with pytest.raises(ConfigError):
        parse_pairs(text)


def test_minimal_config():
    cfg = experiment_from_text(MINIMAL)
    assert cfg.case == 2
    assert cfg.initial_state == StateSpec("+", "fock", 2, 0)
    assert math.isclose(cfg.drive.g, 2 * math.pi * 3.5e3)
    assert math.isclose(cfg.drive.duration, 2e-3)
    assert cfg.times()[-1] == pytest.approx(2e-3)
    assert cfg.levels("b") == tuple(range(7))


def test_round_trip():
    for name in FIGURES:
        cfg = load_experiment(shipped_config(name))
        assert experiment_from_text(cfg.to_text()) == cfg


@pytest.mark.parametrize("edit", [
    lambda s: s.replace("case2", "case3"),
    lambda s: s.replace("drive.omega_over_2pi = 45", "drive.omega_over_2pi = 0"),
    lambda s: s.replace("cutoff.b = 6", "cutoff.b = 1"),
    lambda s: s + "outputs = fock_b, wigner\n",
    lambda s: s + "bogus.key = 1\n",
    lambda s: s.replace("time.t_final = 2\n", ""),
    lambda s: s + "time.n_samples = 0\n",
    lambda s: s + "estimation.repetitions = -3\n",
    lambda s: s.replace("+ fock(2,0)", "sideways"),
    lambda s: s.replace("3.5", "nan"),
    lambda s: s + "output.levels_b = 0, 9\n",
])
def test_invalid_configs(edit):
    with pytest.raises(ConfigError):
        experiment_from_text(edit(MINIMAL))


def test_with_value():
    cfg = experiment_from_text(MINIMAL)
    assert cfg.with_value("drive.lambda_over_2pi", "0.2").lambda_over_2pi == 0.2
    assert cfg.with_value("cutoff.r", 10).cutoff_r == 10
    binom = experiment_from_text(MINIMAL.replace("+ fock(2,0)", "down binomial(1)"))
    assert binom.with_value("state.n", "2").initial_state.n == 2
    with pytest.raises(ConfigError):
        cfg.with_value("state.n", 3)
    with pytest.raises(ConfigError):
        cfg.with_value("no.such", 1)
    with pytest.raises(ConfigError):
        cfg.with_value("cutoff.r", "ten")


def test_missing_file():
    with pytest.raises(ConfigError):
        load_experiment("/nonexistent/x.cfg")
    with pytest.raises(ConfigError):
        shipped_config("fig9")


def test_trap_config():
    settings = load_trap(CONFIG_DIR / "ca40.cfg")
    assert math.isclose(settings.detuning, 2 * math.pi * 15e3)
    with pytest.raises(ConfigError):
        trap_from_text("trap.omega_x_over_2pi = 500\n")
    with pytest.raises(ConfigError):
        trap_from_text("trap.colour = red\n")
