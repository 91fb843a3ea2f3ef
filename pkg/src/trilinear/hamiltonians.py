"""Rotating-frame Hamiltonians of the two sensing schemes and their effective forms.

All operators are in angular-frequency units (H / hbar).  Case 1 drives the
breathing mode off-resonantly (``g = g_b``), case 2 the rocking mode (``g = g_r``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .fock import LinOp, SpaceLayout, annihilator, commutator, identity, number, pauli

WEAK_COUPLING_LIMIT = 0.3


@dataclass(frozen=True)
class DriveConfig:
    case: int
    g: float
    omega: float
    lambda_: float
    duration: float = 0.0

    def __post_init__(self):
        if self.case not in (1, 2):
            raise ValueError(f"case must be 1 or 2, got {self.case!r}")
        if self.duration < 0:
            raise ValueError("duration must be non-negative")

    @property
    def ratios(self) -> dict:
        if self.omega == 0:
            return {"g/omega": math.inf, "lambda/omega": math.inf}
        return {"g/omega": abs(self.g / self.omega), "lambda/omega": abs(self.lambda_ / self.omega)}

    @property
    def weak_coupling(self) -> bool:
        return all(v <= WEAK_COUPLING_LIMIT for v in self.ratios.values())

    def with_lambda(self, lam: float) -> "DriveConfig":
        return DriveConfig(self.case, self.g, self.omega, lam, self.duration)

    def warn_if_strong(self):
        if not self.weak_coupling:
            warnings.warn(f"outside the weak-coupling regime: {self.ratios}", stacklevel=2)


def _require_case(cfg: DriveConfig, case: int):
    if cfg.case != case:
        raise ValueError(f"drive config is for case {cfg.case}, builder needs case {case}")


def _require_detuning(cfg: DriveConfig):
    if cfg.omega == 0:
        raise ZeroDivisionError("effective Hamiltonians need a non-zero detuning omega")


def _trilinear_part(layout: SpaceLayout) -> LinOp:
    """``a_b a_r^+2`` (one breathing phonon -> two rocking phonons)."""
    a_b = annihilator(layout, "b")
    a_r = annihilator(layout, "r")
    a_rd = a_r.dag()
    return a_b @ a_rd @ a_rd


def h_trilinear(layout: SpaceLayout, lam: float) -> LinOp:
    x = _trilinear_part(layout)
    return (lam * (x + x.dag())).as_hermitian()


def h_case1(layout: SpaceLayout, cfg: DriveConfig) -> LinOp:
    _require_case(cfg, 1)
    a_b = annihilator(layout, "b")
    h = cfg.omega * number(layout, "b")
    h = h + cfg.g * (pauli(layout, "x") @ (a_b + a_b.dag()))
    return (h + h_trilinear(layout, cfg.lambda_)).as_hermitian()


def h_case2(layout: SpaceLayout, cfg: DriveConfig) -> LinOp:
    _require_case(cfg, 2)
    a_r = annihilator(layout, "r")
    h = cfg.omega * (number(layout, "b") + number(layout, "r"))
    h = h + cfg.g * (pauli(layout, "x") @ (a_r + a_r.dag()))
    return (h + h_trilinear(layout, cfg.lambda_)).as_hermitian()


def h_free(layout: SpaceLayout, cfg: DriveConfig) -> LinOp:
    """Detuning part ``H_0`` of the rotating-frame Hamiltonian."""
    if cfg.case == 1:
        return cfg.omega * number(layout, "b")
    return cfg.omega * (number(layout, "b") + number(layout, "r"))


def h_coupling(layout: SpaceLayout, cfg: DriveConfig) -> LinOp:
    """Spin-phonon plus trilinear part ``H_sb``."""
    builder = h_case1 if cfg.case == 1 else h_case2
    return (builder(layout, cfg) - h_free(layout, cfg)).as_hermitian()


def h_residual(layout: SpaceLayout, lam: float, omega: float) -> LinOp:
    """Second-order phonon-phonon term ``(lam^2/w)(4 n_b (n_r + 1/2) - a_r^+2 a_r^2)``."""
    n_b = number(layout, "b")
    n_r = number(layout, "r")
    a_r = annihilator(layout, "r")
    pair = a_r.dag() @ a_r.dag() @ a_r @ a_r
    half = 0.5 * identity(layout)
    return ((lam**2 / omega) * (4.0 * (n_b @ (n_r + half)) - pair)).as_hermitian()


def h_eff_case1(layout: SpaceLayout, cfg: DriveConfig, residual: bool = False) -> LinOp:
    """Spin-dependent squeezing: ``w n_b - (g lam / w) sx (a_r^+2 + a_r^2)``."""
    _require_case(cfg, 1)
    _require_detuning(cfg)
    a_r = annihilator(layout, "r")
    squeeze = a_r.dag() @ a_r.dag() + a_r @ a_r
    h = cfg.omega * number(layout, "b") - (cfg.g * cfg.lambda_ / cfg.omega) * (pauli(layout, "x") @ squeeze)
    if residual:
        h = h + h_residual(layout, cfg.lambda_, cfg.omega)
    return h.as_hermitian()


def h_eff_case2(layout: SpaceLayout, cfg: DriveConfig, residual: bool = False) -> LinOp:
    """Spin-dependent beam splitter: ``w (n_b + n_r) - (2 g lam / w) sx (a_b^+ a_r + a_b a_r^+)``.

    The residual enters with a minus sign here.
    """
    _require_case(cfg, 2)
    _require_detuning(cfg)
    a_b = annihilator(layout, "b")
    a_r = annihilator(layout, "r")
    hop = a_b.dag() @ a_r + a_b @ a_r.dag()
    h = cfg.omega * (number(layout, "b") + number(layout, "r"))
    h = h - (2 * cfg.g * cfg.lambda_ / cfg.omega) * (pauli(layout, "x") @ hop)
    if residual:
        h = h - h_residual(layout, cfg.lambda_, cfg.omega)
    return h.as_hermitian()


def sw_generator(layout: SpaceLayout, cfg: DriveConfig) -> LinOp:
    """Anti-hermitian generator ``S`` solving ``H_sb + [H_0, S] = 0``.

    Case 1: ``(g/w) sx (a_b - a_b^+) + (lam/w)(a_b a_r^+2 - a_b^+ a_r^2)``.
    Case 2: ``(g/w) sx (a_r - a_r^+) + (lam/w)(a_b^+ a_r^2 - a_b a_r^+2)``.
    """
    _require_detuning(cfg)
    sx = pauli(layout, "x")
    x = _trilinear_part(layout)
    mode = "b" if cfg.case == 1 else "r"
    a = annihilator(layout, mode)
    spin_part = (cfg.g / cfg.omega) * (sx @ (a - a.dag()))
    sign = 1.0 if cfg.case == 1 else -1.0
    return spin_part + (sign * cfg.lambda_ / cfg.omega) * (x - x.dag())


def sw_effective(layout: SpaceLayout, cfg: DriveConfig) -> LinOp:
    """Second-order effective Hamiltonian ``H_0 + [H_sb, S] / 2`` built from the generator."""
    s = sw_generator(layout, cfg)
    h = h_free(layout, cfg) + 0.5 * commutator(h_coupling(layout, cfg), s)
    return h
