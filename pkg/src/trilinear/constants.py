"""Physical constants (CODATA 2018, SI units)."""

import math

HBAR = 1.054571817e-34  # J s
ELEMENTARY_CHARGE = 1.602176634e-19  # C
EPSILON_0 = 8.8541878128e-12  # F / m
AMU = 1.66053906660e-27  # kg

TWO_PI = 2.0 * math.pi


def khz_to_angular(f_khz: float) -> float:
    """Convert a frequency/2pi in kHz to an angular frequency in rad/s."""
    return TWO_PI * 1e3 * f_khz


def angular_to_khz(omega: float) -> float:
    return omega / (TWO_PI * 1e3)
