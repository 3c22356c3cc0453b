"""Physical constants (CODATA, via scipy) and unit helpers."""

import math

from scipy import constants as _c

HBAR = _c.hbar
H_PLANCK = _c.h
E_CHARGE = _c.e
PHI0 = _c.physical_constants["mag. flux quantum"][0]

TWO_PI = 2.0 * math.pi


def ghz(f: float) -> float:
    """Ordinary frequency in GHz to angular rad/s."""
    return TWO_PI * f * 1e9


def mhz_angular(f: float) -> float:
    """Bare MHz value taken as an angular rate (rad/s)."""
    return f * 1e6
