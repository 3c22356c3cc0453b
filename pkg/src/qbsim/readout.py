"""Non-destructive photon-number readout through the waveguide transmission dip.

A probe photon scattered by the dispersively shifted qubit sees the
amplitude

    t(omega_k) = i D / (i D - Gamma),
    D = (omega_k - omega_q) - g_a^2 / (2 Delta_a) - g_a^2 n / Delta_a,

with Gamma = g_l^2 / v_g the qubit decay rate into the line. Only the mean
photon number n of the battery enters, so reading the spectrum never touches
the battery state.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DiagnosticWarning, DipOutsideWindowError


@dataclass(frozen=True)
class ReadoutParams:
    omega_q: float
    omega_a: float
    g_a: float
    line_rate: float

    def __post_init__(self):
        if not self.line_rate > 0:
            raise ValueError("line_rate (g_l^2/v_g) must be positive")
        if self.omega_q == self.omega_a:
            raise ValueError("qubit and cavity are resonant; the dispersive readout needs Delta_a != 0")

    @property
    def delta_a(self) -> float:
        return self.omega_q - self.omega_a

    @property
    def shift_per_photon(self) -> float:
        return self.g_a**2 / self.delta_a

    @classmethod
    def from_waveguide(cls, omega_q, omega_a, g_a, g_l, v_g) -> "ReadoutParams":
        return cls(omega_q, omega_a, g_a, g_l**2 / v_g)


@dataclass(frozen=True)
class Spectrum:
    probe: np.ndarray
    transmission: np.ndarray
    n_bar: float


def dip_detuning(n_bar: float, p: ReadoutParams) -> float:
    """omega_dip - omega_q = g_a^2 (1/2 + n) / Delta_a."""
    return p.shift_per_photon * (0.5 + n_bar)


def _mismatch(omega_k, n_bar: float, p: ReadoutParams):
    return np.asarray(omega_k, dtype=float) - p.omega_q - dip_detuning(n_bar, p)


def transmission_amplitude(omega_k, n_bar: float, p: ReadoutParams):
    if n_bar < 0:
        raise ValueError("n_bar must be non-negative")
    d = _mismatch(omega_k, n_bar, p)
    amp = 1j * d / (1j * d - p.line_rate)
    return amp if amp.ndim else complex(amp)


def lorentzian_dip(mismatch, line_rate: float):
    """|t|^2 = D^2 / (D^2 + Gamma^2) as a function of the mismatch D itself."""
    d = np.asarray(mismatch, dtype=float)
    out = d**2 / (d**2 + line_rate**2)
    return out if out.ndim else float(out)


def transmission(omega_k, n_bar: float, p: ReadoutParams):
    if n_bar < 0:
        raise ValueError("n_bar must be non-negative")
    return lorentzian_dip(_mismatch(omega_k, n_bar, p), p.line_rate)


def spectrum_sweep(grid, n_bar: float, p: ReadoutParams) -> Spectrum:
    grid = np.asarray(grid, dtype=float)
    dip = p.omega_q + dip_detuning(n_bar, p)
    if grid.size and not grid.min() < dip < grid.max():
        warnings.warn(
            f"probe grid [{grid.min():.6g}, {grid.max():.6g}] rad/s misses the dip at {dip:.6g} rad/s",
            DiagnosticWarning,
            stacklevel=2,
        )
    return Spectrum(grid, np.asarray(transmission(grid, n_bar, p), dtype=float), float(n_bar))


def probe_grid(n_values, p: ReadoutParams, spacing: float | None = None, margin: float = 10.0) -> np.ndarray:
    """Uniform probe grid covering the dips of every n in `n_values` with `margin` linewidths to spare."""
    dips = [p.omega_q + dip_detuning(n, p) for n in n_values]
    spacing = spacing or p.line_rate / 5.0
    lo = min(dips) - margin * p.line_rate
    hi = max(dips) + margin * p.line_rate
    count = int(math.ceil((hi - lo) / spacing)) + 1
    return lo + spacing * np.arange(count)


def locate_dip(spectrum: Spectrum) -> float:
    """Probe frequency of the transmission minimum, refined by a parabola through three samples."""
    t = spectrum.transmission
    w = spectrum.probe
    i = int(np.argmin(t))
    if i == 0 or i == len(t) - 1:
        raise DipOutsideWindowError("transmission minimum sits on the edge of the probe window")
    # work in offsets from the central sample; absolute probe frequencies ~1e10 lose digits when squared
    u0, u2 = w[i - 1] - w[i], w[i + 1] - w[i]
    y0, y1, y2 = t[i - 1], t[i], t[i + 1]
    s0, s2 = (y0 - y1) / u0, (y2 - y1) / u2
    curvature = (s2 - s0) / (u2 - u0)
    if curvature <= 0:
        return float(w[i])
    slope = s0 - curvature * u0
    return float(w[i] - slope / (2.0 * curvature))


def infer_photon_number(spectrum: Spectrum, p: ReadoutParams) -> float:
    """Invert the dip position to the stored mean photon number."""
    w_dip = locate_dip(spectrum)
    n = (w_dip - p.omega_q) / p.shift_per_photon - 0.5
    if n < 0:
        warnings.warn(f"inferred photon number {n:.3g} < 0 clamped to 0", DiagnosticWarning, stacklevel=2)
        n = 0.0
    return float(n)


def fwhm(spectrum: Spectrum) -> float:
    """Full width at half depth of the dip in 1 - T, by linear interpolation."""
    depth = 1.0 - spectrum.transmission
    half = 0.5 * depth.max()
    above = np.nonzero(depth >= half)[0]
    lo, hi = above[0], above[-1]
    if lo == 0 or hi == len(depth) - 1:
        raise DipOutsideWindowError("dip is not fully contained in the probe window")
    w = spectrum.probe

    def cross(i, j):
        return w[i] + (half - depth[i]) * (w[j] - w[i]) / (depth[j] - depth[i])

    return float(cross(hi, hi + 1) - cross(lo - 1, lo))
