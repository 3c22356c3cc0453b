"""Flux-biased SQUID charger: bound states, qubit frequency and couplings.

The loop phase delta is a particle of mass m* = 2C (Phi0/2pi)^2 in the
potential -U0 cos(delta), with U0 = 2 E_J cos(2 pi phi_d / Phi0). The
kinetic term is discretized by three-point central differences, either on
the compact circle [-pi, pi) (periodic, default) or on a window with hard
walls (Dirichlet) as a cross-check for deeply bound states.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq
from scipy.sparse.linalg import eigsh

from .constants import HBAR, PHI0, TWO_PI
from .dispersive import CircuitParams, DispersiveParams, dispersive_map, validity_check
from .errors import BoundStateError

DEFAULT_GRID = 32768
MIN_GRID = 512


@dataclass(frozen=True)
class SquidParams:
    I_c: float
    C_total: float
    phi_d: float
    phi_a_tilde: float = 0.01
    phi_b_tilde: float = 0.01
    Phi0: float = PHI0
    include_tilde_in_bias: bool = False

    def __post_init__(self):
        if not self.I_c > 0:
            raise ValueError("critical current I_c must be positive")
        if not self.C_total > 0:
            raise ValueError("capacitance C_total must be positive")

    @property
    def bias(self) -> float:
        """Flux (units of Phi0) entering the potential depth."""
        if self.include_tilde_in_bias:
            return self.phi_d + self.phi_a_tilde + self.phi_b_tilde
        return self.phi_d

    @property
    def effective_mass(self) -> float:
        return 2.0 * self.C_total * (self.Phi0 / TWO_PI) ** 2

    def with_flux(self, phi_d: float) -> "SquidParams":
        return SquidParams(
            self.I_c, self.C_total, phi_d, self.phi_a_tilde, self.phi_b_tilde, self.Phi0, self.include_tilde_in_bias
        )

    def small_flux_warnings(self, limit: float = 0.05) -> list[str]:
        return [
            f"{name} = {val:g} Phi0 is not small (> {limit})"
            for name, val in (("phi_a_tilde", self.phi_a_tilde), ("phi_b_tilde", self.phi_b_tilde))
            if abs(val) > limit
        ]


@dataclass(frozen=True)
class SquidSpectrum:
    grid: np.ndarray
    energies: np.ndarray
    wavefunctions: np.ndarray
    mu: np.ndarray
    omega_q: float
    U0: float
    U1: float
    n_bound: int
    boundary: str

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(self.energies)


def josephson_energy(I_c: float, Phi0: float = PHI0) -> float:
    if not I_c > 0:
        raise ValueError("critical current must be positive")
    return I_c * Phi0 / TWO_PI


def potential_coefficients(p: SquidParams) -> tuple[float, float]:
    """(U0, U1) = 2 E_J (cos, sin)(2 pi phi / Phi0)."""
    ej2 = 2.0 * josephson_energy(p.I_c, p.Phi0)
    angle = TWO_PI * p.bias
    return ej2 * math.cos(angle), ej2 * math.sin(angle)


def plasma_frequency(p: SquidParams) -> float:
    """Small-oscillation frequency (2pi/Phi0) sqrt(U0 / 2C) of the cosine well."""
    U0, _ = potential_coefficients(p)
    if U0 <= 0:
        raise ValueError("plasma frequency needs a confining potential (U0 > 0)")
    return TWO_PI / p.Phi0 * math.sqrt(U0 / (2.0 * p.C_total))


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # first sizeable component positive, so output does not depend on the eigensolver's phase
    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        lead = np.nonzero(np.abs(col) > 1e-3 * np.max(np.abs(col)))[0][0]
        if col[lead] < 0:
            vecs[:, k] = -col
    return vecs


def solve_levels(
    p: SquidParams,
    n_states: int = 4,
    grid_size: int = DEFAULT_GRID,
    boundary: str = "periodic",
    half_window: float = math.pi,
) -> SquidSpectrum:
    """Lowest `n_states` eigenpairs of -(hbar^2/2m*) d^2/d delta^2 - U0 cos(delta)."""
    if grid_size < MIN_GRID:
        raise ValueError(f"grid_size must be at least {MIN_GRID}")
    if n_states < 1:
        raise ValueError("n_states must be positive")
    U0, U1 = potential_coefficients(p)
    m = p.effective_mass

    if boundary == "periodic":
        h = TWO_PI / grid_size
        x = -math.pi + h * np.arange(grid_size)
    elif boundary == "dirichlet":
        h = 2.0 * half_window / (grid_size + 1)
        x = -half_window + h * np.arange(1, grid_size + 1)
    else:
        raise ValueError(f"unknown boundary {boundary!r}")

    # solve in units of 2 E_J so the eigensolvers see O(1) numbers
    scale = 2.0 * josephson_energy(p.I_c, p.Phi0)
    t = HBAR**2 / (2.0 * m * h * h) / scale
    potential = -U0 * np.cos(x) / scale
    diag = 2.0 * t + potential
    off = np.full(grid_size - 1, -t)

    if boundary == "dirichlet":
        w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_states - 1))
    else:
        H = sparse.diags([off, diag, off], [-1, 0, 1], format="lil")
        H[0, grid_size - 1] = -t
        H[grid_size - 1, 0] = -t
        # every eigenvalue lies above the potential minimum, so this shift targets the lowest ones
        sigma = float(potential.min()) - 1e-2
        # start vector must overlap both parity sectors; fixed seed keeps runs reproducible
        v0 = np.random.default_rng(0).standard_normal(grid_size)
        w, v = eigsh(H.tocsc(), k=n_states, sigma=sigma, which="LM", v0=v0)
        order = np.argsort(w)
        w, v = w[order], v[:, order]
    w = np.asarray(w) * scale

    barrier = float(np.max(-U0 * np.cos(x)))
    n_bound = int(np.sum(w < barrier))
    if n_bound < n_states:
        raise BoundStateError(
            f"only {n_bound} of the {n_states} requested states lie below the barrier "
            f"({barrier:.4g} J) at phi_d = {p.phi_d:.10g} Phi0"
        )

    v = _fix_signs(np.array(v) / math.sqrt(h))
    mu = (v.T * np.cos(x)) @ v * h
    mu = 0.5 * (mu + mu.T)
    omega_q = (w[1] - w[0]) / HBAR if n_states > 1 else float("nan")
    return SquidSpectrum(
        grid=x,
        energies=np.asarray(w),
        wavefunctions=v.T.copy(),
        mu=mu,
        omega_q=float(omega_q),
        U0=U0,
        U1=U1,
        n_bound=n_bound,
        boundary=boundary,
    )


def qubit_frequency(p: SquidParams, grid_size: int = DEFAULT_GRID) -> float:
    return solve_levels(p, n_states=2, grid_size=grid_size).omega_q


def _workers() -> int:
    raw = os.environ.get("QBSIM_THREADS")
    return max(1, int(raw)) if raw else min(8, os.cpu_count() or 1)


def frequency_vs_flux(p: SquidParams, phi_grid, grid_size: int = DEFAULT_GRID) -> np.ndarray:
    """omega_q(phi_d) in rad/s, one independent solve per flux point."""
    phis = [float(x) for x in np.asarray(phi_grid, dtype=float)]

    def one(phi):
        return qubit_frequency(p.with_flux(phi), grid_size)

    if _workers() == 1 or len(phis) < 2:
        return np.array([one(x) for x in phis])
    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        return np.array(list(pool.map(one, phis)))


def flux_for_frequency(
    p: SquidParams, omega_target: float, bracket: tuple[float, float] = (1.95, 2.0), grid_size: int = DEFAULT_GRID
) -> float:
    """Bias flux (Phi0 units) on the bracketed branch where omega_q hits `omega_target`."""

    def f(phi):
        return qubit_frequency(p.with_flux(phi), grid_size) - omega_target

    return brentq(f, *bracket, xtol=1e-10)


@dataclass(frozen=True)
class Couplings:
    g_a: float
    g_b: float
    mu01: float
    U1: float


def circuit_couplings(p: SquidParams, spec: SquidSpectrum) -> Couplings:
    """g_{a,b} = 2 pi U1 phi_tilde_{a,b} mu_01 / (hbar Phi0), phi_tilde in Phi0 units."""
    if spec.mu.shape[0] < 2:
        raise ValueError("need at least two levels for mu_01")
    mu01 = float(spec.mu[0, 1])
    pref = TWO_PI * spec.U1 * mu01 / HBAR
    return Couplings(pref * p.phi_a_tilde, pref * p.phi_b_tilde, mu01, spec.U1)


@dataclass(frozen=True)
class OperatingPoint:
    phi_d: float
    omega_q: float
    couplings: Couplings
    dispersive: DispersiveParams
    dispersive_ok: bool


def operating_point(
    p: SquidParams, omega_a: float, omega_b: float, gamma: float, grid_size: int = DEFAULT_GRID
) -> OperatingPoint:
    """Qubit frequency, circuit couplings and effective beam-splitter model at the bias of `p`."""
    spec = solve_levels(p, n_states=2, grid_size=grid_size)
    c = circuit_couplings(p, spec)
    d = dispersive_map(CircuitParams(omega_a, spec.omega_q, omega_b, c.g_a, c.g_b, gamma))
    return OperatingPoint(p.phi_d, spec.omega_q, c, d, validity_check(d).ok)
