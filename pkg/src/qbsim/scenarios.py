"""Scenario runners: turn a validated config into a data table."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import dynamics, ergotropy, readout, squid
from .config import PARSERS, ScenarioConfig
from .constants import HBAR
from .dispersive import CircuitParams, dispersive_map, validity_check
from .hilbert import FockSpace, Operator, coherent_state, dm_from_ket, fock_ket, recommended_dim


@dataclass
class Table:
    columns: list[str]
    rows: list[list[float]]
    summary: dict[str, Any] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)


def _columns_to_rows(*cols) -> list[list[float]]:
    return [list(map(float, r)) for r in zip(*cols)]


def _dim(cfg: ScenarioConfig, alpha_abs: float) -> int:
    dim = cfg.numerics["dim"]
    return recommended_dim(alpha_abs) if dim == "auto" else int(dim)


def _dt(cfg: ScenarioConfig, suggested: float) -> float:
    dt = cfg.numerics["dt"]
    return suggested if dt == "auto" else PARSERS["time"]("numerics.dt", dt)


def _drive(p) -> dynamics.ChargingDrive:
    return dynamics.ChargingDrive(p["lambda_ab"], p["beta_mag"], p["theta_b"])


def _row_stride(n_points: int, rows: int) -> int:
    return max(1, math.ceil((n_points - 1) / max(1, rows - 1)))


def _pick(times: np.ndarray, rows: int) -> np.ndarray:
    idx = np.arange(0, len(times), _row_stride(len(times), rows))
    if idx[-1] != len(times) - 1:
        idx = np.append(idx, len(times) - 1)
    return idx


def run_charge(cfg: ScenarioConfig) -> Table:
    p = cfg.parameters
    drive = _drive(p)
    gamma = p["gamma"]
    space = FockSpace(_dim(cfg, 2.0 * drive.rate / gamma))
    H = dynamics.charge_hamiltonian(drive, space)
    dt = _dt(cfg, dynamics.suggest_dt(H, gamma, drive.rate))
    lcfg = dynamics.LindbladConfig(
        dt, p["gamma_t_end"] / gamma, space, int(cfg.numerics["snapshot_stride"]), p["omega_a"]
    )
    traj = dynamics.lindblad_evolve(H, gamma, dm_from_ket(fock_ket(space, 0)), lcfg, rate=drive.rate)
    idx = _pick(traj.times, int(cfg.numerics["rows"]))
    t = traj.times[idx]
    n_ana = dynamics.analytic_mean_photons(t, drive, gamma)
    rows = _columns_to_rows(
        t,
        gamma * t,
        traj.mean_photons[idx],
        n_ana,
        traj.energy[idx],
        traj.power[idx],
        dynamics.charging_power(t, drive, gamma, p["omega_a"]),
        traj.trace[idx],
        traj.purity[idx],
    )
    mask = n_ana > 0
    rel = float(np.max(np.abs(traj.mean_photons[idx][mask] - n_ana[mask]) / n_ana[mask])) if mask.any() else 0.0
    return Table(
        [
            "t_s", "gamma_t", "mean_photons", "mean_photons_analytic", "energy_J",
            "power_W", "power_analytic_W", "trace", "purity",
        ],
        rows,
        summary={
            "dim": space.dim,
            "dt_s": traj.times[1] - traj.times[0],
            "steps": len(traj.times) - 1,
            "max_relative_error_vs_analytic": rel,
            "trace_drift": traj.trace_drift,
            "min_purity": float(traj.purity.min()),
            "steady_state_photons": dynamics.steady_state_photons(drive, gamma),
        },
    )


def run_age(cfg: ScenarioConfig) -> Table:
    p = cfg.parameters
    gamma, n_max = p["gamma"], p["n_max"]
    alpha0 = math.sqrt(n_max)
    space = FockSpace(_dim(cfg, alpha0))
    H0 = Operator(space, np.zeros((space.dim, space.dim)), "energy")
    dt = _dt(cfg, dynamics.suggest_dt(H0, gamma, 0.0))
    lcfg = dynamics.LindbladConfig(
        dt, p["gamma_tau_end"] / gamma, space, int(cfg.numerics["snapshot_stride"]), p["omega_a"]
    )
    rho0 = dm_from_ket(coherent_state(space, alpha0))
    traj = dynamics.lindblad_evolve(H0, gamma, rho0, lcfg, rate=0.0)
    idx = _pick(traj.times, int(cfg.numerics["rows"]))
    tau = traj.times[idx]
    H_B = ergotropy.battery_hamiltonian(space, p["omega_a"])
    erg = [
        ergotropy.ergotropy(dynamics.aging_state(x, alpha0, gamma, space), H_B, "dephased").ergotropy for x in tau
    ]
    n_ana = dynamics.aging_mean_photons(tau, n_max, gamma)
    rows = _columns_to_rows(tau, gamma * tau, traj.mean_photons[idx], n_ana, traj.energy[idx], erg)
    return Table(
        ["tau_s", "gamma_tau", "mean_photons", "mean_photons_analytic", "energy_J", "ergotropy_dephased_J"],
        rows,
        summary={
            "dim": space.dim,
            "steps": len(traj.times) - 1,
            "max_abs_error_vs_analytic": float(np.max(np.abs(traj.mean_photons[idx] - n_ana))),
            "trace_drift": traj.trace_drift,
        },
    )


def run_ergotropy(cfg: ScenarioConfig) -> Table:
    p = cfg.parameters
    drive = _drive(p)
    gamma, omega_a = p["gamma"], p["omega_a"]
    samples = int(cfg.numerics["samples"])
    gt = np.linspace(0.0, p["gamma_t_end"], samples)
    t = gt / gamma
    space = FockSpace(_dim(cfg, 2.0 * drive.rate / gamma))
    points = ergotropy.ergotropy_vs_time(drive, gamma, omega_a, t, space)
    n = dynamics.analytic_mean_photons(t, drive, gamma)
    rows = _columns_to_rows(
        t,
        gt,
        n,
        HBAR * omega_a * n,
        dynamics.charging_power(t, drive, gamma, omega_a),
        [pt.dephased.ergotropy for pt in points],
        [pt.coherent.ergotropy for pt in points],
    )
    last = points[-1]
    return Table(
        ["t_s", "gamma_t", "mean_photons", "energy_J", "power_W", "ergotropy_dephased_J", "ergotropy_coherent_J"],
        rows,
        summary={
            "dim": space.dim,
            "final_ergotropy_dephased_quanta": last.dephased.in_quanta(omega_a).ergotropy,
            "final_ergotropy_coherent_quanta": last.coherent.in_quanta(omega_a).ergotropy,
            "peak_power_gamma_t": gamma * dynamics.peak_power_time(gamma),
        },
    )


def run_ratio_sweep(cfg: ScenarioConfig) -> Table:
    p = cfg.parameters
    betas = np.linspace(p["beta_min"], p["beta_max"], int(cfg.numerics["samples"]))
    curve = ergotropy.ratio_vs_beta(betas, p["lambda_ab"], p["gamma"], p["omega_a"])
    rows = _columns_to_rows(curve.beta, curve.mean_photons, curve.ratio_dephased, curve.ratio_coherent)
    return Table(["beta", "mean_photons", "ratio_dephased", "ratio_coherent"], rows)


def _n_label(n: float) -> str:
    return f"T_n{f'{n:.2f}'.rstrip('0').rstrip('.')}"


def run_readout(cfg: ScenarioConfig) -> Table:
    p = cfg.parameters
    rp = readout.ReadoutParams(p["omega_q"], p["omega_a"], p["g_a"], p["line_rate"])
    n_values = [p["n_max"] * math.exp(-gt) if math.isfinite(gt) else 0.0 for gt in p["gamma_tau"]]
    grid = readout.probe_grid(
        n_values,
        rp,
        spacing=cfg.numerics["spacing_fraction"] * rp.line_rate,
        margin=cfg.numerics["margin_linewidths"],
    )
    spectra = [readout.spectrum_sweep(grid, n, rp) for n in n_values]
    inferred = [readout.infer_photon_number(s, rp) for s in spectra]
    rows = _columns_to_rows(grid - rp.omega_q, *[s.transmission for s in spectra])
    d = dispersive_map(CircuitParams(p["omega_a"], p["omega_q"], p["omega_b"], p["g_a"], p["g_b"], p["gamma"]))
    check = validity_check(d, cfg.numerics["validity_threshold"])
    return Table(
        ["detuning_rad_s"] + [_n_label(n) for n in n_values],
        rows,
        summary={
            "n_bar": n_values,
            "inferred_n_bar": inferred,
            "dip_detuning_rad_s": [readout.dip_detuning(n, rp) for n in n_values],
            "ratio_a": d.ratio_a,
            "lambda_ab_rad_s": d.lambda_ab,
        },
        diagnostics=check.messages,
    )


def _squid_params(cfg: ScenarioConfig, phi_d: float) -> squid.SquidParams:
    p = cfg.parameters
    return squid.SquidParams(
        p["I_c"],
        p["C_total"],
        phi_d,
        p["phi_a_tilde"],
        p["phi_b_tilde"],
        include_tilde_in_bias=bool(cfg.numerics["include_tilde_in_bias"]),
    )


def run_squid_levels(cfg: ScenarioConfig) -> Table:
    sp = _squid_params(cfg, cfg.parameters["phi_d"])
    spec = squid.solve_levels(
        sp, int(cfg.numerics["n_states"]), int(cfg.numerics["grid_size"]), cfg.numerics["boundary"]
    )
    e = spec.energies
    rows = _columns_to_rows(np.arange(len(e)), e, e - e[0], (e - e[0]) / HBAR, spec.mu[0])
    c = squid.circuit_couplings(sp, spec) if len(e) > 1 else None
    return Table(
        ["level", "energy_J", "energy_above_ground_J", "transition_rad_s", "mu_0j"],
        rows,
        summary={
            "omega_q_rad_s": spec.omega_q,
            "plasma_frequency_rad_s": squid.plasma_frequency(sp),
            "U0_J": spec.U0,
            "U1_J": spec.U1,
            "n_bound": spec.n_bound,
            "g_a_rad_s": c.g_a if c else None,
            "g_b_rad_s": c.g_b if c else None,
            "mu01": c.mu01 if c else None,
        },
        diagnostics=sp.small_flux_warnings(),
    )


def run_flux_sweep(cfg: ScenarioConfig) -> Table:
    p = cfg.parameters
    phis = np.linspace(p["phi_min"], p["phi_max"], int(cfg.numerics["samples"]))
    omega = squid.frequency_vs_flux(_squid_params(cfg, phis[0]), phis, int(cfg.numerics["grid_size"]))
    return Table(["phi_d_Phi0", "omega_q_rad_s"], _columns_to_rows(phis, omega))


RUNNERS = {
    "charge": run_charge,
    "age": run_age,
    "ergotropy": run_ergotropy,
    "ratio-sweep": run_ratio_sweep,
    "readout": run_readout,
    "squid-levels": run_squid_levels,
    "flux-sweep": run_flux_sweep,
}


def run_scenario(cfg: ScenarioConfig) -> Table:
    return RUNNERS[cfg.kernel](cfg)


def preflight(cfg: ScenarioConfig) -> list[str]:
    """Physics sanity warnings that do not block a run."""
    p = cfg.parameters
    notes: list[str] = []
    if cfg.kernel == "readout":
        d = dispersive_map(CircuitParams(p["omega_a"], p["omega_q"], p["omega_b"], p["g_a"], p["g_b"], p["gamma"]))
        notes += validity_check(d, cfg.numerics["validity_threshold"]).messages
    if cfg.kernel in ("squid-levels", "flux-sweep"):
        notes += _squid_params(cfg, 0.0).small_flux_warnings()
    if cfg.kernel in ("charge", "ergotropy"):
        n_ss = dynamics.steady_state_photons(_drive(p), p["gamma"])
        if cfg.numerics.get("dim", "auto") != "auto" and int(cfg.numerics["dim"]) < n_ss + 6 * math.sqrt(n_ss) + 10:
            notes.append(f"numerics.dim={cfg.numerics['dim']} is small for steady-state <n> = {n_ss:.4g}")
    return notes
