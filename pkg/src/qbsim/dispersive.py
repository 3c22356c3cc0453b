"""Dispersive reduction of the qubit-mediated cavity/drive coupling.

Maps the bare circuit frequencies to the effective beam-splitter model in
which the cavity and the drive mode exchange photons at rate lambda_ab while
the qubit stays in its ground state. All rates are angular (rad/s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class CircuitParams:
    omega_a: float
    omega_q: float
    omega_b: float
    g_a: float
    g_b: float
    gamma: float

    def __post_init__(self):
        for name in ("omega_a", "omega_q", "omega_b", "g_a", "g_b", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.omega_a <= 0:
            raise ValueError("omega_a must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


@dataclass(frozen=True)
class DispersiveParams:
    delta_a: float
    delta_b: float
    chi_a: float
    chi_b: float
    lambda_ab: float
    ratio_a: float
    ratio_b: float


@dataclass(frozen=True)
class ValidityReport:
    threshold: float
    ratio_a: float
    ratio_b: float
    ok_a: bool
    ok_b: bool
    messages: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.ok_a and self.ok_b


def effective_coupling(g_a: float, g_b: float, delta_a: float, delta_b: float) -> float:
    """lambda_ab = g_a g_b (Delta_a + Delta_b) / (Delta_a Delta_b)."""
    return g_a * g_b * (delta_a + delta_b) / (delta_a * delta_b)


def dispersive_map(params: CircuitParams) -> DispersiveParams:
    delta_a = params.omega_q - params.omega_a
    delta_b = params.omega_q - params.omega_b
    if delta_a == 0:
        raise ValueError("qubit-cavity detuning Delta_a = omega_q - omega_a vanishes")
    if delta_b == 0:
        raise ValueError("qubit-drive detuning Delta_b = omega_q - omega_b vanishes")
    # equals delta_a + delta_b, but is exactly zero at the switch-off point; + 0.0 drops a signed zero
    detuning_sum = 2.0 * params.omega_q - (params.omega_a + params.omega_b) + 0.0
    return DispersiveParams(
        delta_a=delta_a,
        delta_b=delta_b,
        chi_a=params.g_a**2 / delta_a,
        chi_b=params.g_b**2 / delta_b,
        lambda_ab=params.g_a * params.g_b * detuning_sum / (delta_a * delta_b) + 0.0,
        ratio_a=abs(params.g_a) / abs(delta_a),
        ratio_b=abs(params.g_b) / abs(delta_b),
    )


def validity_check(d: DispersiveParams, threshold: float = 0.1) -> ValidityReport:
    """Flag coupling/detuning ratios that are not strictly below `threshold`.

    Purely diagnostic: nothing downstream refuses to run on a failed check.
    """
    ok_a = d.ratio_a < threshold
    ok_b = d.ratio_b < threshold
    messages = []
    if not ok_a:
        messages.append(f"g_a/|Delta_a| = {d.ratio_a:.4g} is not below {threshold:g}")
    if not ok_b:
        messages.append(f"g_b/|Delta_b| = {d.ratio_b:.4g} is not below {threshold:g}")
    return ValidityReport(threshold, d.ratio_a, d.ratio_b, ok_a, ok_b, messages)


def switch_frequency(omega_a: float, omega_b: float) -> float:
    """Qubit frequency at which Delta_a = -Delta_b, i.e. lambda_ab = 0."""
    if omega_a == omega_b:
        raise ValueError("omega_a == omega_b: the switch-off point would be resonant with both modes")
    return 0.5 * (omega_a + omega_b)
