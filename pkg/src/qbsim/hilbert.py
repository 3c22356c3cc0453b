"""Truncated Fock-space states and operators for a single bosonic mode.

Everything here is a thin immutable wrapper over dense numpy arrays. The
wrappers carry the Fock dimension so that mismatched objects fail loudly
instead of broadcasting.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvariantViolation, TruncationWarning

KET_NORM_TOL = 1e-9
HERMITIAN_TOL = 1e-9
TRACE_TOL = 1e-8
POSITIVITY_TOL = -1e-8

UNITS = ("dimensionless", "energy", "angular-frequency")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FockSpace:
    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"Fock dimension must be an integer >= 2, got {self.dim!r}")

    @classmethod
    def for_amplitude(cls, alpha: complex, multiple: int = 16) -> "FockSpace":
        """Smallest space that comfortably holds |alpha>, rounded up to `multiple`."""
        return cls(recommended_dim(abs(alpha), multiple))


def recommended_dim(alpha_abs: float, multiple: int = 16) -> int:
    need = math.ceil(alpha_abs**2 + 6.0 * alpha_abs + 10.0)
    return max(multiple, multiple * math.ceil(need / multiple))


def _check_same(a: FockSpace, b: FockSpace) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"Fock dimensions differ: {a.dim} vs {b.dim}")


@dataclass(frozen=True)
class Ket:
    space: FockSpace
    amplitudes: np.ndarray
    truncation_deficit: float = 0.0

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.shape != (self.space.dim,):
            raise DimensionMismatchError(
                f"ket has shape {amps.shape}, expected ({self.space.dim},)"
            )
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def validate(self, tol: float = KET_NORM_TOL) -> None:
        # the deficit is the known, reported shortfall of a truncated expansion
        expected = 1.0 - self.truncation_deficit
        if abs(self.norm**2 - expected) > tol:
            raise InvariantViolation(
                f"ket norm^2 {self.norm**2:.12g} differs from {expected:.12g}"
            )


@dataclass(frozen=True)
class DensityMatrix:
    space: FockSpace
    elements: np.ndarray
    truncation_deficit: float = 0.0

    def __post_init__(self):
        rho = _frozen(self.elements)
        if rho.shape != (self.space.dim, self.space.dim):
            raise DimensionMismatchError(
                f"density matrix has shape {rho.shape}, expected {self.space.dim}x{self.space.dim}"
            )
        object.__setattr__(self, "elements", rho)

    @property
    def trace(self) -> float:
        return float(np.trace(self.elements).real)

    @property
    def purity(self) -> float:
        rho = self.elements
        return float(np.einsum("ij,ji->", rho, rho).real)

    def invariant_errors(self) -> dict[str, float]:
        """Deviations from hermiticity, unit trace and positivity."""
        rho = self.elements
        herm = float(np.max(np.abs(rho - rho.conj().T)))
        tr = abs(np.trace(rho).real - (1.0 - self.truncation_deficit))
        hermitian_part = 0.5 * (rho + rho.conj().T)
        min_eig = float(np.linalg.eigvalsh(hermitian_part)[0])
        return {"hermiticity": herm, "trace": tr, "min_eigenvalue": min_eig}

    def validate(self) -> None:
        err = self.invariant_errors()
        if err["hermiticity"] > HERMITIAN_TOL:
            raise InvariantViolation(f"density matrix not Hermitian (max dev {err['hermiticity']:.3g})")
        if err["trace"] > TRACE_TOL:
            raise InvariantViolation(f"density matrix trace off by {err['trace']:.3g}")
        if err["min_eigenvalue"] < POSITIVITY_TOL:
            raise InvariantViolation(f"density matrix has eigenvalue {err['min_eigenvalue']:.3g}")


@dataclass(frozen=True)
class Operator:
    space: FockSpace
    elements: np.ndarray
    units: str = "dimensionless"

    def __post_init__(self):
        if self.units not in UNITS:
            raise ValueError(f"unknown operator units {self.units!r}")
        op = _frozen(self.elements)
        if op.shape != (self.space.dim, self.space.dim):
            raise DimensionMismatchError(
                f"operator has shape {op.shape}, expected {self.space.dim}x{self.space.dim}"
            )
        object.__setattr__(self, "elements", op)

    def dag(self) -> "Operator":
        return Operator(self.space, self.elements.conj().T, self.units)

    def hermiticity_error(self) -> float:
        """Max elementwise deviation from hermiticity, relative to the largest entry."""
        m = self.elements
        scale = float(np.max(np.abs(m))) or 1.0
        return float(np.max(np.abs(m - m.conj().T))) / scale

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermiticity_error() <= tol

    def __matmul__(self, other: "Operator") -> "Operator":
        _check_same(self.space, other.space)
        units = self.units if other.units == "dimensionless" else other.units
        return Operator(self.space, self.elements @ other.elements, units)

    def scaled(self, factor: complex, units: str | None = None) -> "Operator":
        return Operator(self.space, factor * self.elements, units or self.units)


def annihilation_op(space: FockSpace) -> Operator:
    n = np.arange(1, space.dim)
    return Operator(space, np.diag(np.sqrt(n).astype(complex), k=1))


def creation_op(space: FockSpace) -> Operator:
    return annihilation_op(space).dag()


def number_op(space: FockSpace) -> Operator:
    return Operator(space, np.diag(np.arange(space.dim, dtype=complex)))


def fock_ket(space: FockSpace, n: int) -> Ket:
    if not 0 <= n < space.dim:
        raise ValueError(f"Fock index {n} outside 0..{space.dim - 1}")
    amps = np.zeros(space.dim, dtype=complex)
    amps[n] = 1.0
    return Ket(space, amps)


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!) for n < dim, by recurrence."""
    c = np.empty(dim, dtype=complex)
    c[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for n in range(dim - 1):
        c[n + 1] = c[n] * alpha / math.sqrt(n + 1)
    return c


def coherent_state(space: FockSpace, alpha: complex, renormalize: bool = False) -> Ket:
    """Truncated coherent state |alpha>.

    The norm shortfall caused by truncation is stored on the returned ket as
    ``truncation_deficit``; pass ``renormalize=True`` to rescale instead.
    """
    alpha = complex(alpha)
    if not cmath.isfinite(alpha):
        raise ValueError(f"coherent amplitude must be finite, got {alpha!r}")
    need = abs(alpha) ** 2 + 6.0 * abs(alpha) + 10.0
    if space.dim < need:
        warnings.warn(
            f"dim={space.dim} is below the recommended {math.ceil(need)} for |alpha|={abs(alpha):.4g}",
            TruncationWarning,
            stacklevel=2,
        )
    c = coherent_amplitudes(alpha, space.dim)
    deficit = max(0.0, 1.0 - float(np.sum(np.abs(c) ** 2)))
    if renormalize:
        return Ket(space, c / np.linalg.norm(c))
    return Ket(space, c, truncation_deficit=deficit)


def dm_from_ket(state: Ket) -> DensityMatrix:
    psi = state.amplitudes
    return DensityMatrix(state.space, np.outer(psi, psi.conj()), state.truncation_deficit)


def dephase(rho: DensityMatrix) -> DensityMatrix:
    """Drop all Fock-basis coherences, keeping the populations."""
    return DensityMatrix(rho.space, np.diag(np.diag(rho.elements)), rho.truncation_deficit)


def expectation(op: Operator, state: DensityMatrix | Ket) -> complex:
    """Tr[rho op] or <psi|op|psi>.

    For a Hermitian operator a non-negligible imaginary part is reported
    through a warning rather than discarded.
    """
    _check_same(op.space, state.space)
    if isinstance(state, Ket):
        psi = state.amplitudes
        val = complex(np.vdot(psi, op.elements @ psi))
    else:
        val = complex(np.einsum("ij,ji->", state.elements, op.elements))
    if op.is_hermitian():
        scale = max(1.0, abs(val.real))
        if abs(val.imag) > HERMITIAN_TOL * scale:
            warnings.warn(
                f"expectation of a Hermitian operator has imaginary part {val.imag:.3g}",
                RuntimeWarning,
                stacklevel=2,
            )
    return val


def commutator(a: Operator, b: Operator) -> np.ndarray:
    _check_same(a.space, b.space)
    return a.elements @ b.elements - b.elements @ a.elements


__all__ = [
    "FockSpace",
    "Ket",
    "DensityMatrix",
    "Operator",
    "annihilation_op",
    "creation_op",
    "number_op",
    "fock_ket",
    "coherent_amplitudes",
    "coherent_state",
    "recommended_dim",
    "dm_from_ket",
    "dephase",
    "expectation",
    "commutator",
]
