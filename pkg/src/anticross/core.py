"""Two-level operators, drive parameters and closed-form scalar diagnostics.

Everything is dimensionless: energies and rates in units of the drive
frequency, time as the drive phase ``tau`` (period exactly ``2*pi``), hbar = 1.
Operators are plain ``(2, 2)`` complex arrays in the sigma_z eigenbasis
ordered as (|+>, |->).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

KET_PLUS = np.array([1, 0], dtype=complex)
KET_MINUS = np.array([0, 1], dtype=complex)

for _m in (IDENTITY, *PAULI, KET_PLUS, KET_MINUS):
    _m.flags.writeable = False

_COUPLINGS = {"sx": SIGMA_X, "sy": SIGMA_Y, "sz": SIGMA_Z}


class DomainError(ValueError):
    """Raised when an argument lies outside the mathematical domain of an operation."""


def coupling_operator(name):
    """Return the Pauli matrix selected by ``"sx"``, ``"sy"`` or ``"sz"``.

    A ``(2, 2)`` Hermitian array is passed through unchanged.
    """
    if isinstance(name, str):
        key = name.lower().replace("sigma_", "s").replace("sigma", "s")
        try:
            return _COUPLINGS[key]
        except KeyError:
            raise ValueError(f"unknown coupling operator {name!r}") from None
    op = np.asarray(name, dtype=complex)
    if op.shape != (2, 2) or not np.allclose(op, op.conj().T, atol=1e-12):
        raise ValueError("coupling operator must be a Hermitian 2x2 matrix")
    return op


def coupling_label(S):
    for key, op in _COUPLINGS.items():
        if np.array_equal(np.asarray(S), op):
            return key
    return "custom"


@dataclass(frozen=True)
class DriveParams:
    """Dimensionless drive amplitude ``A``, gap ``Delta``, bath temperature and coupling.

    ``theta`` is kT/(hbar*Omega) and ``kappa`` the overall system-bath coupling
    strength; both only matter once a bath is attached.
    """

    A: float
    Delta: float
    theta: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        for name in ("A", "Delta", "theta", "kappa"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise DomainError(f"{name} must be finite and non-negative, got {value!r}")
        if self.A == 0 and self.Delta == 0:
            raise DomainError("A and Delta cannot both vanish")


def pauli_vector(op):
    """Components (x, y, z) of a traceless Hermitian operator in the Pauli basis."""
    op = np.asarray(op)
    return np.real(np.array([np.trace(op @ s) for s in PAULI])) / 2


def from_pauli_vector(vec):
    vec = np.asarray(vec, dtype=float)
    return vec[..., 0, None, None] * SIGMA_X + vec[..., 1, None, None] * SIGMA_Y + vec[..., 2, None, None] * SIGMA_Z


def drive_field(params: DriveParams, tau):
    """Pauli-vector coefficients of ``hamiltonian`` for an array of times, shape ``(..., 3)``."""
    tau = np.asarray(tau, dtype=float)
    out = np.zeros(tau.shape + (3,))
    out[..., 0] = params.Delta / 2
    out[..., 2] = params.A * np.cos(tau)
    return out


def drive_field_rwa(params: DriveParams, tau):
    tau = np.asarray(tau, dtype=float)
    out = np.zeros(tau.shape + (3,))
    out[..., 1] = params.A / 2 * np.sin(tau)
    out[..., 2] = params.A / 2 * np.cos(tau)
    return out


def hamiltonian(params: DriveParams, tau):
    """``A cos(tau) sigma_z + (Delta/2) sigma_x``."""
    return from_pauli_vector(drive_field(params, tau))


def hamiltonian_rwa(params: DriveParams, tau):
    """Rotating-field form of the drive, ``(A/2)[cos(tau) sigma_z + sin(tau) sigma_y]``.

    Only the drive is rotated; the static gap term is not part of this operator.
    """
    return from_pauli_vector(drive_field_rwa(params, tau))


def lzs_parameter(params: DriveParams):
    """Landau-Zener probability ``1 - exp(-pi Delta^2 / (2A))`` at the maximal sweep rate."""
    if params.A <= 0:
        raise DomainError("the LZS parameter needs a non-zero sweep rate (A > 0)")
    return -np.expm1(-np.pi * params.Delta**2 / (2 * params.A))


def rabi_frequency(params: DriveParams):
    return float(np.hypot(params.A, 1 - params.Delta))


def fold_quasienergy(eps, edge_tol=1e-10):
    """Map quasi-energies into the zone (-1/2, 1/2].

    Values within ``edge_tol`` of the lower edge go to +1/2 so that rounding
    noise cannot split a zone-edge pair.
    """
    eps = np.asarray(eps, dtype=float)
    return eps - np.ceil(eps - 0.5 - edge_tol)


def normalized(psi):
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    return psi / norm


@dataclass(frozen=True)
class DensityMatrix2:
    """Unit-trace positive 2x2 density matrix tagged with its basis.

    ``basis`` is ``"sz"`` for the (|+>, |->) basis or ``"floquet"`` for the
    Floquet modes at ``tau = 0``.
    """

    matrix: np.ndarray
    basis: str = "sz"

    def __post_init__(self):
        rho = np.array(self.matrix, dtype=complex)
        if rho.shape != (2, 2):
            raise ValueError("density matrix must be 2x2")
        if self.basis not in ("sz", "floquet"):
            raise ValueError(f"unknown basis tag {self.basis!r}")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > 1e-12:
            raise ValueError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(rho).min() < -1e-10:
            raise ValueError("density matrix is not positive semidefinite")
        rho.flags.writeable = False
        object.__setattr__(self, "matrix", rho)

    @classmethod
    def pure(cls, psi, basis="sz"):
        psi = normalized(psi)
        return cls(np.outer(psi, psi.conj()), basis)

    @classmethod
    def from_bloch(cls, r, basis="sz"):
        r = np.asarray(r, dtype=float)
        if np.linalg.norm(r) > 1 + 1e-12:
            raise ValueError("Bloch vector longer than 1")
        return cls((IDENTITY + from_pauli_vector(r)) / 2, basis)

    def expectation(self, op):
        return float(np.real(np.trace(self.matrix @ op)))
