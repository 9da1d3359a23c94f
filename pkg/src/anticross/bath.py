"""Thermal bosonic bath: emission and absorption spectral functions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DomainError


@dataclass(frozen=True)
class BathSpec:
    """Bath temperature ``theta = kT/(hbar Omega)`` and coupling strength ``kappa``.

    ``exponent`` is the power of the spectral density times coupling squared,
    cubic for phonon and photon baths.
    """

    theta: float = 0.0
    kappa: float = 1.0
    exponent: float = 3.0

    def __post_init__(self):
        for name in ("theta", "kappa"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise DomainError(f"{name} must be finite and non-negative, got {value!r}")


def _check(omega):
    omega = np.asarray(omega, dtype=float)
    if np.any(~(omega > 0)):
        raise DomainError("spectral functions are only defined for omega > 0")
    return omega


def gamma(bath: BathSpec, omega):
    """Emission rate ``kappa omega^3 (n(omega) + 1)``."""
    omega = _check(omega)
    base = bath.kappa * omega**bath.exponent
    if bath.theta == 0:
        return base
    with np.errstate(over="ignore"):
        return base / -np.expm1(-omega / bath.theta)


def gamma_prime(bath: BathSpec, omega):
    """Absorption rate ``kappa omega^3 n(omega)``; zero at zero temperature."""
    omega = _check(omega)
    if bath.theta == 0:
        return np.zeros_like(omega)
    with np.errstate(over="ignore"):
        return bath.kappa * omega**bath.exponent / np.expm1(omega / bath.theta)


def occupation(bath: BathSpec, omega):
    """Bose-Einstein occupation of the mode at ``omega``."""
    omega = _check(omega)
    if bath.theta == 0:
        return np.zeros_like(omega)
    with np.errstate(over="ignore"):
        return 1 / np.expm1(omega / bath.theta)
