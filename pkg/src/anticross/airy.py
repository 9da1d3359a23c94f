"""Large-amplitude approximation of the Floquet modes by Airy functions.

For ``A >> Delta`` the harmonics of the modes are, to zeroth order in
``Delta/A``, Airy functions centred on the turning points ``n = +-A``.  The
components here use the same ``exp(+i n tau)`` transform as
:func:`anticross.floquet.fourier_components`, in which the |+> amplitude of a
mode driven by ``A cos(tau) sigma_z`` sits at positive harmonics:

    <+|u1>_n = N Ai(alpha (n - A)),   <-|u1>_n = N Ai(-alpha (n + A)),
    <+|u2>_n = <-|u1>_n,              <-|u2>_n = -<+|u1>_n,

with ``alpha = (2/A)**(1/3)``.  The oscillatory side of each Airy function is
cut off smoothly beyond the opposite turning point.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.special

from .bath import BathSpec
from .core import coupling_label, coupling_operator
from .floquet import FourierTable
from .master import rates_from_table

AIRY_OVERFLOW = 105.0
_DECAY_REACH = 26.0  # Ai(26) ~ 1e-39
_DAMP_REACH = 5.0  # exp(-5**3 / 3) ~ 1e-18
_MAX_INTEGER_SUM = 20_000_000


def airy_ai(x):
    """Airy function Ai on the real line; zero beyond ``x > 105`` where it underflows."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("airy_ai needs finite arguments")
    out = scipy.special.airy(np.minimum(x, AIRY_OVERFLOW))[0]
    return np.where(x > AIRY_OVERFLOW, 0.0, out)


def _damping(x):
    """Smooth cut-off: 1 for ``x <= 0``, ``exp(-x**3/3)`` beyond."""
    xp = np.maximum(x, 0.0)
    return np.exp(-(xp**3) / 3)


def _plus_profile(A, n, damp):
    """Unnormalised ``<+|u1>_n``."""
    alpha = (2 / A) ** (1 / 3)
    vals = airy_ai(alpha * (n - A))
    if damp:
        vals = vals * _damping(alpha * (-A - n))
    return vals


def _support(A):
    reach = (A / 2) ** (1 / 3)
    return -A - _DAMP_REACH * reach, A + _DECAY_REACH * reach


def _plus_norm_sq(A, damp):
    """``sum_n |<+|u1>_n|^2`` over all integers, without the N factor."""
    lo, hi = _support(A)
    if not damp:
        raise ValueError("without damping the Airy tail is not normalisable")
    if hi - lo <= _MAX_INTEGER_SUM:
        n = np.arange(np.floor(lo), np.ceil(hi) + 1)
        return float(np.sum(_plus_profile(A, n, damp) ** 2))
    # profile varies on the scale (A/2)**(1/3) >> 1, where the sum equals the integral
    alpha = (2 / A) ** (1 / 3)
    f = lambda x: (airy_ai(x) * _damping(-2 * alpha * A - x)) ** 2  # noqa: E731
    x_lo, x_hi = alpha * (lo - A), _DECAY_REACH
    pts = np.linspace(x_lo, x_hi, 2001)
    total = sum(scipy.integrate.quad(f, a, b, limit=200)[0] for a, b in zip(pts[:-1], pts[1:]))
    return total / alpha


@dataclass(frozen=True)
class AiryModeTable:
    """Zero-order Airy harmonics of the two Floquet modes on a grid of ``n``."""

    A: float
    n: np.ndarray
    plus1: np.ndarray
    minus1: np.ndarray
    norm: float
    damped: bool = True

    @property
    def plus2(self):
        return self.minus1

    @property
    def minus2(self):
        return -self.plus1

    @property
    def norm_plus(self):
        return self.norm

    @property
    def norm_minus(self):
        return self.norm

    def components(self):
        """Array ``[r, s, j]``: spin component ``s`` (+, -) of mode ``r`` at ``n[j]``."""
        return np.array([[self.plus1, self.minus1], [self.plus2, self.minus2]])

    def total_weight(self):
        return float(np.sum(self.plus1**2 + self.minus1**2))

    def _integer_offsets(self):
        n = np.asarray(self.n)
        if not np.allclose(n, np.rint(n)) or np.any(np.diff(n) != 1):
            raise ValueError("this operation needs a contiguous integer grid")
        return np.rint(n).astype(int)

    def mode_samples(self, n_samples=None):
        """Synthesise ``|u_r(tau_k)>`` on ``tau_k = 2 pi k / n_samples``, shape ``(2, n_samples, 2)``."""
        n = self._integer_offsets()
        span = n.max() - n.min() + 1
        if n_samples is None:
            n_samples = 256
            while n_samples < 2 * span:
                n_samples *= 2
        if n_samples < span:
            raise ValueError("n_samples must exceed the number of harmonics")
        grid = np.zeros((2, 2, n_samples), dtype=complex)
        grid[:, :, n % n_samples] = self.components()
        # u(tau) = sum_n a_n exp(-i n tau)
        return np.transpose(np.fft.fft(grid, axis=-1), (0, 2, 1))

    def fourier_table(self, S="sz", n_max=None):
        """Harmonics ``<<r'|S|r>>_n`` of the Airy modes, compatible with :class:`FourierTable`."""
        op = coupling_operator(S)
        n = self._integer_offsets()
        span = n.max() - n.min() + 1
        n_samples = 256
        while n_samples < 2 * span + 2:
            n_samples *= 2
        modes = self.mode_samples(n_samples)
        elements = np.einsum("akx,xy,bky->abk", modes.conj(), op, modes)
        spectra = np.fft.ifft(elements, axis=-1)
        if n_max is None:
            n_max = min(span, n_samples // 2 - 1)
        idx = np.arange(-n_max, n_max + 1) % n_samples
        return FourierTable(spectra[:, :, idx], int(n_max), coupling_label(op))


def default_grid(A):
    lo, hi = _support(A)
    return np.arange(np.floor(lo), np.ceil(hi) + 1)


def airy_fourier_components(A, n_grid=None, damp=True):
    """Normalised zero-order Airy table on ``n_grid`` (integers covering the support by default).

    The grid may be coarse or non-integer; the normalisation constant is the
    one for the full integer lattice, so shared grid points always carry the
    same values.
    """
    if not A > 0:
        raise ValueError("A must be positive")
    n = default_grid(A) if n_grid is None else np.asarray(n_grid, dtype=float)
    norm = 1 / np.sqrt(2 * _plus_norm_sq(A, damp))
    plus = norm * _plus_profile(A, n, damp)
    minus = plus_at(A, -n, damp, norm)
    lo, hi = _support(A)
    if n_grid is not None and (n.min() > lo or n.max() < hi):
        raise ValueError(f"n_grid must cover the support [{lo:.1f}, {hi:.1f}] for a normalised table")
    return AiryModeTable(float(A), n, plus, minus, float(norm), damp)


def plus_at(A, n, damp, norm):
    return norm * _plus_profile(A, np.asarray(n, dtype=float), damp)


def airy_rates(A, bath: BathSpec, S="sz", eps_gap=0.0):
    """Rate coefficients from the Airy modes; ``eps_gap`` is the assumed quasi-energy splitting."""
    table = airy_fourier_components(A).fourier_table(S)
    return rates_from_table(table, eps_gap, bath, convergence_tol=1e-9)


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    prefactor: float
    residual: float
    A: np.ndarray
    values: np.ndarray


def fit_power_law(A, values, residual_tol=0.05, what="rate"):
    A = np.asarray(A, dtype=float)
    values = np.asarray(values, dtype=float)
    ok = np.isfinite(values) & (values > 0)
    if ok.sum() < 2:
        raise ValueError("need at least two positive values to fit a power law")
    coef, res, *_ = np.polyfit(np.log(A[ok]), np.log(values[ok]), 1, full=True)
    residual = float(np.sqrt(res[0] / ok.sum())) if len(res) else 0.0
    if residual > residual_tol:
        warnings.warn(f"{what} deviates from a power law (rms log residual {residual:.3f})", RuntimeWarning, stacklevel=3)
    return ScalingFit(float(coef[0]), float(np.exp(coef[1])), residual, A, values)


def rate_scaling_high_T(A_grid, bath: BathSpec, S="sz", which="G12", eps_gap=0.0):
    """Power-law fit ``Gamma(A) ~ prefactor * A**exponent`` of Airy-based rates."""
    values = [getattr(airy_rates(a, bath, S, eps_gap), which) for a in A_grid]
    return fit_power_law(A_grid, values, what=which)
