"""Secular rate coefficients, reduced dynamics in the Floquet basis and observables.

Rates are keyed on the Bohr frequency of each Floquet channel: the harmonic
``<<r'|S|r>>_n`` drives the jump ``|u_r> -> |u_r'>`` at frequency
``eps_r - eps_r' + n`` and contributes only where that frequency is positive.
Naming follows the Pauli equation

    d p11/dtau = p22 (G21 + Gp12) - p11 (G12 + Gp21),

so ``G12 + Gp21`` is the total 1 -> 2 rate.  ``kappa`` enters once, through the
bath spectral functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bath import BathSpec, gamma, gamma_prime
from .core import SIGMA_Z, DensityMatrix2, DriveParams, coupling_operator
from .floquet import (
    DegenerateError,
    FloquetSolution,
    FourierTable,
    TruncationError,
    floquet_solve,
    fourier_components,
)

CONVERGENCE_TOL = 1e-12


class DecoupledError(RuntimeError):
    """Both transition rates vanish, so there is no unique quasistationary state."""


class ModelError(ValueError):
    """Rate input that would make the reduced dynamics unphysical."""


@dataclass(frozen=True)
class RateSet:
    G11: float
    G22: float
    G12: float
    G21: float
    G3: complex
    Gp11: float
    Gp22: float
    Gp12: float
    Gp21: float
    Gp3: complex
    n_cut: int = 0
    tail: float = 0.0

    @property
    def up(self):
        """Total rate of ``|u_1> -> |u_2>`` transitions."""
        return self.G12 + self.Gp21

    @property
    def down(self):
        """Total rate of ``|u_2> -> |u_1>`` transitions."""
        return self.G21 + self.Gp12

    @property
    def relaxation_rate(self):
        return self.up + self.down

    @property
    def coherence_rate(self):
        """Complex decay constant of the Floquet-basis coherence ``rho_12``."""
        return 0.5 * (
            self.G11 + self.G22 + self.G12 + self.G21 - 2 * self.G3
            + self.Gp11 + self.Gp22 + self.Gp12 + self.Gp21 - 2 * self.Gp3
        )

    def scaled(self, factor):
        names = ("G11", "G22", "G12", "G21", "G3", "Gp11", "Gp22", "Gp12", "Gp21", "Gp3")
        return RateSet(*(factor * getattr(self, k) for k in names), n_cut=self.n_cut, tail=self.tail)


def _ladder(bath, freq, weight, spectral):
    """Sum ``spectral(freq) * weight`` over positive ``freq``; also return the terms."""
    keep = freq > 0
    terms = np.zeros(len(freq), dtype=complex)
    if np.any(keep):
        terms[keep] = spectral(bath, freq[keep]) * weight[keep]
    return terms.sum(), terms


def rate_set(table: FourierTable, sol: FloquetSolution, bath: BathSpec, convergence_tol=CONVERGENCE_TOL):
    """Secular rate coefficients from a Fourier table of the coupling operator."""
    if sol.degenerate:
        raise DegenerateError("secular approximation invalid: quasi-energies are degenerate")
    return rates_from_table(table, float(sol.eps[1] - sol.eps[0]), bath, convergence_tol)


def rates_from_table(table: FourierTable, d_eps, bath: BathSpec, convergence_tol=CONVERGENCE_TOL):
    """Rate coefficients for a table whose modes are split by ``d_eps = eps_2 - eps_1``."""
    n = table.n.astype(float)
    v = table.values
    mirror = v[:, :, ::-1]  # harmonic -n at the position of n

    channels = {
        "11": (n, np.abs(v[0, 0]) ** 2),
        "22": (n, np.abs(v[1, 1]) ** 2),
        "12": (n - d_eps, np.abs(v[1, 0]) ** 2),
        "21": (n + d_eps, np.abs(v[0, 1]) ** 2),
    }
    out = {}
    all_terms = []
    for key, (freq, weight) in channels.items():
        out["G" + key], t = _ladder(bath, freq, weight, gamma)
        out["Gp" + key], tp = _ladder(bath, freq, weight, gamma_prime)
        all_terms += [t, tp]
    out["G3"], t = _ladder(bath, n, v[0, 0] * mirror[1, 1], gamma)
    out["Gp3"], tp = _ladder(bath, n, mirror[0, 0] * v[1, 1], gamma_prime)
    all_terms += [t, tp]

    terms = np.abs(np.array(all_terms))
    scale = terms.sum()
    edge = terms[:, [0, -1]].max()
    # harmonics at round-off level (|c_n|^2 ~ 1e-32) carry no information
    noise = 1e-26 * np.sum(np.abs(v) ** 2) * gamma(bath, n.max() + abs(d_eps) + 1.0)
    tail = edge / scale if scale > 0 else 0.0
    if edge > noise and tail > convergence_tol:
        raise TruncationError(f"rate series not converged at n_max={table.n_max} (last term ratio {tail:.1e})")
    fields = {k: (complex(val) if k.endswith("3") else float(np.real(val))) for k, val in out.items()}
    return RateSet(**fields, n_cut=table.n_max, tail=float(tail))


@dataclass(frozen=True)
class ReducedState:
    """Interaction-picture state in the Floquet basis: populations and coherence ``rho_12``."""

    p11: float
    p22: float
    c12: complex = 0j

    def __post_init__(self):
        if abs(self.p11 + self.p22 - 1) > 1e-12:
            raise ValueError("populations must sum to 1")
        for p in (self.p11, self.p22):
            if not -1e-10 <= p <= 1 + 1e-10:
                raise ValueError("population outside [0, 1]")
        if abs(self.c12) ** 2 > self.p11 * self.p22 + 1e-9:
            raise ValueError("coherence exceeds the positivity bound")

    @classmethod
    def from_density(cls, rho: DensityMatrix2, sol: FloquetSolution):
        """Project a state given at ``tau = 0`` onto the Floquet basis."""
        if rho.basis == "floquet":
            m = rho.matrix
        else:
            W = sol.initial_modes
            m = W.conj().T @ rho.matrix @ W
        p11 = float(np.real(m[0, 0]))
        return cls(p11, 1 - p11, complex(m[0, 1]))

    def matrix(self):
        return np.array([[self.p11, self.c12], [np.conj(self.c12), self.p22]])


@dataclass(frozen=True)
class ReducedTrajectory:
    tau: np.ndarray
    p11: np.ndarray
    c12: np.ndarray

    @property
    def p22(self):
        return 1 - self.p11

    def __len__(self):
        return len(self.tau)

    def __getitem__(self, i):
        p = float(self.p11[i])
        return ReducedState(p, 1 - p, complex(self.c12[i]))


def quasistationary(rates: RateSet, atol=1e-300):
    """Fixed point of the Pauli equation (diagonal in the Floquet basis)."""
    down, up = rates.down, rates.up
    if down <= atol and up <= atol:
        raise DecoupledError("dynamics-decoupled: both transition rates vanish")
    p11 = down / (down + up)
    return ReducedState(p11, 1 - p11, 0j)


def evolve_reduced(initial: ReducedState, rates: RateSet, tau_grid):
    """Closed-form solution of the population and coherence equations."""
    tau = np.asarray(tau_grid, dtype=float)
    if np.any(np.diff(tau) < 0):
        raise ValueError("tau_grid must be increasing")
    lam = rates.coherence_rate
    if not np.isfinite(lam) or lam.real < -1e-15 * max(abs(lam), 1):
        raise ModelError("coherence decay constant has negative real part")
    total = rates.relaxation_rate
    if total > 0:
        p_inf = quasistationary(rates).p11
        p11 = p_inf + (initial.p11 - p_inf) * np.exp(-total * tau)
    else:
        p11 = np.full(tau.shape, initial.p11)
    c12 = initial.c12 * np.exp(-lam * tau)
    return ReducedTrajectory(tau, p11, c12)


def decoherence_time(rates: RateSet):
    """``Re(1/lambda)`` for the coherence decay constant; ``inf`` without decoherence."""
    lam = rates.coherence_rate
    if lam == 0:
        return math.inf
    return float(np.real(1 / lam))


def _matrix_elements(sol, tau, op):
    u = sol.modes_at(tau)
    return np.einsum("atx,xy,bty->abt", u.conj(), op, u)


def expectation(trajectory: ReducedTrajectory, sol: FloquetSolution, op=SIGMA_Z, tau=None):
    """Schrodinger-picture ``Tr(rho_s(tau) op)`` along a Floquet-basis trajectory."""
    tau = trajectory.tau if tau is None else np.asarray(tau, dtype=float)
    el = _matrix_elements(sol, tau, op)
    phase = np.exp(-1j * (sol.eps[0] - sol.eps[1]) * tau)
    val = (
        trajectory.p11 * el[0, 0]
        + trajectory.p22 * el[1, 1]
        + 2 * np.real(trajectory.c12 * phase * el[1, 0])
    )
    return np.real(val)


def sigma_z_expectation(trajectory: ReducedTrajectory, sol: FloquetSolution, tau_grid=None):
    """``<sigma_z>(tau)`` reconstructed from the Floquet-basis state and the modes."""
    if tau_grid is not None and len(tau_grid) != len(trajectory):
        raise ValueError("tau_grid and trajectory lengths differ")
    return expectation(trajectory, sol, SIGMA_Z, tau_grid)


def schrodinger_density(trajectory: ReducedTrajectory, sol: FloquetSolution):
    """Full ``rho_s(tau)`` in the sigma_z basis, shape ``(len(tau), 2, 2)``."""
    tau = trajectory.tau
    u = sol.modes_at(tau)
    phase = np.exp(-1j * (sol.eps[0] - sol.eps[1]) * tau)
    a = u[0][:, :, None] * u[0].conj()[:, None, :]
    b = u[1][:, :, None] * u[1].conj()[:, None, :]
    c = (trajectory.c12 * phase)[:, None, None] * u[0][:, :, None] * u[1].conj()[:, None, :]
    return trajectory.p11[:, None, None] * a + trajectory.p22[:, None, None] * b + c + np.conj(np.swapaxes(c, 1, 2))


def solve_rates(A, Delta, bath: BathSpec, S="sz", n_samples=None):
    """Floquet solution, full-resolution Fourier table and rates for one drive setting."""
    sol = floquet_solve(DriveParams(A, Delta), n_samples=n_samples)
    if sol.degenerate:
        raise DegenerateError(f"degenerate quasi-energies at A={A}, Delta={Delta}")
    table = fourier_components(sol, S, n_max=sol.n_samples // 2 - 1)
    return sol, table, rate_set(table, sol, bath)


def _qs_point(args):
    A, Delta, bath, S, tau_eval = args
    try:
        sol, _, rates = solve_rates(A, Delta, bath, S)
        state = quasistationary(rates)
    except (DegenerateError, DecoupledError, TruncationError) as exc:
        return np.nan, f"{type(exc).__name__}: {exc}"
    traj = ReducedTrajectory(np.array([tau_eval]), np.array([state.p11]), np.array([0j]))
    return float(sigma_z_expectation(traj, sol)[0]), ""


def quasistationary_scan(Delta, A_grid, bath: BathSpec, S="sz", tau_eval=0.0, workers=None):
    """Quasistationary ``<sigma_z>`` at ``tau_eval`` across drive amplitudes.

    Returns ``(values, notes)``; failed points are NaN with the reason in ``notes``.
    """
    S = coupling_operator(S)
    jobs = [(float(a), float(Delta), bath, S, float(tau_eval)) for a in np.asarray(A_grid, dtype=float)]
    if workers and workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            out = list(pool.map(_qs_point, jobs))
    else:
        out = [_qs_point(j) for j in jobs]
    return np.array([v for v, _ in out]), [m for _, m in out]
