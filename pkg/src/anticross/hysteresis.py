"""Magnetisation curves <sigma_z> versus the driving field F = A cos(tau)."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .bath import BathSpec
from .core import DensityMatrix2, DriveParams
from .floquet import TWO_PI, floquet_solve
from .master import (
    RateSet,
    ReducedState,
    ReducedTrajectory,
    decoherence_time,
    evolve_reduced,
    quasistationary,
    sigma_z_expectation,
    solve_rates,
)

MODES = ("quasistationary", "transient", "dephasing-ladder")

# physical constants (CODATA 2018)
HBAR = 1.054571817e-34
K_B = 1.380649e-23
MU_B = 9.2740100783e-24


@dataclass(frozen=True)
class HysteresisCurve:
    """Ordered samples ``(F, <sigma_z>, tau)`` of a magnetisation curve.

    ``series`` holds optional extra per-sample columns, e.g. the populations
    and pointer-state polarisation of a ladder run.
    """

    F: np.ndarray
    sz: np.ndarray
    tau: np.ndarray
    mode: str
    params: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not (len(self.F) == len(self.sz) == len(self.tau)):
            raise ValueError("F, sz and tau must have equal length")
        if np.any(np.abs(self.sz) > 1 + 1e-9):
            raise ValueError("|<sigma_z>| exceeds 1")
        if np.any(np.diff(self.tau) <= 0):
            raise ValueError("tau must be strictly increasing")
        if any(len(v) != len(self.tau) for v in self.series.values()):
            raise ValueError("extra series must match the number of samples")

    @property
    def points(self):
        return np.column_stack([self.F, self.sz, self.tau])

    def __len__(self):
        return len(self.tau)

    def vertical_extent(self):
        return float(np.max(self.sz) - np.min(self.sz))

    def closure_error(self):
        return float(abs(self.sz[-1] - self.sz[0]))

    def n_extrema(self, rtol=1e-9):
        """Number of strict local extrema of ``<sigma_z>`` along the (periodic) loop."""
        s = self.sz[:-1] if self.mode == "quasistationary" else self.sz
        d = np.diff(np.concatenate([s, s[:1]]) if self.mode == "quasistationary" else s)
        d = d[np.abs(d) > rtol * max(np.max(np.abs(s)), 1e-300)]
        return int(np.count_nonzero(np.diff(np.sign(d)) != 0))


def _period_grid(n_periods, samples_per_period):
    if samples_per_period < 4:
        raise ValueError("samples_per_period must be at least 4")
    k = np.arange(int(round(n_periods * samples_per_period)) + 1)
    return TWO_PI * k / samples_per_period


def _snapshot(params: DriveParams, bath: BathSpec, S, **extra):
    label = S if isinstance(S, str) else "custom"
    return {"A": params.A, "Delta": params.Delta, "theta": bath.theta, "kappa": bath.kappa, "S": label, **extra}


def quasistationary_curve(params: DriveParams, bath: BathSpec, S="sz", samples_per_period=256):
    """Closed loop traced by the quasistationary (Floquet-diagonal) state over one period."""
    sol, _, rates = solve_rates(params.A, params.Delta, bath, S)
    state = quasistationary(rates)
    tau = _period_grid(1, samples_per_period)
    traj = ReducedTrajectory(tau, np.full(tau.shape, state.p11), np.zeros(tau.shape, complex))
    sz = sigma_z_expectation(traj, sol)
    return HysteresisCurve(
        params.A * np.cos(tau), sz, tau, "quasistationary", _snapshot(params, bath, S, p11=state.p11)
    )


def transient_curve(
    params: DriveParams, bath: BathSpec, S="sz", initial: DensityMatrix2 | None = None, n_periods=10,
    samples_per_period=128,
):
    """Path from an initial state (``|-><-|`` by default) towards the quasistationary loop."""
    if n_periods < 1:
        raise ValueError("n_periods must be at least 1")
    if initial is None:
        initial = DensityMatrix2.pure([0, 1])
    sol, _, rates = solve_rates(params.A, params.Delta, bath, S)
    start = ReducedState.from_density(initial, sol)
    tau = _period_grid(n_periods, samples_per_period)
    traj = evolve_reduced(start, rates, tau)
    sz = sigma_z_expectation(traj, sol)
    meta = _snapshot(params, bath, S, n_periods=n_periods, tau_d=decoherence_time(rates))
    return HysteresisCurve(params.A * np.cos(tau), sz, tau, "transient", meta)


def distance_to_loop(curve: HysteresisCurve, loop: HysteresisCurve):
    """Per-period maximum of ``|<sigma_z> - loop|`` at equal phase, for loops sharing the sample grid."""
    spp = len(loop) - 1
    ref = loop.sz[:-1]
    n_full = (len(curve) - 1) // spp
    out = []
    for p in range(n_full):
        seg = curve.sz[p * spp : (p + 1) * spp]
        out.append(float(np.max(np.abs(seg - ref))))
    return np.array(out)


# --- dephasing ladder -------------------------------------------------------------------------

@dataclass(frozen=True)
class LadderPreset:
    """Physical description of one level crossing of a large-spin molecule under a slow AC field."""

    name: str
    field_amplitude: float  # T
    resonance_field: float  # T
    omega: float  # rad/s
    tunnel_splitting: float  # K
    delta_m: float  # change of the spin projection between the crossing levels
    g: float = 2.0
    temperature: float = 0.25  # K

    @property
    def A(self):
        return self.g * MU_B * self.delta_m * self.field_amplitude / (2 * HBAR * self.omega)

    @property
    def Delta(self):
        return K_B * self.tunnel_splitting / (HBAR * self.omega)

    @property
    def theta(self):
        return K_B * self.temperature / (HBAR * self.omega)

    def field_tesla(self, F):
        return self.resonance_field + self.field_amplitude * np.asarray(F) / self.A


PRESETS = {
    "mn12-seventh-resonance": LadderPreset(
        name="mn12-seventh-resonance",
        field_amplitude=0.25,
        resonance_field=3.67,
        omega=0.1,
        tunnel_splitting=7e-7,
        delta_m=13,
    ),
}

SURROGATE_AMPLITUDE = 256.0


def surrogate_drive(A, Delta, surrogate_amplitude=SURROGATE_AMPLITUDE):
    """Smaller drive with the same Landau-Zener adiabaticity ``Delta**2 / A``."""
    if A <= surrogate_amplitude:
        return DriveParams(A, Delta)
    return DriveParams(surrogate_amplitude, Delta * math.sqrt(surrogate_amplitude / A))


def dephasing_ladder(
    A, Delta, Gamma12, Omega, n_periods=10, initial=None, samples_per_period=512,
    surrogate_amplitude=SURROGATE_AMPLITUDE,
):
    """Pauli-only dynamics (coherences pinned to zero) in the high-temperature limit.

    ``Gamma12`` is a physical rate in 1/s and ``Omega`` the drive frequency in
    rad/s.  At high temperature all four transition channels carry the same
    rate, so both populations leave at ``2 Gamma12 / Omega`` per unit of
    ``tau`` and relax towards equal occupation.  ``initial`` gives the
    populations ``(p1, p2)``; by default the state ``|->`` at ``tau = 0`` is
    dephased into the Floquet basis.

    Besides ``<sigma_z>`` the curve carries the series ``p1`` (population of
    ``|u_1>``) and ``pointer_sz`` (``<u_1|sigma_z|u_1>``), so that
    ``sz = (2 p1 - 1) pointer_sz``.

    Pointer states come from an exact Floquet solution at a reduced amplitude
    with the same ``Delta**2 / A``, which keeps the transition probability per
    crossing while making the solve cheap.
    """
    if Gamma12 < 0 or Omega <= 0:
        raise ValueError("Gamma12 must be non-negative and Omega positive")
    if not (A > 10 * Delta and Delta > 1):
        warnings.warn("dephasing ladder expects A >> Delta >> 1", RuntimeWarning, stacklevel=2)
    drive = surrogate_drive(A, Delta, surrogate_amplitude)
    N = 256
    while N < max(samples_per_period, 4 * (drive.A + drive.Delta) + 128):
        N *= 2
    sol = floquet_solve(drive, n_samples=N)
    if initial is None:
        start = ReducedState.from_density(DensityMatrix2.pure([0, 1]), sol)
        p1 = start.p11
    else:
        p1 = float(initial[0])
        if abs(p1 + float(initial[1]) - 1) > 1e-12:
            raise ValueError("initial populations must sum to 1")
    g = Gamma12 / Omega
    rates = RateSet(0.0, 0.0, g, g, 0j, 0.0, 0.0, g, g, 0j)
    tau = _period_grid(n_periods, samples_per_period)
    traj = evolve_reduced(ReducedState(p1, 1 - p1), rates, tau)
    traj = ReducedTrajectory(tau, traj.p11, np.zeros(tau.shape, complex))
    sz = sigma_z_expectation(traj, sol)
    pure = ReducedTrajectory(tau, np.ones(tau.shape), np.zeros(tau.shape, complex))
    pointer = sigma_z_expectation(pure, sol)
    meta = {
        "A": float(A), "Delta": float(Delta), "Gamma12": float(Gamma12), "Omega": float(Omega),
        "n_periods": n_periods, "surrogate_A": drive.A, "surrogate_Delta": drive.Delta, "p1_initial": p1,
    }
    series = {"p1": traj.p11, "pointer_sz": pointer}
    return HysteresisCurve(A * np.cos(tau), sz, tau, "dephasing-ladder", meta, series)


def ladder_preset(name, Gamma12, n_periods=10, samples_per_period=512):
    """:func:`dephasing_ladder` for a named preset, e.g. ``"mn12-seventh-resonance"``."""
    try:
        p = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    curve = dephasing_ladder(p.A, p.Delta, Gamma12, p.omega, n_periods, samples_per_period=samples_per_period)
    return HysteresisCurve(curve.F, curve.sz, curve.tau, curve.mode, {**curve.params, "preset": name}, curve.series)


def crossing_jumps(curve: HysteresisCurve, descending=True, window=np.pi / 16):
    """``<sigma_z>`` jumps across the field zeros, for falling (or rising) field.

    Zeros of ``F`` sit at ``tau = pi/2 + m pi``; the jump is the change of
    ``<sigma_z>`` between ``tau0 - window`` and ``tau0 + window``, wide enough to
    contain the Landau-Zener transition region of the pointer states.
    """
    tau = curve.tau
    out = []
    m = 0
    while True:
        t0 = np.pi / 2 + m * np.pi
        if t0 + window > tau[-1]:
            break
        if (m % 2 == 0) == descending:
            before, after = np.interp([t0 - window, t0 + window], tau, curve.sz)
            out.append(float(after - before))
        m += 1
    return np.array(out)


def count_steps(curve: HysteresisCurve, rel_threshold=0.01, descending=True):
    """Number of visible steps on the falling-field (or rising) half-cycles of a run.

    Each field zero produces a jump in ``<sigma_z>``; successive falling
    half-cycles stack these into a ladder.  A step counts when its height is at
    least ``rel_threshold`` of the largest ``|<sigma_z>|`` on the curve.
    """
    jumps = np.abs(crossing_jumps(curve, descending))
    scale = np.max(np.abs(curve.sz))
    if len(jumps) == 0 or scale == 0:
        return 0
    return int(np.count_nonzero(jumps >= rel_threshold * scale))


def is_two_line_limit(curve: HysteresisCurve, tol=0.01, head=0.02):
    """Vertical drop near the starting field followed by the horizontal line ``<sigma_z> = 0``."""
    F0 = curve.F[0]
    scale = max(abs(curve.sz[0]), 1e-300)
    near_start = np.abs(curve.F - F0) <= head * abs(curve.params.get("A", F0) or 1)
    settled = np.abs(curve.sz) <= tol * scale
    first = np.argmax(settled) if settled.any() else len(curve)
    return bool(settled.any() and near_start[: first + 1].all() and settled[first:].all())


def period_count_to(curve: HysteresisCurve, loop: HysteresisCurve, tol):
    """First period whose deviation from ``loop`` is below ``tol`` (``None`` if never)."""
    d = distance_to_loop(curve, loop)
    hit = np.nonzero(d < tol)[0]
    return int(hit[0]) if len(hit) else None
