"""One-period propagation, Floquet quasi-energies/modes and their Fourier tables.

The propagator is built with a fourth-order Magnus step on a fixed grid.  For a
two-level system every step is an SU(2) rotation evaluated in closed form, so
the accumulated propagator is unitary to rounding error regardless of the step
size; the step size only controls the phase accuracy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .core import (
    IDENTITY,
    SIGMA_Z,
    DriveParams,
    coupling_label,
    coupling_operator,
    drive_field,
    fold_quasienergy,
    from_pauli_vector,
)

TWO_PI = 2 * np.pi
DEGENERACY_THRESHOLD = 1e-3
_GAUSS = math.sqrt(3) / 6


class TruncationError(RuntimeError):
    """A Fourier truncation or sampling resolution is too coarse for the requested accuracy."""


class DegenerateError(RuntimeError):
    """The quasi-energies are (nearly) degenerate, so the secular rate equations do not apply."""


def steps_per_period(params: DriveParams):
    """Default number of Magnus steps per drive period."""
    return max(4096, math.ceil(64 * (params.A + params.Delta + 1)))


def _su2_exp(k):
    """``exp(-i k.sigma)`` for an array of real 3-vectors ``k``, shape ``(..., 2, 2)``."""
    norm = np.linalg.norm(k, axis=-1)
    c = np.cos(norm)
    # sin(x)/x without the 0/0 at x = 0
    s = np.sinc(norm / np.pi)
    kx, ky, kz = (s * k[..., i] for i in range(3))
    out = np.empty(k.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = c - 1j * kz
    out[..., 0, 1] = -1j * kx - ky
    out[..., 1, 0] = -1j * kx + ky
    out[..., 1, 1] = c + 1j * kz
    return out


def magnus_steps(field_fn, t0, t1):
    """Fourth-order Magnus one-step propagators for the intervals ``[t0[i], t1[i]]``.

    ``field_fn(tau)`` returns the Pauli-vector of the Hamiltonian, shape ``(..., 3)``.
    """
    t0 = np.asarray(t0, dtype=float)
    h = np.asarray(t1, dtype=float) - t0
    a1 = field_fn(t0 + h * (0.5 - _GAUSS))
    a2 = field_fn(t0 + h * (0.5 + _GAUSS))
    k = (h / 2)[..., None] * (a1 + a2) - (_GAUSS * h**2)[..., None] * np.cross(a1, a2)
    return _su2_exp(k)


def _cumulative_product(steps):
    """Running products ``P[j] = M[j] @ ... @ M[0]`` by a log-depth scan."""
    prod = np.array(steps)
    shift = 1
    while shift < len(prod):
        prod[shift:] = prod[shift:] @ prod[:-shift]
        shift *= 2
    return prod


def propagate(params: DriveParams, tau_grid, steps=None, field_fn=None):
    """Propagators ``U(tau_k)`` solving ``i dU/dtau = H(tau) U`` with ``U(0) = 1``.

    ``tau_grid`` must start at 0 and increase strictly.  Each interval is cut
    into equal sub-steps no longer than ``2*pi/steps`` (default
    :func:`steps_per_period`).
    """
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or len(tau) == 0 or tau[0] != 0:
        raise ValueError("tau_grid must be a 1-d grid starting at 0")
    if np.any(np.diff(tau) <= 0):
        raise ValueError("tau_grid must be strictly increasing")
    if not np.all(np.isfinite(tau)):
        raise ValueError("tau_grid contains non-finite values")
    if field_fn is None:
        field_fn = lambda t: drive_field(params, t)  # noqa: E731
    if steps is None:
        steps = steps_per_period(params)
    h_max = TWO_PI / steps
    if len(tau) == 1:
        return IDENTITY[None].copy()
    counts = np.maximum(1, np.ceil(np.diff(tau) / h_max - 1e-9).astype(int))
    if np.diff(tau).min() / counts.max() < 1e-14:
        raise FloatingPointError("integration step underflow")
    edges = np.concatenate(
        [tau[i] + (tau[i + 1] - tau[i]) * np.arange(c) / c for i, c in enumerate(counts)]
        + [tau[-1:]]
    )
    prods = _cumulative_product(magnus_steps(field_fn, edges[:-1], edges[1:]))
    if not np.all(np.isfinite(prods)):
        raise FloatingPointError("non-finite propagator")
    idx = np.cumsum(counts) - 1
    return np.concatenate([IDENTITY[None], prods[idx]])


@dataclass(frozen=True)
class FloquetSolution:
    """Quasi-energies and one period of sampled Floquet modes.

    ``modes[r, k]`` is the mode ``|u_{r+1}(tau_k)>`` at ``tau_k = 2*pi*k/n_samples``;
    ``eps`` is ascending and folded into (-1/2, 1/2].
    """

    params: DriveParams
    eps: np.ndarray
    modes: np.ndarray
    monodromy: np.ndarray
    degenerate: bool
    propagators: np.ndarray = field(repr=False)

    @property
    def n_samples(self):
        return self.modes.shape[1]

    @property
    def tau(self):
        return TWO_PI * np.arange(self.n_samples) / self.n_samples

    @property
    def gap(self):
        return float(abs(self.eps[1] - self.eps[0]))

    @property
    def initial_modes(self):
        """Columns are ``|u_1(0)>`` and ``|u_2(0)>``."""
        return self.modes[:, 0, :].T

    def mode_fourier(self):
        """Fourier components ``<s|u_r>_n`` with the ``exp(+i n tau)`` transform.

        Returns ``(n, comps)`` with ``comps[r, s, j]`` belonging to harmonic ``n[j]``.
        """
        N = self.n_samples
        comps = np.fft.ifft(self.modes, axis=1)
        n = np.fft.fftfreq(N, 1 / N).astype(int)
        order = np.argsort(n)
        return n[order], np.transpose(comps[:, order, :], (0, 2, 1))

    def modes_at(self, tau):
        """Modes at arbitrary times by trigonometric interpolation, shape ``(2, len(tau), 2)``."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        N = self.n_samples
        pos = np.mod(tau, TWO_PI) * N / TWO_PI
        k = np.rint(pos)
        # allow for the rounding of tau itself on long time grids
        slack = 1e-9 + 8 * np.finfo(float).eps * np.abs(tau) * N / TWO_PI
        if np.all(np.abs(pos - k) < slack):
            return self.modes[:, k.astype(int) % N, :]
        n, comps = self.mode_fourier()
        # symmetric treatment of the Nyquist harmonic keeps real signals real
        weights = np.ones(len(n))
        if N % 2 == 0:
            weights[n == -N // 2] = 0.5
            n = np.concatenate([n, [N // 2]])
            comps = np.concatenate([comps, comps[:, :, :1]], axis=2)
            weights = np.concatenate([weights, [0.5]])
        out = np.empty((2, len(tau), 2), dtype=complex)
        reduced = np.mod(tau, TWO_PI)
        for start in range(0, len(tau), 4096):
            block = slice(start, start + 4096)
            phase = np.exp(-1j * np.outer(reduced[block], n)) * weights
            out[:, block, :] = np.einsum("tn,rsn->rts", phase, comps)
        return out

    def regauge(self, shifts):
        """Shift ``eps_r`` by integers ``shifts[r]``, compensating the mode phase.

        The result describes the same physics; it exists mainly to test gauge
        independence of derived quantities.
        """
        shifts = np.asarray(shifts, dtype=int)
        phase = np.exp(1j * np.outer(shifts, self.tau))
        return replace(self, eps=self.eps + shifts, modes=self.modes * phase[:, :, None])


def _phase_fix(vec):
    mags = np.abs(vec)
    j = 0 if mags[0] >= mags[1] - 1e-12 else 1
    return vec * np.exp(-1j * np.angle(vec[j]))


def floquet_solve(params: DriveParams, n_samples=None, degeneracy_threshold=DEGENERACY_THRESHOLD, steps=None):
    """Diagonalise the one-period propagator and sample the periodic modes.

    ``n_samples`` must be a power of two of at least 256; by default it is the
    smallest one that resolves harmonics up to roughly ``2A``.
    """
    if n_samples is None:
        n_samples = 256
        while n_samples < 4 * (params.A + params.Delta) + 128:
            n_samples *= 2
    if n_samples < 256 or n_samples & (n_samples - 1):
        raise ValueError("n_samples must be a power of two >= 256")
    if steps is None:
        steps = steps_per_period(params)
    sub = math.ceil(steps / n_samples)
    tau = TWO_PI * np.arange(n_samples * sub + 1) / (n_samples * sub)
    U = propagate(params, tau, steps=n_samples * sub)
    samples = U[:-1:sub]
    mono = U[-1]

    H = from_pauli_vector(drive_field(params, tau[:-1:sub]))
    mean_energy = np.einsum("kji,kjl,klm->im", samples.conj(), H, samples) / n_samples
    mean_energy = (mean_energy + mean_energy.conj().T) / 2

    T, Z = scipy.linalg.schur(mono, output="complex")
    lam = np.diag(T)
    if abs(lam[0] - lam[1]) < 1e-7:
        # any basis diagonalises a multiple of the identity; take the eigenbasis
        # of the period-averaged energy so the choice is deterministic
        _, Z = np.linalg.eigh(mean_energy)
        lam = np.einsum("ir,ij,jr->r", Z.conj(), mono, Z)
    eps = fold_quasienergy(-np.angle(lam) / TWO_PI)

    # ascending eps; ties by <sigma_z> descending, then by mean energy
    vecs = [_phase_fix(Z[:, r]) for r in range(2)]
    tie = abs(eps[0] - eps[1]) < 1e-9
    keys = []
    for r, v in enumerate(vecs):
        sz = float(np.real(v.conj() @ SIGMA_Z @ v))
        energy = float(np.real(v.conj() @ mean_energy @ v))
        keys.append((0.0 if tie else eps[r], -round(sz, 9), energy))
    order = sorted(range(2), key=lambda r: keys[r])
    eps = eps[order]
    phi = np.array([vecs[r] for r in order])

    phase = np.exp(1j * np.outer(eps, tau[:-1:sub]))
    modes = phase[:, :, None] * np.einsum("kij,rj->rki", samples, phi)

    gap = abs(eps[1] - eps[0])
    degenerate = bool(gap < degeneracy_threshold or abs(gap - 1) < degeneracy_threshold)
    return FloquetSolution(params, eps, modes, mono, degenerate, samples)


@dataclass(frozen=True)
class FourierTable:
    """Harmonics ``<<r'|S|r>>_n`` of a coupling operator between Floquet modes.

    ``values[r', r, n + n_max]`` with 0-based mode indices; :meth:`element`
    takes the 1-based labels used in the physics notation.
    """

    values: np.ndarray
    n_max: int
    coupling: str

    @property
    def n(self):
        return np.arange(-self.n_max, self.n_max + 1)

    def element(self, rp, r, n):
        if abs(n) > self.n_max:
            return 0j
        return complex(self.values[rp - 1, r - 1, n + self.n_max])

    def power(self, rp, r):
        return float(np.sum(np.abs(self.values[rp - 1, r - 1]) ** 2))


def _auto_n_max(spectra, tail_tol, cap):
    """Smallest n_max whose tail beyond it carries less than ``tail_tol`` of the power."""
    N = spectra.shape[-1]
    freqs = np.abs(np.fft.fftfreq(N, 1 / N)).astype(int)
    power = np.zeros(N // 2 + 1)
    np.add.at(power, freqs, np.sum(np.abs(spectra) ** 2, axis=(0, 1)))
    total = power.sum()
    if total == 0:
        return 1
    tail = total - np.cumsum(power)
    ok = np.nonzero(tail <= tail_tol * total)[0]
    return int(min(max(ok[0], 1), cap)) if len(ok) else cap


def fourier_components(sol: FloquetSolution, S="sz", n_max=None, tail_tol=1e-10, allow_degenerate=False):
    """Fourier table of ``S`` between the Floquet modes of ``sol``.

    ``<<r'|S|r>>_n = (1/2pi) int exp(i n tau) <u_r'(tau)|S|u_r(tau)> dtau``
    evaluated by FFT of the sampled modes.
    """
    if sol.degenerate and not allow_degenerate:
        raise DegenerateError("quasi-energies are degenerate; pass allow_degenerate=True to override")
    op = coupling_operator(S)
    N = sol.n_samples
    cap = N // 2 - 1
    elements = np.einsum("akx,xy,bky->abk", sol.modes.conj(), op, sol.modes)
    spectra = np.fft.ifft(elements, axis=-1)
    if n_max is None:
        n_max = _auto_n_max(spectra, tail_tol, cap)
    if n_max > cap:
        raise ValueError(f"n_max must not exceed {cap} for {N} samples")
    idx = np.arange(-n_max, n_max + 1) % N
    values = spectra[:, :, idx]

    mean_sq = np.mean(np.abs(elements) ** 2, axis=-1)
    kept = np.sum(np.abs(values) ** 2, axis=-1)
    scale = max(mean_sq.max(), 1e-300)
    if np.any(np.abs(kept - mean_sq) > 1e-6 * np.maximum(mean_sq, 1e-12 * scale)):
        raise TruncationError("Fourier table misses more than 1e-6 of the power; raise n_max or n_samples")
    return FourierTable(values, int(n_max), coupling_label(op))


def _solve_point(args):
    A, Delta, kw = args
    try:
        sol = floquet_solve(DriveParams(A, Delta), **kw)
    except ValueError:  # identically vanishing Hamiltonian
        return np.nan, True
    return sol.gap, sol.degenerate


def quasienergy_map(A_grid, Delta_grid, workers=None, **kw):
    """``|eps_2 - eps_1|`` on the grid, shape ``(len(A_grid), len(Delta_grid))``.

    Returns ``(gaps, degenerate)``; points where the Hamiltonian vanishes are NaN
    and flagged.  ``workers`` > 1 evaluates points in a process pool; results do
    not depend on it.
    """
    A_grid = np.asarray(A_grid, dtype=float)
    Delta_grid = np.asarray(Delta_grid, dtype=float)
    if not (np.all(np.isfinite(A_grid)) and np.all(np.isfinite(Delta_grid))):
        raise ValueError("grids must be finite")
    jobs = [(float(a), float(d), kw) for a in A_grid for d in Delta_grid]
    if workers and workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            out = list(pool.map(_solve_point, jobs))
    else:
        out = [_solve_point(j) for j in jobs]
    shape = (len(A_grid), len(Delta_grid))
    gaps = np.array([g for g, _ in out]).reshape(shape)
    flags = np.array([f for _, f in out]).reshape(shape)
    return gaps, flags
