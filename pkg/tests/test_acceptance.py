"""Acceptance criteria 1-12, each at its stated tolerance and time budget."""
import json

import numpy as np
import pytest

from anticross.airy import airy_ai, airy_fourier_components, airy_rates, rate_scaling_high_T
from anticross.bath import BathSpec, gamma
from anticross.cli import EXIT_OK, main
from anticross.core import DriveParams, fold_quasienergy, rabi_frequency
from anticross.floquet import floquet_solve
from anticross.hysteresis import count_steps, is_two_line_limit, ladder_preset, quasistationary_curve
from anticross.master import (
    RateSet,
    ReducedState,
    ReducedTrajectory,
    decoherence_time,
    evolve_reduced,
    quasistationary,
    sigma_z_expectation,
    solve_rates,
)

from oracles import airy_quadrature, rk4_reduced

criterion = pytest.mark.criterion


def _gap_vs_rabi(A, Delta):
    """Relative distance of the gap from the Rabi frequency, modulo one drive quantum."""
    p = DriveParams(A, Delta)
    gap = floquet_solve(p).gap
    rabi = rabi_frequency(p)
    return min(abs(fold_quasienergy(gap - rabi)), abs(fold_quasienergy(gap + rabi))) / rabi


@criterion(1, "RWA quasi-energy agreement")
def test_c01_weak_drive_matches_rabi(timed):
    with timed(5):
        for A in (0.01, 0.02, 0.05):
            assert _gap_vs_rabi(A, 0.5) <= 0.01


@criterion(1, "RWA quasi-energy agreement")
def test_c01_rwa_breaks_down_at_unit_drive(timed):
    with timed(5):
        d = _gap_vs_rabi(1.0, 1.0)
    assert 0.05 <= d <= 0.20, f"relative discrepancy {d:.4f}"


@criterion(2, "static-limit exactness")
def test_c02_static_limit(timed):
    with timed(1):
        for D in (0.3, 0.6, 1.7, 3.0):
            eps = floquet_solve(DriveParams(0.0, D)).eps
            expected = np.sort([fold_quasienergy(-D / 2), fold_quasienergy(D / 2)])
            assert np.abs(eps - expected).max() <= 1e-9


@criterion(3, "unitarity and orthonormality suite")
def test_c03_unitarity_orthonormality(timed):
    rng = np.random.default_rng(2024)
    with timed(60):
        for _ in range(50):
            A, D = rng.uniform(0, 20), rng.uniform(0, 3)
            sol = floquet_solve(DriveParams(A, D))
            M = sol.monodromy
            assert np.abs(M.conj().T @ M - np.eye(2)).max() <= 1e-9
            gram = np.einsum("akx,bkx->kab", sol.modes.conj(), sol.modes)
            assert np.abs(gram - np.eye(2)).max() <= 1e-8
            for r in range(2):
                end = np.exp(2j * np.pi * sol.eps[r]) * M @ sol.modes[r, 0]
                assert np.abs(end - sol.modes[r, 0]).max() <= 1e-7


@criterion(4, "rate-equation oracle equivalence")
def test_c04_closed_form_vs_integrator(timed):
    rng = np.random.default_rng(44)
    names = ("G11", "G22", "G12", "G21", "G3", "Gp11", "Gp22", "Gp12", "Gp21", "Gp3")
    tau = np.linspace(0, 4, 100)
    with timed(5):
        for _ in range(10):
            v = rng.uniform(0, 1, 8)
            G3 = np.sqrt(v[0] * v[1]) * rng.uniform(-1, 1) + 0.1j * rng.uniform(-1, 1)
            Gp3 = np.sqrt(v[4] * v[5]) * rng.uniform(-1, 1)
            r = RateSet(v[0], v[1], v[2], v[3], complex(G3), v[4], v[5], v[6], v[7], complex(Gp3))
            p = rng.uniform(0, 1)
            c = np.sqrt(p * (1 - p)) * rng.uniform(0, 1) * np.exp(2j * np.pi * rng.uniform())
            traj = evolve_reduced(ReducedState(p, 1 - p, c), r, tau)
            ref_p, ref_c = rk4_reduced(p, c, {k: getattr(r, k) for k in names}, tau, h=1e-2)
            assert np.abs(traj.p11 - ref_p).max() <= 1e-8
            assert np.abs(traj.p22 - (1 - ref_p)).max() <= 1e-8
            assert np.abs(traj.c12.real - ref_c.real).max() <= 1e-8
            assert np.abs(traj.c12.imag - ref_c.imag).max() <= 1e-8


@criterion(5, "quasistationary attractor")
@pytest.mark.parametrize("theta", [1.0, 600.0])
def test_c05_attractor(theta, timed):
    rng = np.random.default_rng(int(theta))
    with timed(30):
        sol, _, r = solve_rates(10.0, 0.4, BathSpec(theta, 1e-4), "sz")
        qs = quasistationary(r)
        slowest = min(r.relaxation_rate, r.coherence_rate.real)
        periods = int(np.ceil(40 / slowest / (2 * np.pi)))
        T = 2 * np.pi * periods
        tau = T - 4 * np.pi + np.arange(257) * (4 * np.pi / 256)
        for _ in range(5):
            p = rng.uniform(0, 1)
            c = np.sqrt(p * (1 - p)) * rng.uniform(0, 1) * np.exp(2j * np.pi * rng.uniform())
            traj = evolve_reduced(ReducedState(p, 1 - p, c), r, np.concatenate([[0.0], tau]))
            end = traj[-1]
            assert abs(end.p11 - qs.p11) <= 1e-6 and abs(end.p22 - qs.p22) <= 1e-6
            sz = sigma_z_expectation(ReducedTrajectory(tau, traj.p11[1:], traj.c12[1:]), sol)
            assert np.abs(sz[128:] - sz[:129]).max() <= 1e-6


@criterion(6, "high-temperature mixing")
def test_c06_high_temperature_mixing(timed):
    with timed(120):
        for A in (0.5, 2.0, 8.0):
            for D in (0.3, 0.8, 1.4):
                for S in ("sx", "sy", "sz"):
                    p11 = quasistationary(solve_rates(A, D, BathSpec(1e3), S)[2]).p11
                    assert 0.49 <= p11 <= 0.51, (A, D, S, p11)


@criterion(7, "coupling-operator limit of the decoherence rate")
def test_c07_weak_drive_decoherence(timed):
    kappa = 1.0
    bath = BathSpec(1.0, kappa)
    scale = float(gamma(bath, 0.5))
    with timed(10):
        for A in (1e-4, 1e-5):
            assert 1 / decoherence_time(solve_rates(A, 0.5, bath, "sx")[2]) < 1e-6 * kappa
            for S in ("sy", "sz"):
                assert 1 / decoherence_time(solve_rates(A, 0.5, bath, S)[2]) > 1e-2 * kappa * scale


EXACT_A = np.linspace(20, 100, 9)
AIRY_A = np.geomspace(1e2, 1e4, 7)
OVERLAP_A = np.array([20.0, 30.0, 40.0, 50.0])
SCALING_DELTA = 0.4


@criterion(8, "A^2 scaling of the rates at high temperature")
def test_c08_exact_floquet_exponent(timed):
    with timed(300):
        G = [solve_rates(a, SCALING_DELTA, BathSpec(1e3), "sz")[2].G12 for a in EXACT_A]
    slope = np.polyfit(np.log(EXACT_A), np.log(G), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.1), f"exponent {slope:.3f}"


@criterion(8, "A^2 scaling of the rates at high temperature")
def test_c08_airy_exponent(timed):
    with timed(300):
        fit = rate_scaling_high_T(AIRY_A, BathSpec(1e3), "sz")
    assert fit.exponent == pytest.approx(2.0, abs=0.1), f"exponent {fit.exponent:.3f}"


@criterion(8, "A^2 scaling of the rates at high temperature")
def test_c08_prefactor_agreement(timed):
    bath = BathSpec(1e3)
    with timed(300):
        exact = np.array([solve_rates(a, SCALING_DELTA, bath, "sz")[2].G12 for a in OVERLAP_A])
        airy = np.array([airy_rates(a, bath, "sz").G12 for a in OVERLAP_A])
    ratio = np.mean(airy / OVERLAP_A**2) / np.mean(exact / OVERLAP_A**2)
    assert abs(ratio - 1) <= 0.25, f"Airy/exact prefactor ratio {ratio:.3g}"


@criterion(9, "hysteresis closure and squeeze")
def test_c09_closure_and_squeeze(timed):
    params = DriveParams(0.1, 0.6)
    with timed(60):
        curves = [quasistationary_curve(params, BathSpec(t, 1e-3), "sz") for t in (0.0, 1.0, 10.0, 100.0)]
    for c in curves:
        assert c.closure_error() <= 1e-6
    ext = [c.vertical_extent() for c in curves]
    assert all(b <= a for a, b in zip(ext, ext[1:])), ext


@criterion(10, "dephasing ladder")
def test_c10_ladder(timed):
    with timed(120):
        slow = ladder_preset("mn12-seventh-resonance", 0.005)
        fast = ladder_preset("mn12-seventh-resonance", 0.025)
        limit = ladder_preset("mn12-seventh-resonance", 10.0)
    assert count_steps(slow) >= 3
    assert count_steps(fast) < count_steps(slow)
    assert is_two_line_limit(limit)


@criterion(11, "Airy function and table correctness")
def test_c11_airy(timed):
    with timed(10):
        x = np.linspace(-50, 20, 200)
        ref = np.array([airy_quadrature(v) for v in x])
        assert np.max(np.abs(airy_ai(x) - ref) / np.abs(ref)) <= 1e-10
        for A in (30.0, 1e3, 1e6):
            t = airy_fourier_components(A)
            assert np.array_equal(t.plus2, t.minus1)
            assert np.array_equal(t.minus2, -t.plus1)
            assert abs(t.total_weight() - 1) <= 1e-6


CLI_RUNS = {
    "quasienergy-map": ["--A", "0:2:3", "--Delta", "0.3,0.9"],
    "free-evolve": ["--preset", "strong-slow", "--n-points", "201"],
    "evolve": ["--n-points", "201"],
    "qs-scan": ["--A", "0.5:4:4"],
    "decoherence-scan": ["--A", "0,0.5,1", "--S", "sx"],
    "hysteresis": ["--mode", "transient", "--n-periods", "2", "--samples-per-period", "64"],
    "ladder": ["--n-periods", "2"],
}


@criterion(12, "CLI determinism")
@pytest.mark.parametrize("command", list(CLI_RUNS))
@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_c12_cli_determinism(command, fmt, tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"{k}.{fmt}"
        assert main([command, *CLI_RUNS[command], "--format", fmt, "--workers", "2", "--out", str(out)]) == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    if fmt == "json":
        assert json.loads(outs[0])["metadata"]["command"] == command
