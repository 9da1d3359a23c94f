"""Bath-induced rates, quasistationary states and decoherence times.

The coupling operator matters: for A -> 0 a sigma_x coupling commutes with
the static modes and stops dephasing them, sigma_y and sigma_z do not.
"""
import numpy as np

from anticross.bath import BathSpec
from anticross.master import (
    ReducedState,
    decoherence_time,
    evolve_reduced,
    quasistationary,
    quasistationary_scan,
    solve_rates,
)

bath = BathSpec(theta=1.0, kappa=1.0)
print("decoherence rate 1/tau_d at Delta = 0.5, theta = 1")
for A in (1e-4, 0.1, 1.0, 5.0):
    row = [1 / decoherence_time(solve_rates(A, 0.5, bath, S)[2]) for S in ("sx", "sy", "sz")]
    print(f"  A={A:<6} sx={row[0]:.3e}  sy={row[1]:.3e}  sz={row[2]:.3e}")

sol, table, rates = solve_rates(10.0, 0.4, BathSpec(1.0, 1e-4))
qs = quasistationary(rates)
print(f"\nA=10, Delta=0.4: p11_qs={qs.p11:.4f}, harmonics kept n_max={table.n_max}")
start = ReducedState(0.0, 1.0)
t = np.array([0, 1, 3, 10]) / rates.relaxation_rate
print("  p11(t):", np.round(evolve_reduced(start, rates, t).p11, 4))

A = np.linspace(0, 20, 41)
for theta in (0.0, 600.0):
    vals, notes = quasistationary_scan(1.5, A, BathSpec(theta))
    print(f"\nqs <sigma_z>(0), Delta=1.5, theta={theta}: max |.| = {np.nanmax(np.abs(vals)):.3f}, "
          f"{sum(bool(n) for n in notes)} gaps")
