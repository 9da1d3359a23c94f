"""Floquet quasi-energies of the driven two-level system.

Prints the gap |eps2 - eps1| over a coarse (A, Delta) grid, the weak-drive
agreement with the Rabi frequency and the Landau-Zener parameter that
separates sudden from adiabatic passages.
"""
import numpy as np

from anticross.core import DriveParams, fold_quasienergy, lzs_parameter, rabi_frequency
from anticross.floquet import floquet_solve, quasienergy_map

A_grid = np.linspace(0, 4, 9)
D_grid = np.array([0.2, 0.6, 1.0, 1.4])
gaps, flags = quasienergy_map(A_grid, D_grid)

print("gap |eps2 - eps1| (* marks degenerate points)")
print("   A  " + "".join(f"  D={d:<5}" for d in D_grid))
for a, row, frow in zip(A_grid, gaps, flags):
    cells = "".join(f"  {g:6.4f}{'*' if f else ' '}" for g, f in zip(row, frow))
    print(f"{a:5.2f} {cells}")

# weak driving: the gap is the folded Rabi frequency
print("\nweak drive, Delta = 0.5")
for A in (0.01, 0.05, 0.2, 1.0):
    p = DriveParams(A, 0.5)
    gap = floquet_solve(p).gap
    print(f"  A={A:<5} gap={gap:.6f}  Rabi={abs(fold_quasienergy(rabi_frequency(p))):.6f}")

print("\nLandau-Zener parameter at the maximal sweep rate")
for A, D in [(10, 0.4), (10, 3.0), (1, 1)]:
    print(f"  A={A:<3} Delta={D:<4} P_LZS={lzs_parameter(DriveParams(A, D)):.4f}")
