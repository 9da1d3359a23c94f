"""Large-amplitude Floquet harmonics from Airy functions.

Compares the zero-order Airy table with an exact solve at A = 30 and shows
the high-temperature power law of the rates built from the Airy modes.
"""
import numpy as np

from anticross.airy import airy_fourier_components, rate_scaling_high_T
from anticross.bath import BathSpec
from anticross.core import DriveParams
from anticross.floquet import floquet_solve

A = 30.0
table = airy_fourier_components(A)
sol = floquet_solve(DriveParams(A, 0.5))
exact = np.abs(np.fft.ifft(sol.modes, axis=1)[0, :, 0])
print(f"Airy table on {len(table.n)} harmonics, weight {table.total_weight():.9f}")
print("  n    Airy/sqrt(pi/2)   exact")
for n in range(28, 40, 2):
    airy = abs(np.interp(n, table.n, table.plus1)) / np.sqrt(np.pi / 2)
    print(f"  {n:<4} {airy:.5f}           {exact[n]:.5f}")

grid = np.geomspace(1e2, 1e4, 7)
for theta in (1e5, 1e7):
    fit = rate_scaling_high_T(grid, BathSpec(theta), "sz")
    print(f"theta={theta:.0e}: G12 ~ {fit.prefactor:.3g} A^{fit.exponent:.3f}")
