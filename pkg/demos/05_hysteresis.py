"""Magnetisation curves <sigma_z> versus F = A cos(tau).

Quasistationary loops flatten with temperature; transients spiral onto the
loop; the Mn12 ladder shows steps at the field zeros when relaxation is slow.
"""
import numpy as np

from anticross.bath import BathSpec
from anticross.core import DriveParams
from anticross.hysteresis import (
    count_steps,
    distance_to_loop,
    is_two_line_limit,
    ladder_preset,
    quasistationary_curve,
    transient_curve,
)

weak = DriveParams(0.1, 0.6)
for theta in (0, 1, 10, 100):
    c = quasistationary_curve(weak, BathSpec(theta, 1e-3))
    print(f"theta={theta:<4} vertical extent {c.vertical_extent():.5f}, closure {c.closure_error():.1e}")

strong = DriveParams(10, 0.4)
bath = BathSpec(1.0, 1e-2)
loop = quasistationary_curve(strong, bath, samples_per_period=128)
tr = transient_curve(strong, bath, n_periods=60)
d = distance_to_loop(tr, loop)
print(f"\ntransient distance to the loop, periods 0/10/30/59: {d[0]:.3f} {d[10]:.3f} {d[30]:.1e} {d[59]:.1e}")

for g in (0.005, 0.025, 10.0):
    c = ladder_preset("mn12-seventh-resonance", g)
    print(f"Gamma12={g:<6} steps on falling field: {count_steps(c)}, two-line limit: {is_two_line_limit(c)}")
