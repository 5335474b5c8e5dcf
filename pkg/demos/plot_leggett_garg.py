"""
Leggett-Garg violation without a Hamiltonian
============================================

The combination <r_x r_phi> + <r_phi r_z> - <r_x r_z> cannot exceed 1 for a
noninvasively measured macrorealistic system.  The jointly monitored qubit
reaches (cos phi + sin phi) exp(-t/2tau), close to sqrt(2) at short times.
Compare with the textbook projective test, which needs Rabi driving.
"""
import math

import numpy as np

from xzmonitor import SimulationConfig, lg_curve, projective_lg, run_kraus
from xzmonitor.leggett_garg import violation_boundary

rec = run_kraus([0, 0, 1], SimulationConfig(duration=5e4, seed=11, keep_noise=False, stride=100))

times = np.arange(0.1, 1.5, 0.05)
curve = lg_curve(rec, math.pi / 4, times)
for r in curve[::4]:
    print(f"t = {r.t:.2f}  K = {r.lhs:.3f} +- {r.stderr:.3f}  theory {r.theory:.3f}  violated: {r.violated}")
print("boundary t* =", round(violation_boundary(curve), 3), " (theory ln 2 =", round(math.log(2), 3), ")")

# At phi = -pi/4 the two single-axis terms cancel.
print("phi = -pi/4:", lg_curve(rec, -math.pi / 4, [0.1])[0].lhs)

# Projective sigma_z measurements at 0, dt, 2dt on a driven qubit.
for omega in (0.0, math.pi / 3):
    r = projective_lg(omega, 1.0, 100_000, seed=2)
    print(f"projective, Omega dt = {omega:.3f}: K = {r.lhs:.4f} +- {r.stderr:.4f} (theory {r.theory:.4f})")
