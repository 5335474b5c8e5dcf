"""
A classical spin that fools the observer
========================================

A classical moment diffusing on a circle, plus a private noise, produces
readouts with the same statistics as the monitored qubit.  A third party who
integrates the qubit equations with those readouts recovers the spin path.
"""
import math

import numpy as np

from xzmonitor import SimulationConfig, autocorrelate, emulate, lg_combination, third_party_reconstruct
from xzmonitor.emulator import SpinState, reconstruction_identity_residual

rd = emulate(0.3, SimulationConfig(duration=2e4, seed=5))

est = autocorrelate(rd, ("x", "x"), 4.0, 0.5)
print("emulated <r_x r_x> max deviation from exp(-t/2):", round(est.max_abs_deviation(), 4))
print("emulated LG at phi = pi/4, t = 0.1:", round(lg_combination(rd, math.pi / 4, 0.1).lhs, 3))

# The reconstruction identity is exact algebra on the unit circle.
print("identity residual:", reconstruction_identity_residual(rd).max())

short = emulate(0.3, SimulationConfig(duration=10.0, seed=6))
rec = third_party_reconstruct(short, SpinState(0.3).to_bloch())
print("reconstruction error over 10 tau:", np.abs(rec.states[:, 0] - short.x).max())

# Starting from the maximally mixed state, the observer's estimate locks on.
rec = third_party_reconstruct(short, [0.0, 0.0, 0.0])
err = np.hypot(rec.states[:, 0] - short.x, rec.states[:, 2] - short.z)
print("mixed start, error at t = 0, 1, 5, 10:", np.round(err[[0, 100, 500, 1000]], 3))
