"""
Readout correlators
===================

Both readouts decay as exp(-t/2tau), and the two channels are uncorrelated,
even though the state itself is strongly correlated between x and z.
"""
import math

import numpy as np

from xzmonitor import SimulationConfig, autocorrelate, run_kraus
from xzmonitor.leggett_garg import phi_autocorrelator

# One long stationary run is the cheapest estimator.  Drop the stored states
# to every 100th step to save memory.
rec = run_kraus([0, 0, 1], SimulationConfig(duration=2e4, seed=3, keep_noise=False, stride=100))

for pair in [("x", "x"), ("z", "z"), ("x", "z")]:
    est = autocorrelate(rec, pair, max_lag=4.0, bin_width=0.5)
    print(est.label)
    for lag, v, se, th in zip(est.lags, est.values, est.stderr, est.theory):
        print(f"   t = {lag:4.2f}   {v:+.3f} +- {se:.3f}   theory {th:+.3f}")

# Any rotated readout r_phi = cos(phi) r_x + sin(phi) r_z behaves the same.
for phi in np.linspace(0, math.pi / 2, 4):
    est = phi_autocorrelator(rec, phi, 4.0, 0.5)
    print(f"phi = {math.degrees(phi):4.0f} deg: max deviation {est.max_abs_deviation():.3f}")
