"""
A single monitored trajectory
=============================

Measure sigma_x and sigma_z at the same time, with equal strength, and watch
the Bloch vector wander around the x-z great circle.
"""
import numpy as np

from xzmonitor import BlochState, SimulationConfig, run_kraus
from xzmonitor.artifacts import svg_line_plot, write_text

# 20 tau at the default step dt/tau = 0.01, starting from the +z pole.
rec = run_kraus(BlochState(0.0, 0.0, 1.0), SimulationConfig(duration=20.0, seed=1))
t, s = rec.times, rec.states

# A pure state stays pure, and y is never excited.
print("max |purity - 1| :", np.abs((s ** 2).sum(axis=1) - 1).max())
print("max |y|          :", np.abs(s[:, 1]).max())

# The raw readouts are buried in noise of size sqrt(tau/dt) = 10.
print("readout r_x std  :", rec.readouts.r_x.std())

write_text("trajectory.svg", svg_line_plot({"x": (t, s[:, 0]), "z": (t, s[:, 2])},
                                           "monitored qubit", "t / tau", "Bloch component"))
