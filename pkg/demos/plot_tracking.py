"""
Tracking the qubit with a moving average
========================================

An exponentially weighted moving average of the raw readouts, with decay
time tau, follows the hidden Bloch components reasonably well.  No model of
the measurement is needed.
"""
from xzmonitor import SimulationConfig, ewma, run_kraus, tracking_report
from xzmonitor.artifacts import svg_line_plot, write_text

rec = run_kraus([0, 0, 1], SimulationConfig(duration=1000.0, seed=8, keep_noise=False))
ro = rec.readouts
x = rec.states[:-1, 0]

for tau_f in (0.3, 1.0, 3.0):
    m = tracking_report(ewma(ro.r_x, ro.dt, tau_f), x)
    print(f"tau_f = {tau_f}: corr {m.correlation:.3f}, rms {m.rms:.3f}, best lag {m.best_lag:.2f}")

f = ewma(ro.r_x, ro.dt, 1.0)
n = 3000
write_text("tracking.svg", svg_line_plot({"x(t)": (f.times[:n], x[:n]), "filtered r_x": (f.times[:n], f.values[:n])},
                                         "EWMA tracking", "t / tau", "x"))
