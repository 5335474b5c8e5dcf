import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from xzmonitor.emulator import emulate
from xzmonitor.filtering import ewma, tracking_csv, tracking_report
from xzmonitor.integrators import SimulationConfig, run_kraus
from xzmonitor.leggett_garg import rotate_readout

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_constant_input_geometric_decay():
    r = np.full(500, 0.3)
    r[0] = 2.0
    out = ewma(r, 0.01, 0.5).values
    k = np.arange(1, 500)
    np.testing.assert_allclose(np.abs(out[1:] - 0.3), 1.7 * (1 - 0.02) ** (k - 1), rtol=1e-10)
    assert out[0] == 2.0


def test_constant_input_is_fixed_point():
    out = ewma(np.full(100, -0.4), 0.01, 1.0).values
    np.testing.assert_allclose(out, -0.4, rtol=1e-14)


def test_zero_input():
    assert np.all(ewma(np.zeros(1000), 0.01, 1.0).values == 0)


def test_recursion_matches_loop(rng):
    r = rng.normal(size=2000)
    y = np.empty_like(r)
    y[0] = r[0]
    a = 0.01 / 0.3
    for k in range(r.size - 1):
        y[k + 1] = y[k] + a * (r[k] - y[k])
    np.testing.assert_allclose(ewma(r, 0.01, 0.3).values, y, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("tau_f", [1.0, 0.3])
def test_white_noise_variance(tau_f):
    dt, tau, n = 0.01, 1.0, 2_000_000
    r = math.sqrt(tau / dt) * np.random.default_rng(7).standard_normal(n)
    y = ewma(r, dt, tau_f).values[int(20 * tau_f / dt):]
    expected = tau / (2 * tau_f - dt)
    assert abs(y.var() - expected) < 0.03 * expected
    if tau_f == 1.0:
        assert abs(expected - 0.5) < 0.003


def test_out_of_range_flagged_not_clipped():
    r = 10 * np.random.default_rng(1).standard_normal(5000)
    f = ewma(r, 0.01, 0.05)
    assert f.fraction_out_of_range > 0
    assert np.abs(f.values).max() > 1


@given(arrays(float, st.integers(1, 60), elements=finite), arrays(float, 60, elements=finite),
       st.floats(-5, 5), st.floats(-5, 5))
def test_linearity(r, s, a, b):
    s = s[: r.size]
    lhs = ewma(a * r + b * s, 0.01, 0.2).values
    rhs = a * ewma(r, 0.01, 0.2).values + b * ewma(s, 0.01, 0.2).values
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-7)


@given(st.floats(-4, 4))
def test_commutes_with_rotation(phi):
    rec = run_kraus([0, 0, 1], SimulationConfig(duration=2.0, seed=3))
    ro = rec.readouts
    direct = ewma(rotate_readout(ro, phi).samples, ro.dt, 1.0).values
    rotated = math.cos(phi) * ewma(ro.r_x, ro.dt, 1.0).values + math.sin(phi) * ewma(ro.r_z, ro.dt, 1.0).values
    np.testing.assert_allclose(direct, rotated, rtol=1e-9, atol=1e-9)


def test_tau_f_must_exceed_dt():
    with pytest.raises(ValueError):
        ewma(np.zeros(10), 0.01, 0.01)
    with pytest.raises(ValueError):
        ewma(np.zeros(10), 0.01, 0.005)
    with pytest.raises(ValueError):
        ewma(np.zeros(0), 0.01, 1.0)


def test_filtered_truth_tracks_itself():
    t = 0.01 * np.arange(100_000)
    truth = np.cos(0.05 * t) + 0.3 * np.sin(0.013 * t)
    m = tracking_report(ewma(truth, 0.01, 1.0), truth)
    assert m.correlation > 0.99
    assert m.burn_in == 5.0


def test_best_lag_is_filter_delay():
    t = 0.01 * np.arange(100_000)
    truth = np.cos(0.5 * t)
    m = tracking_report(ewma(truth, 0.01, 1.0), truth)
    # phase delay of a first-order low-pass, plus the one-step causal delay
    assert m.best_lag == pytest.approx(math.atan(0.5) / 0.5 + 0.01, abs=0.03)


def test_length_mismatch():
    with pytest.raises(ValueError, match="length"):
        tracking_report(ewma(np.zeros(100), 0.01, 0.1), np.zeros(99))


@pytest.fixture(scope="module")
def quantum_1e3():
    return run_kraus([0, 0, 1], SimulationConfig(duration=1000.0, seed=17, keep_noise=False))


def test_quantum_tracking(quantum_1e3):
    ro = quantum_1e3.readouts
    m = tracking_report(ewma(ro.r_x, ro.dt, 1.0), quantum_1e3.states[:-1, 0])
    assert m.correlation >= 0.6
    assert m.rms > 0 and m.n == ro.r_x.size - 500


def test_emulator_tracking_matches_quantum(quantum_1e3):
    ro = quantum_1e3.readouts
    q = tracking_report(ewma(ro.r_x, ro.dt, 1.0), quantum_1e3.states[:-1, 0]).correlation
    rd = emulate(0.0, SimulationConfig(duration=1000.0, seed=17))
    e = tracking_report(ewma(rd.r_x, rd.dt, 1.0), rd.x[:-1]).correlation
    assert abs(q - e) <= 0.05


def test_time_translation(quantum_1e3):
    ro = quantum_1e3.readouts
    x = quantum_1e3.states[:-1, 0]
    full = tracking_report(ewma(ro.r_x, ro.dt, 1.0), x).correlation
    k = 40_000
    shifted = tracking_report(ewma(ro.r_x[k:], ro.dt, 1.0, t0=k * ro.dt), x[k:])
    # half the record overlaps, so the two estimates differ by sampling error only
    assert abs(shifted.correlation - full) < 0.05


def test_tracking_csv():
    f = ewma(np.arange(10.0), 0.1, 0.5)
    lines = tracking_csv(f, np.arange(10.0), np.zeros(10), stride=3).splitlines()
    body = [l for l in lines if not l.startswith("#")]
    assert body[0] == "t,raw,filtered,truth"
    assert len(body) == 1 + 4
