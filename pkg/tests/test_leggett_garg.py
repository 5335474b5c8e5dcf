import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xzmonitor.emulator import make_effective_readouts
from xzmonitor.integrators import ReadoutRecord, SimulationConfig, run_kraus
from xzmonitor.leggett_garg import (
    LGResult,
    lg_combination,
    lg_csv,
    lg_curve,
    lg_theory,
    phi_autocorrelator,
    phi_orthogonal_correlator,
    phi_sweep,
    projective_lg,
    projective_theory,
    rotate_readout,
    violation_boundary,
)
from xzmonitor.noise import NoiseStream
from xzmonitor.statistics import autocorrelate


@pytest.fixture(scope="module")
def medium():
    return run_kraus([0, 0, 1], SimulationConfig(duration=20_000.0, seed=70, keep_noise=False))


def test_rotate_readout_special_angles():
    ro = ReadoutRecord(np.array([1.0, 2.0, -3.0]), np.array([0.5, -1.0, 4.0]), 0.01)
    np.testing.assert_array_equal(rotate_readout(ro, 0.0).samples, ro.r_x)
    np.testing.assert_allclose(rotate_readout(ro, math.pi / 2).samples, ro.r_z, atol=1e-15)
    np.testing.assert_allclose(rotate_readout(ro, math.pi / 4).samples, (ro.r_x + ro.r_z) / math.sqrt(2))
    assert rotate_readout(ro, 0.3).source is ro


@given(st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=1, max_size=30), st.floats(-7, 7))
def test_rotate_readout_exact_combination(pairs, phi):
    rx, rz = np.array(pairs).T
    out = rotate_readout(ReadoutRecord(rx, rz, 0.01), phi).samples
    assert np.array_equal(out, math.cos(phi) * rx + math.sin(phi) * rz)


def _straddle(est, t):
    i = int(np.searchsorted(est.lags, t))
    return 0.5 * (est.values[i - 1] + est.values[i]), 0.5 * math.hypot(est.stderr[i - 1], est.stderr[i])


def test_phi_autocorrelator_values(medium):
    est = phi_autocorrelator(medium, math.pi / 3, 3.0, 0.1)
    v, se = _straddle(est, 2.0)
    assert abs(v - math.exp(-1)) < 3 * se + 0.003
    est = phi_autocorrelator(medium, math.pi / 3, 0.5, 0.05)
    v, se = _straddle(est, 0.1)
    assert abs(v - math.exp(-0.05)) < 3 * se + 0.003


def test_phi_invariance_chi2(medium):
    grid = np.linspace(0, math.pi, 7)
    sweep = phi_sweep(medium, grid, 4.0, 0.5)
    vals = np.array([e.values for e in sweep.values()])
    errs = np.array([e.stderr for e in sweep.values()])
    w = 1 / errs ** 2
    mean = (vals * w).sum(axis=0) / w.sum(axis=0)
    chi2 = float((((vals - mean) / errs) ** 2).sum())
    dof = vals.size - vals.shape[1]
    # estimates at different angles share data, so chi2 sits below its nominal dof
    assert chi2 < dof + 4 * math.sqrt(2 * dof)


def test_orthogonal_correlator(medium):
    at0 = phi_orthogonal_correlator(medium, 0.0, 2.0, 0.5)
    xz = autocorrelate(medium, ("x", "z"), 2.0, 0.5)
    np.testing.assert_allclose(at0.values, xz.values, atol=1e-12)
    est = phi_orthogonal_correlator(medium, math.pi / 4, 3.0, 0.5)
    assert np.all(np.abs(est.values) < 3.5 * est.stderr)


def test_fixed_spin_orthogonal_correlator_is_not_zero():
    theta, phi, dt, tau = 0.4, 0.1, 0.01, 1.0
    n = 400_000
    s = math.sqrt(tau / dt) * NoiseStream(5, 0, 3).standard_normal(n)
    rd = make_effective_readouts(np.full(n, theta), np.zeros(n), s, dt, tau)
    est = phi_orthogonal_correlator(rd, phi, 1.0, 0.5)
    expected = math.cos(theta - phi) * math.cos(theta - phi - math.pi / 2)
    assert abs(expected) > 0.2
    assert np.all(np.abs(est.values - expected) < 4 * est.stderr)


@pytest.mark.slow
def test_lg_short_time_near_sqrt2():
    # a single raw lag is available at t = 0.01, so ten 10^5 tau runs are pooled
    vals = []
    for j in range(10):
        rec = run_kraus([0, 0, 1], SimulationConfig(duration=1e5, seed=31, trajectory=j, keep_noise=False,
                                                    stride=1000))
        r = lg_combination(rec, math.pi / 4, 0.01)
        vals.append(r.lhs)
        del rec
    assert abs(r.theory - math.sqrt(2) * math.exp(-0.005)) < 1e-12
    assert abs(r.theory - 1.407) < 1e-3
    assert abs(np.mean(vals) - r.theory) <= 0.05


def test_lg_examples(long_quantum):
    r = lg_combination(long_quantum, math.pi / 4, 0.1)
    assert abs(r.theory - 1.345) < 1e-3
    assert abs(r.lhs - 1.345) <= 0.05 and r.violated
    neg = lg_combination(long_quantum, -math.pi / 4, 0.1)
    assert abs(neg.theory) < 1e-12 and not neg.violated


def test_lg_theory_curve_over_grid(long_quantum):
    for phi in np.linspace(0, math.pi / 2, 5):
        curve = lg_curve(long_quantum, phi, [0.01, 0.05, 0.2, 0.5, 1.0, 2.0])
        for r in curve:
            assert abs(r.lhs - r.theory) < 3 * r.stderr, (phi, r)


@pytest.mark.parametrize("phi", [math.pi / 4, math.pi / 6])
def test_violation_boundary(long_quantum, phi):
    times = np.arange(0.05, 1.6, 0.025)
    t_star = violation_boundary(lg_curve(long_quantum, phi, times))
    assert abs(t_star - 2 * math.log(math.cos(phi) + math.sin(phi))) <= 0.1


def test_violation_boundary_without_crossing():
    flat = [LGResult(0.5, 0.01, t, 0.0) for t in (0.1, 0.2, 0.3)]
    assert math.isnan(violation_boundary(flat))


def test_violation_flag():
    assert LGResult(1.2, 0.05, 0.1, 0.0).violated
    assert not LGResult(1.1, 0.05, 0.1, 0.0).violated
    assert LGResult(1.2, 0.05, 0.1, 0.0).z == pytest.approx(4.0)


def test_window_never_reaches_lag_zero():
    ro = ReadoutRecord(np.zeros(40_000), np.zeros(40_000), 0.01)
    with pytest.raises(ValueError):
        lg_combination(ro, 0.3, 0.001)
    assert lg_combination(ro, 0.3, 0.01).lhs == 0.0


@given(st.floats(-3, 3), st.floats(0, 3))
def test_lg_theory_formula(phi, t):
    assert abs(lg_theory(phi, t) - (math.cos(phi) + math.sin(phi)) * math.exp(-t / 2)) < 1e-12
    assert lg_theory(phi, t) <= math.sqrt(2) + 1e-12


@pytest.mark.parametrize("angle, value", [(math.pi / 3, 1.5), (math.pi / 2, 1.0), (0.0, 1.0)])
def test_projective_examples(angle, value):
    omega = angle / 1.0
    r = projective_lg(omega, 1.0, 100_000, seed=8)
    assert abs(r.theory - value) < 1e-12
    assert abs(r.lhs - value) <= max(3 * r.stderr, 1e-12)


def test_projective_needs_drive():
    r = projective_lg(0.0, 0.7, 5000, seed=1)
    assert r.lhs == 1.0 and not r.violated
    driven = projective_lg(math.pi / 3, 1.0, 100_000, seed=2)
    assert driven.violated


def test_projective_state_independent():
    r = projective_lg(math.pi / 3, 1.0, 100_000, seed=3, initial=(1, 0, 0))
    assert abs(r.lhs - 1.5) < 3 * r.stderr


def test_projective_max_is_three_halves():
    a = np.linspace(0, math.pi, 2001)
    vals = [projective_theory(x, 1.0) for x in a]
    assert abs(max(vals) - 1.5) < 1e-6
    assert abs(a[int(np.argmax(vals))] - math.pi / 3) < 2e-3


def test_projective_small_samples():
    assert projective_lg(math.pi / 3, 1.0, 10, seed=4).stderr > 0.2
    assert math.isinf(projective_lg(math.pi / 3, 1.0, 1, seed=4).stderr)
    with pytest.raises(ValueError):
        projective_lg(1.0, 1.0, 0)


def test_projective_reproducible():
    a = projective_lg(1.0, 1.0, 1000, seed=11)
    b = projective_lg(1.0, 1.0, 1000, seed=11)
    assert (a.lhs, a.stderr, a.theory) == (b.lhs, b.stderr, b.theory)


def test_lg_csv_columns():
    text = lg_csv([LGResult(1.2, 0.05, 0.1, 0.7, 1.3), LGResult(0.2, 0.05, 0.3, 0.7, 0.1)], ["hdr"])
    lines = text.splitlines()
    assert lines[0] == "# hdr"
    assert lines[1] == "phi,t,lhs,stderr,theory,bound,violated"
    assert lines[2].endswith(",true") and lines[3].endswith(",false")
