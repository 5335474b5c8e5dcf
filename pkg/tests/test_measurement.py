import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import sphere_vector
from xzmonitor.measurement import (
    MeasurementChannel,
    joint_step,
    joint_update,
    kraus_update,
    kraus_update_matrix,
    povm_normalization_check,
    readout_density,
    sample_readout,
)
from xzmonitor.noise import Channel, NoiseStream
from xzmonitor.qubit_state import BlochState

CHZ = MeasurementChannel("z", 1.0, 0.01)
CHX = MeasurementChannel("x", 1.0, 0.01)
readouts = st.floats(-60, 60, allow_nan=False)
angles = st.floats(0, math.pi)
azimuths = st.floats(0, 2 * math.pi)


def _draws(s, ch, n, seed=0):
    stream = NoiseStream(seed, 0, Channel.XI_Z)
    return np.array([sample_readout(s, ch, stream) for _ in range(n)])


def test_eigenstate_readout_mean():
    r = _draws(BlochState(0, 0, 1), CHZ, 100_000)
    assert abs(r.mean() - 1.0) < 3 * 10 / math.sqrt(r.size)


def test_mixed_state_readout_mean():
    r = _draws(BlochState(0, 0, 0), CHZ, 100_000, seed=1)
    assert abs(r.mean()) < 3 * r.std() / math.sqrt(r.size)


def test_mixture_variance():
    # tau/dt + 1 - a^2 for a = 0.5
    r = _draws(BlochState(0, 0, 0.5), CHZ, 100_000, seed=2)
    assert abs(r.mean() - 0.5) < 3 * r.std() / math.sqrt(r.size)
    se_var = 100.75 * math.sqrt(2 / r.size)
    assert abs(r.var(ddof=1) - 100.75) < 3 * se_var


def test_mixture_histogram_matches_density():
    ch = _quiet("z", 0.1)
    a = 0.3
    r = _draws(BlochState(0, 0, a), ch, 50_000, seed=3)
    edges = np.linspace(-12, 12, 25)
    counts, _ = np.histogram(r, edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    dens = 0.5 * (1 + a) * readout_density(mid, 1.0, ch) + 0.5 * (1 - a) * readout_density(mid, -1.0, ch)
    expected = dens * (edges[1] - edges[0]) * r.size
    chi2 = np.sum((counts - expected) ** 2 / expected)
    assert chi2 < 24 + 5 * math.sqrt(48)


def test_invalid_state_rejected():
    with pytest.raises(ValueError):
        sample_readout(BlochState(1, 0, 1), CHZ, NoiseStream(0))
    with pytest.raises(TypeError):
        sample_readout((0, 0, 1), CHZ, NoiseStream(0))


def test_eigenstate_fixed_point():
    for r in (-30.0, -1.0, 0.0, 2.5, 40.0):
        assert kraus_update(BlochState(0, 0, 1), r, CHZ) == BlochState(0, 0, 1)
        assert kraus_update(BlochState(-1, 0, 0), r, CHX) == BlochState(-1, 0, 0)


def test_mixed_state_update_value():
    s = kraus_update(BlochState(0, 0, 0), 1.0, CHZ)
    assert abs(s.z - math.tanh(0.01)) < 1e-15
    assert abs(s.z - 0.00999967) < 1e-8
    assert s.x == 0 and s.y == 0


def test_non_finite_readout_rejected():
    with pytest.raises(ValueError):
        kraus_update(BlochState(0, 0, 0), float("nan"), CHZ)


@given(angles, azimuths, readouts, st.sampled_from(["x", "z"]))
def test_purity_preserved(theta, phi, r, axis):
    ch = CHX if axis == "x" else CHZ
    s = kraus_update(BlochState.from_array(sphere_vector(theta, phi)), r, ch)
    assert abs(s.norm2 - 1.0) <= 1e-12


@given(angles, azimuths, st.floats(0, 1), readouts, st.sampled_from(["x", "z"]), st.sampled_from([0.01, 0.1]))
def test_closed_form_matches_matrix_oracle(theta, phi, rad, r, axis, dt):
    ch = MeasurementChannel(axis, 1.0, dt) if dt <= 0.02 else _quiet(axis, dt)
    s = BlochState.from_array(rad * sphere_vector(theta, phi))
    a = kraus_update(s, r, ch).as_array()
    b = kraus_update_matrix(s, r, ch).as_array()
    assert np.max(np.abs(a - b)) < 1e-9


def _quiet(axis, dt):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return MeasurementChannel(axis, 1.0, dt)


@given(st.floats(-0.99, 0.99), readouts)
def test_hyperbolic_form(z, r):
    w = r * 0.01
    s = kraus_update(BlochState(0.0, 0.0, z), r, CHZ)
    ref = (z * math.cosh(w) + math.sinh(w)) / (math.cosh(w) + z * math.sinh(w))
    assert abs(s.z - ref) < 1e-12


@given(st.floats(0.01, 0.99), st.floats(-20, 20))
def test_bayes_rule_on_diagonal(p_up, r):
    # 2-point readout discretization: posterior odds = prior odds * exp(2 r dt / tau)
    s = kraus_update(BlochState(0, 0, 2 * p_up - 1), r, CHZ)
    post = 0.5 * (1 + s.z)
    odds = p_up / (1 - p_up) * math.exp(2 * r * 0.01)
    assert abs(post - odds / (1 + odds)) < 1e-12


def test_joint_step_stays_in_plane():
    s = BlochState(0, 0, 0)
    streams = (NoiseStream(5, 0, Channel.XI_X), NoiseStream(5, 0, Channel.XI_Z))
    for _ in range(200):
        s, rx, rz = joint_step(s, CHX, CHZ, streams)
        assert s.y == 0.0
        assert math.isfinite(rx) and math.isfinite(rz)


def test_joint_step_composition():
    s0 = BlochState(0.6, 0, 0.8)
    a = (NoiseStream(2, 0, Channel.XI_X), NoiseStream(2, 0, Channel.XI_Z))
    s1, rx, rz = joint_step(s0, CHX, CHZ, a)
    assert s1 == kraus_update(kraus_update(s0, rx, CHX), rz, CHZ)
    assert s1 == joint_update(s0, rx, rz, CHX, CHZ, "xz")


def test_joint_step_purity_long():
    s = BlochState(0, 0, 1)
    streams = (NoiseStream(8, 0, Channel.XI_X), NoiseStream(8, 0, Channel.XI_Z))
    for _ in range(2000):
        s, _, _ = joint_step(s, CHX, CHZ, streams)
    assert abs(s.norm2 - 1) < 1e-9


def test_joint_step_checks_channels():
    streams = (NoiseStream(0), NoiseStream(0, 0, Channel.XI_Z))
    with pytest.raises(ValueError):
        joint_step(BlochState(0, 0, 1), CHZ, CHX, streams)
    with pytest.raises(ValueError):
        joint_step(BlochState(0, 0, 1), CHX, MeasurementChannel("z", 1.0, 0.005), streams)
    with pytest.raises(ValueError):
        joint_update(BlochState(0, 0, 1), 1, 1, CHX, CHZ, "yx")


def test_ordering_error_quadratic():
    s = BlochState(0.6, 0, 0.8)
    grid = np.geomspace(5e-4, 2e-2, 8)
    err = []
    for h in grid:
        chx, chz = MeasurementChannel("x", 1.0, h), MeasurementChannel("z", 1.0, h)
        a = joint_update(s, 1.0, 1.0, chx, chz, "xz").as_array()
        b = joint_update(s, 1.0, 1.0, chx, chz, "zx").as_array()
        err.append(np.linalg.norm(a - b))
    slope = np.polyfit(np.log(grid), np.log(err), 1)[0]
    assert abs(slope - 2.0) <= 0.2


def test_step_ratio_gate():
    with pytest.raises(ValueError):
        MeasurementChannel("z", 1.0, 0.5)
    with pytest.warns(UserWarning):
        MeasurementChannel("z", 1.0, 0.05)
    with pytest.raises(ValueError):
        MeasurementChannel("y", 1.0, 0.01)


@pytest.mark.parametrize("dt", [0.01, 0.1])
def test_povm_normalization(dt):
    ch = _quiet("z", dt)
    grid = np.linspace(-1 - 8 * ch.sigma, 1 + 8 * ch.sigma, 20001)
    assert povm_normalization_check(ch, grid) < 1e-10


def test_povm_truncated_grid_tail_mass():
    ch = CHZ
    sig = ch.sigma
    grid = np.linspace(-2 * sig, 2 * sig, 20001)

    def lost(a):
        return 1 - 0.5 * (math.erf((2 * sig - a) / (sig * math.sqrt(2))) - math.erf((-2 * sig - a) / (sig * math.sqrt(2))))

    dev = povm_normalization_check(ch, grid, strict=False)
    assert abs(dev - max(lost(1.0), lost(-1.0))) < 1e-8
    # two-sided 2-sigma tail is 0.0455; the +-1 offset of the eigenvalues adds ~0.001
    assert abs(dev - 0.0455) < 2e-3
    with pytest.raises(ValueError):
        povm_normalization_check(ch, grid)
