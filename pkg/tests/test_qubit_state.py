import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ball_points, sphere_vector
from xzmonitor.qubit_state import (
    SIGMA_I,
    SIGMA_X,
    BlochState,
    DensityMatrixView,
    bloch_ball_check,
    bloch_to_density,
    density_to_bloch,
    project_direction,
)

angles = st.floats(0, math.pi, allow_nan=False)
azimuths = st.floats(0, 2 * math.pi, allow_nan=False)
radii = st.floats(0, 1, allow_nan=False)


def test_z_eigenstate_is_diag_1_0():
    np.testing.assert_allclose(bloch_to_density(BlochState(0, 0, 1)).matrix, np.diag([1, 0]), atol=0)


def test_origin_is_maximally_mixed():
    np.testing.assert_allclose(bloch_to_density(BlochState(0, 0, 0)).matrix, 0.5 * SIGMA_I)


def test_x_eigenstate_all_halves():
    np.testing.assert_allclose(bloch_to_density(BlochState(1, 0, 0)).matrix, np.full((2, 2), 0.5))


@pytest.mark.parametrize("m, expected", [
    (np.diag([1.0, 0.0]), (0, 0, 1)),
    (0.5 * SIGMA_I, (0, 0, 0)),
    (0.5 * (SIGMA_I + SIGMA_X), (1, 0, 0)),
])
def test_density_to_bloch_examples(m, expected):
    np.testing.assert_allclose(density_to_bloch(m).as_array(), expected, atol=1e-15)


def test_round_trip_1000_random_states(rng):
    for v in ball_points(rng, 1000):
        s = BlochState.from_array(v)
        back = density_to_bloch(bloch_to_density(s)).as_array()
        assert np.max(np.abs(back - v)) <= 1e-12


@given(angles, azimuths, radii)
def test_density_view_invariants(theta, phi, r):
    m = bloch_to_density(BlochState.from_array(r * sphere_vector(theta, phi))).matrix
    assert np.allclose(m, m.conj().T)
    assert abs(np.trace(m) - 1) < 1e-12
    assert np.linalg.eigvalsh(m).min() > -1e-12


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        BlochState(float("nan"), 0, 0)
    with pytest.raises(ValueError):
        BlochState(0, float("inf"), 0)


def test_outside_ball_rejected():
    with pytest.raises(ValueError):
        bloch_to_density(BlochState(1, 0, 1))


@pytest.mark.parametrize("m", [
    np.array([[1, 1], [0, 0]], dtype=complex),  # not Hermitian
    np.diag([0.7, 0.7]),  # trace 1.4
    np.diag([1.5, -0.5]),  # negative eigenvalue
    np.eye(3) / 3,
])
def test_invalid_density_rejected(m):
    with pytest.raises(ValueError):
        density_to_bloch(m)


def test_density_view_read_only():
    view = bloch_to_density(BlochState(0, 0, 1))
    with pytest.raises(ValueError):
        view.matrix[0, 0] = 0
    assert view[0, 0] == 1


def test_project_direction_examples(rng):
    assert project_direction(BlochState(1, 0, 0), 0.0) == 1.0
    assert abs(project_direction(BlochState(1, 0, 0), math.pi / 2)) < 1e-16
    for theta, phi in rng.uniform(-math.pi, math.pi, size=(100, 2)):
        assert abs(project_direction(BlochState.from_angle(theta), phi) - math.cos(theta - phi)) < 1e-14


@given(angles, azimuths, radii, st.floats(-10, 10))
def test_project_direction_bounded_and_periodic(theta, phi, r, ang):
    s = BlochState.from_array(r * sphere_vector(theta, phi))
    p = project_direction(s, ang)
    assert abs(p) <= math.hypot(s.x, s.z) + 1e-12
    assert abs(p - project_direction(s, ang + 2 * math.pi)) < 1e-12


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(-3, 3))
def test_project_direction_linear(x1, z1, x2, z2, phi):
    a, b = BlochState(x1, 0, z1), BlochState(x2, 0, z2)
    s = BlochState(x1 + x2, 0, z1 + z2)
    assert abs(project_direction(s, phi) - project_direction(a, phi) - project_direction(b, phi)) < 1e-12


def test_ball_check_examples():
    assert bloch_ball_check(BlochState(0, 0, 1))
    assert not bloch_ball_check(BlochState(1, 0, 1))
    assert bloch_ball_check(BlochState(0.6, 0, 0.8))
    assert bloch_ball_check(np.array([[0, 0, 1], [0.6, 0, 0.8]]))
    assert not bloch_ball_check(np.array([[0, 0, 1], [1, 0, 1]]))
    assert bloch_ball_check(BlochState(0, 0, 1 + 5e-10))
    assert not bloch_ball_check(BlochState(0, 0, 1 + 1e-8))


def test_purity_flag():
    assert BlochState.from_angle(0.3).is_pure
    assert not BlochState(0.5, 0, 0).is_pure
    assert DensityMatrixView(np.diag([1.0, 0.0])).matrix.dtype == complex
