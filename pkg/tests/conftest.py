import math

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def ball_points(rng, n):
    """Uniform samples from the unit ball."""
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * rng.random((n, 1)) ** (1 / 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def sphere_vector(theta, phi):
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


@pytest.fixture(scope="session")
def long_quantum():
    """One 10^5 tau Kraus trajectory at dt/tau = 0.01 (states kept every 100 steps)."""
    from xzmonitor.integrators import SimulationConfig, run_kraus

    return run_kraus([0, 0, 1], SimulationConfig(duration=1e5, seed=2024, keep_noise=False, stride=100))


@pytest.fixture(scope="session")
def long_emulated():
    """One 10^5 tau classical emulator run at dt/tau = 0.01."""
    from xzmonitor.emulator import emulate
    from xzmonitor.integrators import SimulationConfig

    return emulate(0.3, SimulationConfig(duration=1e5, seed=2025))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
