"""Classical spin emulation of the jointly monitored qubit.

A classical moment at angle ``theta`` in the x-z plane diffuses as

    d theta / dt = r~(t) / tau,   <r~(0) r~(t)> = tau delta(t),

so ``Var[theta(t) - theta(0)] = t / tau``.  An agent who sees the spin
reports the effective readouts

    r~_x = x + (-z r~ + x s~),    r~_z = z + (x r~ + z s~),

with ``x = cos theta``, ``z = sin theta`` and an independent subjective noise
``s~`` of the same strength.  The effective noises are unit white and
uncorrelated, and a third party who integrates the qubit Bloch equations
with these readouts recovers the spin path exactly, because on the unit
circle ``(1 - x^2) r~_x - x z r~_z = -z r~``.

Only equal measurement times can be emulated this way.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .artifacts import csv_text
from .integrators import ReadoutRecord, SimulationConfig, TrajectoryRecord, replay
from .measurement import DT_OVER_TAU_MAX
from .noise import Channel, NoiseStream, seed_layout
from .qubit_state import BlochState

__all__ = [
    "EmulatedReadouts",
    "SpinState",
    "UnequalMeasurementTimesError",
    "diffusion_rate",
    "emulate",
    "emulate_ensemble",
    "emulator_csv",
    "emulator_lg_suite",
    "make_effective_readouts",
    "reconstruction_identity_residual",
    "step_spin",
    "third_party_reconstruct",
]


class UnequalMeasurementTimesError(ValueError):
    """The classical emulation only reproduces equal-strength monitoring."""


@dataclass(frozen=True)
class SpinState:
    theta: float

    @property
    def x(self) -> float:
        return math.cos(self.theta)

    @property
    def y(self) -> float:
        return 0.0

    @property
    def z(self) -> float:
        return math.sin(self.theta)

    def to_bloch(self) -> BlochState:
        return BlochState(self.x, 0.0, self.z)

    @classmethod
    def from_bloch(cls, s: BlochState) -> "SpinState":
        if abs(s.y) > 1e-12:
            raise ValueError("spin state must lie in the x-z plane")
        return cls(math.atan2(s.z, s.x))


def _check_ratio(dt, tau):
    if not (dt > 0 and tau > 0):
        raise ValueError("dt and tau must be positive")
    if dt / tau > DT_OVER_TAU_MAX * (1 + 1e-12):
        raise ValueError(f"dt/tau = {dt / tau:g} exceeds {DT_OVER_TAU_MAX}")


def step_spin(s: SpinState, r_tilde: float, dt: float, tau: float) -> SpinState:
    """``theta' = theta + r~ dt / tau``."""
    _check_ratio(dt, tau)
    return SpinState(s.theta + r_tilde * (dt / tau))


@dataclass
class EmulatedReadouts:
    """Spin path, driving noises and effective readouts of one emulator run.

    ``theta`` has one more entry than the per-step arrays; readout ``k`` is
    formed from ``theta[k]`` and the noises of step ``k``.
    """

    theta: np.ndarray
    r_tilde: np.ndarray
    s_tilde: np.ndarray
    r_x: np.ndarray
    r_z: np.ndarray
    dt: float
    tau: float
    seed: int | None = None
    trajectory: int | None = None
    provenance: tuple = ()

    def __len__(self):
        return self.r_x.size

    @property
    def tau_x(self) -> float:
        return self.tau

    @property
    def tau_z(self) -> float:
        return self.tau

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.theta.size)

    @property
    def x(self) -> np.ndarray:
        return np.cos(self.theta)

    @property
    def z(self) -> np.ndarray:
        return np.sin(self.theta)

    def channel(self, name: str) -> np.ndarray:
        return self.as_readout_record().channel(name)

    def as_readout_record(self) -> ReadoutRecord:
        return ReadoutRecord(self.r_x, self.r_z, self.dt, self.tau, self.tau, 0.0, self.seed, self.trajectory)

    def effective_noise(self) -> np.ndarray:
        """Columns ``xi'_x``, ``xi'_z`` with ``a_k + sqrt(tau) xi'_k = r~_a[k]``."""
        x, z = self.x[:-1], self.z[:-1]
        q = math.sqrt(self.tau)
        return np.column_stack(((-z * self.r_tilde + x * self.s_tilde) / q,
                                (x * self.r_tilde + z * self.s_tilde) / q))

    def as_trajectory(self) -> TrajectoryRecord:
        """The spin path as a Bloch trajectory with effective-noise provenance."""
        states = np.column_stack((self.x, np.zeros_like(self.theta), self.z))
        return TrajectoryRecord(states, self.as_readout_record(), "emulator", 1, self.seed, self.trajectory,
                                self.effective_noise(), 0.0, {"provenance": self.provenance})


def make_effective_readouts(theta, r_tilde, s_tilde, dt: float, tau: float, seed=None, trajectory=None,
                            provenance=()) -> EmulatedReadouts:
    """Build ``r~_x``, ``r~_z`` from a spin path and the two noises.

    ``theta`` may have ``n`` or ``n + 1`` entries for ``n`` noise samples;
    readout ``k`` uses ``theta[k]``.
    """
    theta = np.asarray(theta, dtype=float)
    r_tilde = np.asarray(r_tilde, dtype=float)
    s_tilde = np.asarray(s_tilde, dtype=float)
    n = r_tilde.size
    if s_tilde.size != n or theta.size not in (n, n + 1):
        raise ValueError(f"length mismatch: theta {theta.size}, r~ {n}, s~ {s_tilde.size}")
    x, z = np.cos(theta[:n]), np.sin(theta[:n])
    rx = x + (-z * r_tilde + x * s_tilde)
    rz = z + (x * r_tilde + z * s_tilde)
    return EmulatedReadouts(theta, r_tilde, s_tilde, rx, rz, dt, tau, seed, trajectory, tuple(provenance))


def reconstruction_identity_residual(rd: EmulatedReadouts) -> np.ndarray:
    """``|(1 - x^2) r~_x - x z r~_z + z r~|`` at every step."""
    x, z = rd.x[: len(rd)], rd.z[: len(rd)]
    return np.abs((1.0 - x * x) * rd.r_x - x * z * rd.r_z + z * rd.r_tilde)


def _tau_of(config: SimulationConfig) -> float:
    if config.tau_x != config.tau_z:
        raise UnequalMeasurementTimesError(
            f"tau_x = {config.tau_x} differs from tau_z = {config.tau_z}; the classical emulation "
            "is only valid for equal measurement times")
    return config.tau_x


def emulate(theta0: float = 0.0, config: SimulationConfig | None = None, subjective: bool = True) -> EmulatedReadouts:
    """Run the classical spin and produce effective readouts.

    ``r~`` and ``s~`` are drawn from separate streams keyed by
    ``(seed, trajectory)``; with ``subjective=False`` the ``s~`` stream is never
    touched and ``s~ = 0``.  The spin path does not depend on ``subjective``.
    """
    cfg = config or SimulationConfig()
    tau = _tau_of(cfg)
    _check_ratio(cfg.dt, tau)
    n = cfg.n_steps
    sigma = math.sqrt(tau / cfg.dt)
    r_stream = NoiseStream(cfg.seed, cfg.trajectory, Channel.R_TILDE)
    r_tilde = sigma * r_stream.standard_normal(n)
    theta = np.cumsum(np.concatenate(([float(theta0)], r_tilde * (cfg.dt / tau))))
    if subjective:
        s_stream = NoiseStream(cfg.seed, cfg.trajectory, Channel.S_TILDE)
        s_tilde = sigma * s_stream.standard_normal(n)
        prov = (r_stream.stream_id, s_stream.stream_id)
    else:
        s_tilde = np.zeros(n)
        prov = (r_stream.stream_id, "s~ off")
    return make_effective_readouts(theta, r_tilde, s_tilde, cfg.dt, tau, cfg.seed, cfg.trajectory, prov)


def emulate_ensemble(theta0: float, n_traj: int, config: SimulationConfig | None = None,
                     subjective: bool = True, first: int = 0) -> list[EmulatedReadouts]:
    cfg = config or SimulationConfig()
    return [emulate(theta0, replace(cfg, trajectory=first + i), subjective) for i in range(int(n_traj))]


def diffusion_rate(runs: list[EmulatedReadouts], t_max: float | None = None) -> tuple[float, float]:
    """Growth rate of ``Var[theta(t) - theta(0)]`` and its standard error.

    Fits ``Var = D t`` through the origin on the ensemble variance.  The
    error comes from splitting the ensemble into 10 groups.
    """
    if len(runs) < 20:
        raise ValueError("need at least 20 runs")
    dt = runs[0].dt
    disp = np.array([r.theta - r.theta[0] for r in runs])
    if t_max is not None:
        disp = disp[:, : int(round(t_max / dt)) + 1]
    t = dt * np.arange(disp.shape[1])

    def fit(d):
        v = d.var(axis=0, ddof=1)
        return float(t @ v / (t @ t))

    groups = [fit(g) for g in np.array_split(disp, 10)]
    return fit(disp), float(np.std(groups, ddof=1) / math.sqrt(len(groups)))


def third_party_reconstruct(rd: EmulatedReadouts, initial, scheme: str | None = None) -> TrajectoryRecord:
    """Integrate the qubit Bloch equations with the effective readouts.

    ``scheme`` defaults to ``"geodesic"`` for pure initial states, a forward
    step along great circles that follows a true-initialized spin to rounding
    error, and to ``"stratonovich"`` otherwise.  Any scheme accepted by
    :func:`xzmonitor.integrators.replay` may be requested.
    """
    s0 = initial if isinstance(initial, BlochState) else BlochState.from_array(initial)
    if scheme is None:
        scheme = "geodesic" if s0.is_pure else "stratonovich"
    return replay(rd.as_readout_record(), s0, scheme)


def emulator_lg_suite(rd, phis=(math.pi / 4, -math.pi / 4), times=(0.1,), window=None) -> list:
    """Continuous LG combination on emulated readouts."""
    from .leggett_garg import lg_curve

    return [res for phi in phis for res in lg_curve(rd, phi, times, window)]


def emulator_csv(rd: EmulatedReadouts, stride: int = 1, extra_header=()) -> str:
    """CSV ``t,theta,x,z,r_tilde,s_tilde,rx_eff,rz_eff``."""
    idx = np.arange(0, len(rd), int(stride))
    header = [f"seed={rd.seed}, trajectory={rd.trajectory}, dt={rd.dt!r}, tau={rd.tau!r}, stride={stride}",
              f"streams={';'.join(map(str, rd.provenance))}", seed_layout(rd.seed if rd.seed is not None else 0),
              *extra_header]
    th = rd.theta[idx]
    return csv_text(["t", "theta", "x", "z", "r_tilde", "s_tilde", "rx_eff", "rz_eff"],
                    [rd.dt * idx, th, np.cos(th), np.sin(th), rd.r_tilde[idx], rd.s_tilde[idx],
                     rd.r_x[idx], rd.r_z[idx]], header)
