"""Trajectory propagators for jointly monitored sigma_x and sigma_z.

Three schemes are provided:

``kraus``
    Chain of discrete Kraus updates with readouts drawn from the exact
    two-Gaussian mixture.  This is the reference scheme.
``stratonovich``
    Heun integration of the Bloch equations

        dx/dt = (1 - x^2) r_x/tau_x - x z r_z/tau_z
        dy/dt = -y x r_x/tau_x - y z r_z/tau_z
        dz/dt = (1 - z^2) r_z/tau_z - x z r_x/tau_x

    with each readout ``r = a + sqrt(tau) xi`` held constant over the step.
``ito``
    Euler-Maruyama integration of the Ito master equation.  In Bloch form the
    Lindblad terms are ``dx = -x dt / 2tau_z``, ``dy = -y dt (1/2tau_x + 1/2tau_z)``,
    ``dz = -z dt / 2tau_x``, and the innovation terms have the same
    coefficients as above with ``xi / sqrt(tau)`` in place of ``r / tau``.

Time is measured in the same units as ``tau``.  Readout ``k`` is acquired
over ``[k dt, (k+1) dt]`` from the state at ``k dt`` and is stamped ``k dt``.
"""
from __future__ import annotations

import logging
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as K
from .artifacts import csv_text, write_text
from .measurement import DT_OVER_TAU_MAX, DT_OVER_TAU_WARN, ORDERINGS
from .noise import Channel, NoiseStream, seed_layout
from .qubit_state import EPS_PURITY, BlochState, bloch_ball_check

__all__ = [
    "SCHEMES",
    "ReadoutRecord",
    "SimulationConfig",
    "TrajectoryRecord",
    "replay",
    "run",
    "run_ensemble",
    "run_ito",
    "run_kraus",
    "run_stratonovich",
    "trajectory_csv",
]

log = logging.getLogger(__name__)

SCHEMES = ("kraus", "stratonovich", "ito")
_ORDER_CODE = {"xz": K.ORDER_XZ, "zx": K.ORDER_ZX, "symmetric": K.ORDER_SYMMETRIC}
# bytes kept per step: readouts, innovations and a full-resolution state
_BYTES_PER_STEP = 8 * (2 + 2 + 3)


@dataclass(frozen=True)
class SimulationConfig:
    """Parameters shared by every propagator.

    ``duration`` and ``dt`` are in the same time units as ``tau_x``/``tau_z``.
    ``ordering`` only affects the Kraus scheme; ``renormalize`` only the SDE
    schemes.
    """

    dt: float = 0.01
    duration: float = 10.0
    tau_x: float = 1.0
    tau_z: float = 1.0
    seed: int = 0
    trajectory: int = 0
    ordering: str = "symmetric"
    renormalize: bool = True
    stride: int = 1
    keep_noise: bool = True

    def __post_init__(self):
        if not (self.dt > 0 and self.tau_x > 0 and self.tau_z > 0):
            raise ValueError("dt, tau_x and tau_z must be positive")
        if self.duration < self.dt:
            raise ValueError(f"duration {self.duration} shorter than one step {self.dt}")
        ratio = self.dt / min(self.tau_x, self.tau_z)
        if ratio > DT_OVER_TAU_MAX * (1 + 1e-12):
            raise ValueError(f"dt/tau = {ratio:g} exceeds {DT_OVER_TAU_MAX}")
        if ratio > DT_OVER_TAU_WARN * (1 + 1e-12):
            warnings.warn(f"dt/tau = {ratio:g} above {DT_OVER_TAU_WARN}", stacklevel=3)
        if self.ordering not in ORDERINGS:
            raise ValueError(f"ordering must be one of {ORDERINGS}")
        if int(self.stride) < 1:
            raise ValueError("stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    @property
    def equal_tau(self) -> bool:
        return self.tau_x == self.tau_z


@dataclass
class ReadoutRecord:
    """Raw readouts ``r_x[k]``, ``r_z[k]`` acquired over ``[k dt, (k+1) dt]``."""

    r_x: np.ndarray
    r_z: np.ndarray
    dt: float
    tau_x: float = 1.0
    tau_z: float = 1.0
    t0: float = 0.0
    seed: int | None = None
    trajectory: int | None = None

    def __post_init__(self):
        self.r_x = np.asarray(self.r_x, dtype=float)
        self.r_z = np.asarray(self.r_z, dtype=float)
        if self.r_x.shape != self.r_z.shape or self.r_x.ndim != 1:
            raise ValueError("r_x and r_z must be 1-D arrays of equal length")

    def __len__(self):
        return self.r_x.size

    @property
    def tau(self) -> float:
        if self.tau_x != self.tau_z:
            raise ValueError("record has unequal measurement times; use tau_x / tau_z")
        return self.tau_x

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))

    def channel(self, name: str) -> np.ndarray:
        if name == "x":
            return self.r_x
        if name == "z":
            return self.r_z
        raise ValueError(f"unknown readout channel {name!r}")

    def slice(self, start: int, stop: int | None = None) -> "ReadoutRecord":
        stop = len(self) if stop is None else stop
        return replace(self, r_x=self.r_x[start:stop], r_z=self.r_z[start:stop],
                       t0=self.t0 + start * self.dt)


@dataclass
class TrajectoryRecord:
    """States (every ``stride`` steps), full readouts and noise provenance.

    ``noise`` holds the innovations ``xi_k = (r_k - a_k) / sqrt(tau)`` with
    ``a_k`` the pre-step component, so that ``a_k + sqrt(tau) xi_k = r_k``.
    """

    states: np.ndarray
    readouts: ReadoutRecord
    scheme: str
    stride: int = 1
    seed: int | None = None
    trajectory: int | None = None
    noise: np.ndarray | None = None
    renorm_max: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def dt(self) -> float:
        return self.readouts.dt

    @property
    def times(self) -> np.ndarray:
        return self.readouts.t0 + self.dt * self.stride * np.arange(self.states.shape[0])

    @property
    def x(self):
        return self.states[:, 0]

    @property
    def y(self):
        return self.states[:, 1]

    @property
    def z(self):
        return self.states[:, 2]

    def final(self) -> BlochState:
        return BlochState.from_array(self.states[-1])

    def in_ball(self, eps: float = 1e-9) -> bool:
        return bloch_ball_check(self.states, eps)


def _initial(initial) -> np.ndarray:
    s = initial if isinstance(initial, BlochState) else BlochState.from_array(initial)
    if not bloch_ball_check(s):
        raise ValueError(f"initial state outside the Bloch ball (|s|^2 = {s.norm2:.12g})")
    return s.as_array()


def _renorm_mode(s0: np.ndarray, renormalize: bool) -> int:
    if not renormalize:
        return K.RENORM_OFF
    if abs(float(s0 @ s0) - 1.0) <= EPS_PURITY:
        return K.RENORM_SPHERE
    return K.RENORM_BALL


def _check_memory(n_steps: int, n_traj: int = 1, limit: float | None = None):
    limit = float(os.environ.get("XZMONITOR_MAX_BYTES", 4e9)) if limit is None else limit
    need = _BYTES_PER_STEP * n_steps * n_traj
    if need > limit:
        raise MemoryError(f"run needs ~{need / 1e9:.2f} GB, above the {limit / 1e9:.2f} GB limit; "
                          "shorten the run, raise the stride or set XZMONITOR_MAX_BYTES")


def _streams(cfg: SimulationConfig):
    return (NoiseStream(cfg.seed, cfg.trajectory, Channel.XI_X),
            NoiseStream(cfg.seed, cfg.trajectory, Channel.XI_Z))


def _record(states, rx, rz, noise, cfg, scheme, renorm_max=0.0, **meta) -> TrajectoryRecord:
    readouts = ReadoutRecord(rx, rz, cfg.dt, cfg.tau_x, cfg.tau_z, 0.0, cfg.seed, cfg.trajectory)
    if renorm_max > 0:
        log.debug("%s trajectory %s: largest renormalization correction %.3e",
                  scheme, cfg.trajectory, renorm_max)
    meta.setdefault("seed_layout", seed_layout(cfg.seed))
    return TrajectoryRecord(states, readouts, scheme, int(cfg.stride), cfg.seed, cfg.trajectory,
                            noise if cfg.keep_noise else None, float(renorm_max), meta)


def run_kraus(initial, config: SimulationConfig | None = None) -> TrajectoryRecord:
    """Compose Kraus steps over ``config.n_steps`` steps.

    Readouts are sampled from the exact two-Gaussian mixture.  The default
    ``ordering="symmetric"`` splits each step as half-x, z, half-x; use
    ``"xz"`` for the plain sequential ``M_z M_x`` product.
    """
    cfg = config or SimulationConfig()
    s0 = _initial(initial)
    n = cfg.n_steps
    _check_memory(n)
    sx, sz = _streams(cfg)
    gx, gz = sx.standard_normal(n), sz.standard_normal(n)
    ux, uz = sx.uniform(n), sz.uniform(n)
    states, rx, rz, nx, nz = K.kraus_chain(s0, gx, gz, ux, uz, cfg.dt, cfg.tau_x, cfg.tau_z,
                                           _ORDER_CODE[cfg.ordering], int(cfg.stride))
    noise = np.column_stack((nx, nz)) if cfg.keep_noise else None
    return _record(states, rx, rz, noise, cfg, "kraus", ordering=cfg.ordering)


def _sde(kernel, scheme, initial, cfg, noise=None):
    s0 = _initial(initial)
    n = cfg.n_steps
    _check_memory(n)
    if noise is None:
        sx, sz = _streams(cfg)
        xix, xiz = sx.increments(n, cfg.dt), sz.increments(n, cfg.dt)
    else:
        xix, xiz = (np.ascontiguousarray(a, dtype=float) for a in noise)
        if xix.shape != (n,) or xiz.shape != (n,):
            raise ValueError(f"noise arrays must have shape ({n},)")
    states, rx, rz, worst = kernel(s0, xix, xiz, cfg.dt, cfg.tau_x, cfg.tau_z,
                                   _renorm_mode(s0, cfg.renormalize), int(cfg.stride))
    noise = np.column_stack((xix, xiz)) if cfg.keep_noise else None
    return _record(states, rx, rz, noise, cfg, scheme, worst, renormalize=cfg.renormalize)


def run_stratonovich(initial, config: SimulationConfig | None = None, noise=None) -> TrajectoryRecord:
    """Heun integration of the Stratonovich Bloch equations.

    Pure initial states are projected back onto the unit sphere after every
    step (``renormalize=True``); the largest correction is stored in
    ``record.renorm_max``.  ``noise = (xi_x, xi_z)`` replaces the seeded
    streams with given white-noise samples (variance ``1/dt`` each).
    """
    return _sde(K.heun_chain, "stratonovich", initial, config or SimulationConfig(), noise)


def run_ito(initial, config: SimulationConfig | None = None, noise=None) -> TrajectoryRecord:
    """Euler-Maruyama integration of the Ito master equation in Bloch form.

    ``noise`` works as in :func:`run_stratonovich`; zero noise gives the
    deterministic Lindblad evolution.
    """
    return _sde(K.ito_chain, "ito", initial, config or SimulationConfig(), noise)


_RUNNERS = {"kraus": run_kraus, "stratonovich": run_stratonovich, "ito": run_ito}


def run(initial, config: SimulationConfig | None = None, scheme: str = "kraus") -> TrajectoryRecord:
    """Dispatch to one of :data:`SCHEMES`."""
    try:
        runner = _RUNNERS[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}") from None
    return runner(initial, config)


def replay(readouts: ReadoutRecord, initial, scheme: str = "kraus", ordering: str = "symmetric",
           renormalize: bool = True, stride: int = 1) -> TrajectoryRecord:
    """Integrate a given readout record with one of the schemes.

    ``scheme`` is one of :data:`SCHEMES` or ``"geodesic"``.  The Itô scheme
    uses the innovations ``(r - a)/sqrt(tau)`` of its own state.  The
    geodesic scheme takes forward Bloch-equation steps along great circles
    and needs a pure initial state.
    """
    s0 = _initial(initial)
    rx, rz = readouts.r_x, readouts.r_z
    args = (readouts.dt, readouts.tau_x, readouts.tau_z)
    worst = 0.0
    if scheme == "kraus":
        if ordering not in _ORDER_CODE:
            raise ValueError(f"ordering must be one of {ORDERINGS}")
        states = K.kraus_replay(s0, rx, rz, *args, _ORDER_CODE[ordering], int(stride))
    elif scheme == "stratonovich":
        states, worst = K.heun_replay(s0, rx, rz, *args, _renorm_mode(s0, renormalize), int(stride))
    elif scheme == "ito":
        states, worst = K.ito_replay(s0, rx, rz, *args, _renorm_mode(s0, renormalize), int(stride))
    elif scheme == "geodesic":
        if abs(float(s0 @ s0) - 1.0) > EPS_PURITY:
            raise ValueError("geodesic replay needs a pure initial state")
        states = K.geodesic_replay(s0, rx, rz, *args, int(stride))
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return TrajectoryRecord(states, readouts, scheme, int(stride), readouts.seed,
                            readouts.trajectory, None, float(worst), {"replay": True})


def _ensemble_member(args):
    initial, cfg, scheme = args
    return run(initial, cfg, scheme)


def run_ensemble(initial, n_traj: int, config: SimulationConfig | None = None, scheme: str = "kraus",
                 workers: int | None = None, first: int = 0) -> list[TrajectoryRecord]:
    """Independent trajectories ``first, ..., first + n_traj - 1``.

    Trajectory ``i`` draws from streams keyed by ``(seed, i, channel)``, so
    the records do not depend on ``workers`` or on execution order.
    """
    if int(n_traj) < 1:
        raise ValueError("n_traj must be >= 1")
    cfg = config or SimulationConfig()
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    _check_memory(cfg.n_steps, int(n_traj))
    jobs = [(initial, replace(cfg, trajectory=first + i), scheme) for i in range(int(n_traj))]
    if workers is None or workers <= 1 or n_traj == 1:
        return [_ensemble_member(job) for job in jobs]
    chunk = max(1, len(jobs) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_ensemble_member, jobs, chunksize=chunk))


def trajectory_csv(rec: TrajectoryRecord, extra_header=()) -> str:
    """CSV dump ``t,x,y,z,r_x,r_z`` at the state stride."""
    ro = rec.readouts
    tau = ro.tau_x if ro.tau_x == ro.tau_z else f"{ro.tau_x}/{ro.tau_z}"
    header = [f"seed={rec.seed}, dt={ro.dt!r}, tau={tau}, scheme={rec.scheme}, "
              f"trajectory={rec.trajectory}, stride={rec.stride}", *extra_header]
    n = min(rec.states.shape[0], (len(ro) - 1) // rec.stride + 1)
    idx = np.arange(n) * rec.stride
    s = rec.states[:n]
    return csv_text(["t", "x", "y", "z", "r_x", "r_z"],
                    [ro.t0 + ro.dt * idx, s[:, 0], s[:, 1], s[:, 2], ro.r_x[idx], ro.r_z[idx]], header)


def write_trajectory_csv(rec: TrajectoryRecord, path, extra_header=()):
    write_text(path, trajectory_csv(rec, extra_header))
