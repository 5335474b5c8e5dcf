"""Discrete Gaussian measurement of sigma_x and sigma_z.

One step of duration ``dt`` of a measurement with characteristic time ``tau``
has the Kraus operator

    M(r) = (dt / 2 pi tau)^(1/4) exp(-(dt / 2 tau) (r - A)^2 / 2)

and readouts are drawn from ``P(r | rho) = Tr[rho M(r)^dag M(r)]``, a mixture
of two Gaussians of variance ``tau/dt`` centred on the eigenvalues ``+-1``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .noise import NoiseStream
from .qubit_state import (
    SIGMA_I,
    SIGMA_X,
    SIGMA_Z,
    BlochState,
    bloch_ball_check,
    bloch_to_density,
    density_to_bloch,
)

__all__ = [
    "DT_OVER_TAU_MAX",
    "DT_OVER_TAU_WARN",
    "MeasurementChannel",
    "joint_step",
    "joint_update",
    "kraus_operator",
    "kraus_update",
    "kraus_update_matrix",
    "povm_normalization_check",
    "readout_density",
    "sample_readout",
]

DT_OVER_TAU_MAX = 0.1
DT_OVER_TAU_WARN = 0.02

ORDERINGS = ("xz", "zx", "symmetric")


@dataclass(frozen=True)
class MeasurementChannel:
    """Weak measurement of ``sigma_x`` or ``sigma_z`` over steps of ``dt``."""

    observable: str
    tau: float
    dt: float

    def __post_init__(self):
        obs = str(self.observable).lower()
        if obs not in ("x", "z"):
            raise ValueError(f"observable must be 'x' or 'z', got {self.observable!r}")
        object.__setattr__(self, "observable", obs)
        if not (self.tau > 0 and self.dt > 0):
            raise ValueError("tau and dt must be positive")
        ratio = self.dt / self.tau
        if ratio > DT_OVER_TAU_MAX:
            raise ValueError(f"dt/tau = {ratio:g} exceeds {DT_OVER_TAU_MAX}")
        if ratio > DT_OVER_TAU_WARN:
            warnings.warn(f"dt/tau = {ratio:g} is above {DT_OVER_TAU_WARN}; "
                          "first-order splitting errors may be visible", stacklevel=3)

    @property
    def operator(self) -> np.ndarray:
        return SIGMA_X if self.observable == "x" else SIGMA_Z

    @property
    def sigma(self) -> float:
        """Readout standard deviation ``sqrt(tau/dt)`` about an eigenvalue."""
        return float(np.sqrt(self.tau / self.dt))

    def component(self, s: BlochState) -> float:
        return s.x if self.observable == "x" else s.z


def _check_state(s: BlochState):
    if not isinstance(s, BlochState):
        raise TypeError(f"expected BlochState, got {type(s).__name__}")
    if not bloch_ball_check(s):
        raise ValueError(f"invalid state, |s|^2 = {s.norm2:.12g} > 1")


def sample_readout(s: BlochState, ch: MeasurementChannel, stream: NoiseStream) -> float:
    """Draw one readout from the two-Gaussian mixture ``Tr[rho E(r)]``.

    With probability ``(1 + a)/2`` the readout is centred on ``+1``, otherwise
    on ``-1``, where ``a`` is the Bloch component along the measured axis.
    """
    _check_state(s)
    a = ch.component(s)
    u = float(stream.uniform())
    g = float(stream.standard_normal())
    centre = 1.0 if u < 0.5 * (1.0 + a) else -1.0
    return centre + ch.sigma * g


def readout_density(r, a: float, ch: MeasurementChannel):
    """Probability density ``P(r | a)`` for eigenvalue ``a``."""
    k = ch.dt / ch.tau
    return np.sqrt(k / (2 * np.pi)) * np.exp(-0.5 * k * (np.asarray(r) - a) ** 2)


def kraus_update(s: BlochState, r: float, ch: MeasurementChannel, fraction: float = 1.0) -> BlochState:
    """Posterior state after observing readout ``r``.

    Uses the closed form of ``M(r) rho M(r)^dag / Tr[rho E(r)]``; with
    ``w = r dt / tau`` and measurement along z,

        z' = (z + tanh w) / (1 + z tanh w)
        x' = x / (cosh w (1 + z tanh w)),  y' likewise.

    ``fraction`` scales the measurement duration (``fraction * dt``); the
    symmetric splitting uses half-steps with the same readout.
    """
    _check_state(s)
    if not np.isfinite(r):
        raise ValueError(f"readout must be finite, got {r!r}")
    w = r * fraction * ch.dt / ch.tau
    t = np.tanh(w)
    if ch.observable == "z":
        d = 1.0 + s.z * t
        c = np.cosh(w) * d
        return BlochState(s.x / c, s.y / c, (s.z + t) / d)
    d = 1.0 + s.x * t
    c = np.cosh(w) * d
    return BlochState((s.x + t) / d, s.y / c, s.z / c)


def kraus_operator(r: float, ch: MeasurementChannel, fraction: float = 1.0) -> np.ndarray:
    """Matrix ``M(r)`` built by exponentiating ``-(dt/4tau)(r - A)^2``."""
    dt = fraction * ch.dt
    shifted = r * SIGMA_I - ch.operator
    return (dt / (2 * np.pi * ch.tau)) ** 0.25 * expm(-(dt / (4 * ch.tau)) * (shifted @ shifted))


def kraus_update_matrix(s: BlochState, r: float, ch: MeasurementChannel, fraction: float = 1.0) -> BlochState:
    """Generic matrix version of :func:`kraus_update` (kept as a cross-check)."""
    rho = bloch_to_density(s).matrix
    m = kraus_operator(r, ch, fraction)
    out = m @ rho @ m.conj().T
    out = out / np.trace(out)
    return density_to_bloch(0.5 * (out + out.conj().T))


def _orders(ordering: str):
    if ordering not in ORDERINGS:
        raise ValueError(f"ordering must be one of {ORDERINGS}, got {ordering!r}")


def joint_update(s: BlochState, r_x: float, r_z: float, chx: MeasurementChannel,
                 chz: MeasurementChannel, ordering: str = "xz") -> BlochState:
    """Apply both Kraus updates for given readouts in the requested order."""
    _orders(ordering)
    if ordering == "xz":
        return kraus_update(kraus_update(s, r_x, chx), r_z, chz)
    if ordering == "zx":
        return kraus_update(kraus_update(s, r_z, chz), r_x, chx)
    s = kraus_update(s, r_x, chx, 0.5)
    s = kraus_update(s, r_z, chz)
    return kraus_update(s, r_x, chx, 0.5)


def joint_step(s: BlochState, chx: MeasurementChannel, chz: MeasurementChannel,
               streams: tuple[NoiseStream, NoiseStream], ordering: str = "xz"):
    """One sequential two-observable step.

    With the default ``"xz"`` ordering, ``r_x`` is sampled from the pre-step
    state and applied, then ``r_z`` is sampled from the intermediate state and
    applied, giving ``M_z M_x rho M_x^dag M_z^dag`` normalized.

    Returns
    -------
    (BlochState, float, float)
        Posterior state, ``r_x`` and ``r_z``.
    """
    _orders(ordering)
    if chx.observable != "x" or chz.observable != "z":
        raise ValueError("joint_step expects an x channel and a z channel")
    if chx.dt != chz.dt:
        raise ValueError(f"channel steps differ: {chx.dt} vs {chz.dt}")
    stream_x, stream_z = streams
    if ordering == "zx":
        r_z = sample_readout(s, chz, stream_z)
        s = kraus_update(s, r_z, chz)
        r_x = sample_readout(s, chx, stream_x)
        return kraus_update(s, r_x, chx), r_x, r_z
    r_x = sample_readout(s, chx, stream_x)
    s = kraus_update(s, r_x, chx, 0.5 if ordering == "symmetric" else 1.0)
    r_z = sample_readout(s, chz, stream_z)
    s = kraus_update(s, r_z, chz)
    if ordering == "symmetric":
        s = kraus_update(s, r_x, chx, 0.5)
    return s, r_x, r_z


def povm_normalization_check(ch: MeasurementChannel, grid, strict: bool = True) -> float:
    """Largest deviation of ``integral P(r|a) dr`` from 1 over ``a = +-1``.

    The integral is a composite Simpson rule on ``grid``.  With ``strict``
    the grid must span at least 12 readout standard deviations; pass
    ``strict=False`` to measure the tail mass lost by a truncated grid.
    """
    from scipy.integrate import simpson

    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be a strictly increasing 1-D array of >= 3 points")
    span = grid[-1] - grid[0]
    if strict and span < 12 * ch.sigma:
        raise ValueError(f"grid spans {span / ch.sigma:.2f} standard deviations, need >= 12")
    return max(abs(simpson(readout_density(grid, a, ch), x=grid) - 1.0) for a in (1.0, -1.0))

