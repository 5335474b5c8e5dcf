"""Qubit states as Bloch vectors, with a 2x2 density-matrix view.

The Bloch vector is the working representation everywhere; the density matrix
is only built for the generic Kraus path and for projective measurements.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EPS_BALL",
    "EPS_PURITY",
    "SIGMA_I",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "BlochState",
    "DensityMatrixView",
    "bloch_ball_check",
    "bloch_to_density",
    "density_to_bloch",
    "project_direction",
]

EPS_BALL = 1e-9
EPS_PURITY = 1e-9
EPS_TRACE = 1e-9
EPS_HERMITIAN = 1e-9
EPS_PSD = 1e-9

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class BlochState:
    """Qubit state as real Bloch coordinates ``(x, y, z)``."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"Bloch coordinate {name} is not finite: {value!r}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, v) -> "BlochState":
        x, y, z = np.asarray(v, dtype=float).reshape(3)
        return cls(x, y, z)

    @classmethod
    def from_angle(cls, theta: float) -> "BlochState":
        """Pure state in the x-z plane with ``x = cos(theta)``, ``z = sin(theta)``."""
        return cls(np.cos(theta), 0.0, np.sin(theta))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def norm2(self) -> float:
        return self.x * self.x + self.y * self.y + self.z * self.z

    @property
    def is_pure(self) -> bool:
        return abs(self.norm2 - 1.0) <= EPS_PURITY


@dataclass(frozen=True)
class DensityMatrixView:
    """Hermitian, unit-trace, positive 2x2 matrix in the sigma_z eigenbasis."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"density matrix must be 2x2, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("density matrix has non-finite entries")
        if np.max(np.abs(m - m.conj().T)) > EPS_HERMITIAN:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > EPS_TRACE:
            raise ValueError(f"density matrix trace {np.trace(m).real:.3g} != 1")
        if np.linalg.det(m).real < -EPS_PSD:
            raise ValueError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __getitem__(self, index):
        return self.matrix[index]


def bloch_to_density(s: BlochState) -> DensityMatrixView:
    """Return ``(I + x sx + y sy + z sz) / 2``."""
    if not bloch_ball_check(s):
        raise ValueError(f"state outside the Bloch ball: |s|^2 = {s.norm2:.12g}")
    rho = 0.5 * (SIGMA_I + s.x * SIGMA_X + s.y * SIGMA_Y + s.z * SIGMA_Z)
    return DensityMatrixView(rho)


def density_to_bloch(m: DensityMatrixView | np.ndarray) -> BlochState:
    """Bloch coordinates ``Tr[m sigma_i]`` of a density matrix."""
    if not isinstance(m, DensityMatrixView):
        m = DensityMatrixView(m)
    rho = m.matrix
    return BlochState(
        np.trace(rho @ SIGMA_X).real,
        np.trace(rho @ SIGMA_Y).real,
        np.trace(rho @ SIGMA_Z).real,
    )


def project_direction(s: BlochState, phi: float) -> float:
    """Component ``cos(phi) x + sin(phi) z`` along direction ``phi`` in the x-z plane."""
    return np.cos(phi) * s.x + np.sin(phi) * s.z


def bloch_ball_check(s: BlochState | np.ndarray, eps: float = EPS_BALL) -> bool:
    """True when ``x^2 + y^2 + z^2 <= 1 + eps``.

    Accepts a single state or an ``(n, 3)`` array of states, in which case
    every row must pass.
    """
    if isinstance(s, BlochState):
        return s.norm2 <= 1.0 + eps
    v = np.asarray(s, dtype=float)
    return bool(np.all(np.sum(v * v, axis=-1) <= 1.0 + eps))
