"""Seeded, splittable Gaussian white-noise streams.

Every stream is keyed by ``(seed, trajectory, channel)``.  The key is fed to
:class:`numpy.random.SeedSequence` as a spawn key and drives a counter-based
Philox generator, so any trajectory's noise can be regenerated in any worker
process without coordination.

A discretized white noise sample over a step ``dt`` has variance ``1/dt``,
which makes ``sum(xi * dt)`` a Wiener increment with variance ``dt``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

__all__ = [
    "Channel",
    "NoiseStream",
    "WhiteNoiseIncrement",
    "next_increment",
    "rotate_noise",
    "seed_layout",
]


class Channel(IntEnum):
    """Channel tags; a stream id is the pair ``(trajectory, channel)``."""

    XI_X = 0
    XI_Z = 1
    R_TILDE = 2
    S_TILDE = 3
    PROJECTIVE = 4


SEED_LAYOUT = "philox(SeedSequence(seed, spawn_key=(trajectory, channel, sub)))"


def seed_layout(seed: int) -> str:
    """One-line description of the stream layout, for file headers."""
    channels = ",".join(f"{c.name.lower()}={int(c)}" for c in Channel)
    return f"seed={int(seed)}; layout={SEED_LAYOUT}; channels={channels}; sub=0:gauss,1:select"


@dataclass(frozen=True)
class WhiteNoiseIncrement:
    """One sample of discretized white noise (variance ``1/step``)."""

    value: float
    step: float


class NoiseStream:
    """Reproducible source of Gaussian (and mixture-selection uniform) draws.

    Parameters
    ----------
    seed : int
        Global 64-bit seed.
    trajectory : int
        Trajectory index.
    channel : Channel or int
        Channel tag.

    Notes
    -----
    Gaussian and uniform draws come from two separate sub-generators, so a
    block draw of ``n`` samples equals ``n`` successive single draws.
    """

    def __init__(self, seed: int, trajectory: int = 0, channel: int = Channel.XI_X):
        if not 0 <= int(seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = int(seed)
        self.trajectory = int(trajectory)
        self.channel = int(channel)
        self._gauss = self._make(0)
        self._select = self._make(1)

    def _make(self, sub: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.trajectory, self.channel, sub))
        return np.random.Generator(np.random.Philox(ss))

    @property
    def stream_id(self) -> tuple[int, int]:
        return (self.trajectory, self.channel)

    def __repr__(self):
        return f"NoiseStream(seed={self.seed}, trajectory={self.trajectory}, channel={self.channel})"

    def standard_normal(self, n: int | None = None):
        return self._gauss.standard_normal(n)

    def uniform(self, n: int | None = None):
        return self._select.random(n)

    def increments(self, n: int, dt: float) -> np.ndarray:
        """``n`` white-noise samples with variance ``1/dt``."""
        if dt <= 0:
            raise ValueError(f"time step must be positive, got {dt}")
        return self.standard_normal(n) / np.sqrt(dt)


def next_increment(stream: NoiseStream, dt: float) -> WhiteNoiseIncrement:
    """Draw the next white-noise sample, ``N(0, 1/dt)``."""
    if dt <= 0:
        raise ValueError(f"time step must be positive, got {dt}")
    return WhiteNoiseIncrement(float(stream.standard_normal()) / np.sqrt(dt), float(dt))


def rotate_noise(xi_x, xi_z, phi: float):
    """Rotated noise ``cos(phi) xi_x + sin(phi) xi_z``.

    Works on :class:`WhiteNoiseIncrement` pairs (steps must match) or on
    plain arrays of samples.
    """
    c, s = np.cos(phi), np.sin(phi)
    if isinstance(xi_x, WhiteNoiseIncrement) or isinstance(xi_z, WhiteNoiseIncrement):
        if not (isinstance(xi_x, WhiteNoiseIncrement) and isinstance(xi_z, WhiteNoiseIncrement)):
            raise TypeError("rotate_noise needs two WhiteNoiseIncrement values or two arrays")
        if xi_x.step != xi_z.step:
            raise ValueError(f"mismatched steps: {xi_x.step} vs {xi_z.step}")
        return WhiteNoiseIncrement(c * xi_x.value + s * xi_z.value, xi_x.step)
    return c * np.asarray(xi_x) + s * np.asarray(xi_z)
