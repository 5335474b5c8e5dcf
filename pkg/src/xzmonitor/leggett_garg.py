"""Leggett-Garg tests built from the rotated readouts.

A macrorealist reading of the two readouts treats

    r_phi = cos(phi) r_x + sin(phi) r_z

as a noisy record of a spin component.  Under noninvasive measurability the
combination

    K(t) = <r_x(0) r_phi(t)> + <r_phi(t) r_z(2t)> - <r_x(0) r_z(2t)>

cannot exceed 1, while the monitored qubit gives
``K(t) = (cos phi + sin phi) exp(-t/2tau)``, up to ``sqrt(2)`` at
``phi = pi/4`` and with no Hamiltonian at all.

:func:`projective_lg` is the textbook three-time test with projective sigma_z
measurements on a Rabi-driven qubit, ``H = (Omega/2) sigma_x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .artifacts import csv_text
from .noise import Channel, NoiseStream
from .qubit_state import SIGMA_X, BlochState, bloch_to_density
from .statistics import (
    DEFAULT_BATCHES,
    CorrelationEstimate,
    _common_tau,
    correlate_series,
    exp_decay,
    grouped_lag_sums,
    records_of,
)

__all__ = [
    "LGResult",
    "RotatedReadout",
    "lg_combination",
    "lg_csv",
    "lg_curve",
    "lg_theory",
    "phi_autocorrelator",
    "phi_orthogonal_correlator",
    "phi_sweep",
    "projective_lg",
    "projective_theory",
    "rotate_readout",
    "violation_boundary",
]


@dataclass(frozen=True)
class RotatedReadout:
    phi: float
    samples: np.ndarray
    source: object

    @property
    def dt(self) -> float:
        return self.source.dt


@dataclass(frozen=True)
class LGResult:
    lhs: float
    stderr: float
    t: float
    phi: float
    theory: float = float("nan")
    bound: float = 1.0
    label: str = ""

    @property
    def violated(self) -> bool:
        return self.lhs - 3.0 * self.stderr > self.bound

    @property
    def z(self) -> float:
        """Distance of the estimate above the bound, in standard errors."""
        return (self.lhs - self.bound) / self.stderr if self.stderr > 0 else math.copysign(math.inf, self.lhs - self.bound)


def rotate_readout(rec, phi: float) -> RotatedReadout:
    """``r_phi = cos(phi) r_x + sin(phi) r_z`` sample by sample."""
    (ro,) = records_of(rec)
    return RotatedReadout(float(phi), math.cos(phi) * ro.r_x + math.sin(phi) * ro.r_z, ro)


def _rotated_pairs(rec, phi_a, phi_b, burn_in):
    records = records_of(rec)
    skip = int(round(burn_in / records[0].dt))
    ca, sa, cb, sb = math.cos(phi_a), math.sin(phi_a), math.cos(phi_b), math.sin(phi_b)
    pairs = [((ca * r.r_x + sa * r.r_z)[skip:], (cb * r.r_x + sb * r.r_z)[skip:]) for r in records]
    return records, pairs


def phi_autocorrelator(rec, phi: float, max_lag: float = 6.0, bin_width: float | None = None,
                       n_batches: int = DEFAULT_BATCHES, burn_in: float = 0.0) -> CorrelationEstimate:
    """``<r_phi(0) r_phi(t)>``; theory ``exp(-t/2tau)`` for every ``phi``."""
    records, pairs = _rotated_pairs(rec, phi, phi, burn_in)
    tau = _common_tau(records)
    return correlate_series(pairs, records[0].dt, max_lag, bin_width, n_batches,
                            exp_decay(tau) if tau else None, f"<r_phi(0) r_phi(t)>, phi={phi:.6g}")


def phi_orthogonal_correlator(rec, phi: float, max_lag: float = 6.0, bin_width: float | None = None,
                              n_batches: int = DEFAULT_BATCHES, burn_in: float = 0.0) -> CorrelationEstimate:
    """``<r_phi(0) r_{phi + pi/2}(t)>``; theory 0."""
    records, pairs = _rotated_pairs(rec, phi, phi + 0.5 * math.pi, burn_in)
    theory = (lambda t: np.zeros_like(t)) if _common_tau(records) else None
    return correlate_series(pairs, records[0].dt, max_lag, bin_width, n_batches, theory,
                            f"<r_phi(0) r_phi+pi/2(t)>, phi={phi:.6g}")


def phi_sweep(rec, phis, max_lag: float = 6.0, bin_width: float | None = 0.5, orthogonal: bool = False,
              n_batches: int = DEFAULT_BATCHES) -> dict:
    """Correlators over a grid of angles, keyed by ``phi``."""
    fn = phi_orthogonal_correlator if orthogonal else phi_autocorrelator
    return {float(p): fn(rec, p, max_lag, bin_width, n_batches) for p in phis}


def lg_theory(phi, t, tau: float = 1.0):
    """``(cos phi + sin phi) exp(-t/2tau)``."""
    return (np.cos(phi) + np.sin(phi)) * np.exp(-np.asarray(t) / (2.0 * tau))


def _window(t: float, dt: float, window: float | None) -> tuple[int, int]:
    k = int(round(t / dt))
    if k < 1:
        raise ValueError(f"t = {t} is shorter than one step")
    half = min(0.05, 0.5 * t) if window is None else window
    h = min(int(round(half / dt)), k - 1)
    return k, h


class _LagTable:
    """Per-batch raw correlators needed by the LG combination at one angle."""

    def __init__(self, rec, phi, max_k, n_batches):
        records = records_of(rec)
        self.dt = records[0].dt
        self.tau = _common_tau(records)
        c, s = math.cos(phi), math.sin(phi)
        rp = [c * r.r_x + s * r.r_z for r in records]
        self.xp = self._table([(r.r_x, p) for r, p in zip(records, rp)], max_k, n_batches)
        self.pz = self._table([(p, r.r_z) for r, p in zip(records, rp)], max_k, n_batches)
        self.xz = self._table([(r.r_x, r.r_z) for r in records], max_k, n_batches)

    @staticmethod
    def _table(pairs, max_k, n_batches):
        sums, counts = grouped_lag_sums(pairs, max_k, n_batches)
        pooled = sums.sum(axis=0) / counts.sum(axis=0)
        return sums / counts, pooled

    def combination(self, k, h):
        ks = np.arange(k - h, k + h + 1)
        per_batch = self.xp[0][:, ks] + self.pz[0][:, ks] - self.xz[0][:, 2 * ks]
        pooled = self.xp[1][ks] + self.pz[1][ks] - self.xz[1][2 * ks]
        nb = per_batch.shape[0]
        return float(pooled.mean()), float(per_batch.mean(axis=1).std(ddof=1) / math.sqrt(nb)), ks


def lg_curve(rec, phi: float, times, window: float | None = None,
             n_batches: int = DEFAULT_BATCHES) -> list[LGResult]:
    """LG combination at each lag in ``times``.

    Each value averages the raw-lag combination over ``t +- window`` (default
    half-width ``min(0.05, t/2)`` in time units, never touching lag 0), with
    the theory curve averaged over the same lags.  Standard errors come from
    batch means of the whole combination, so correlations between the three
    terms are accounted for.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    records = records_of(rec)
    dt = records[0].dt
    windows = [_window(t, dt, window) for t in times]
    max_k = max(2 * (k + h) for k, h in windows)
    table = _LagTable(records, phi, max_k, n_batches)
    out = []
    for t, (k, h) in zip(times, windows):
        lhs, se, ks = table.combination(k, h)
        th = float(lg_theory(phi, ks * dt, table.tau).mean()) if table.tau else float("nan")
        out.append(LGResult(lhs, se, float(t), float(phi), th, 1.0, "continuous"))
    return out


def lg_combination(rec, phi: float, t: float, window: float | None = None,
                   n_batches: int = DEFAULT_BATCHES) -> LGResult:
    """``<r_x(0) r_phi(t)> + <r_phi(t) r_z(2t)> - <r_x(0) r_z(2t)>`` at one ``t``.

    Uses stationary lag estimates, so ``<r_phi(t) r_z(2t)>`` is the lag-``t``
    correlator of ``r_phi`` with ``r_z``.
    """
    return lg_curve(rec, phi, [t], window, n_batches)[0]


def violation_boundary(results: list[LGResult], span: float = 0.25) -> float:
    """Lag at which the LG combination first falls through the bound.

    Finds the first sign change of ``lhs - bound`` and fits a straight line to
    the points within ``span`` of it; returns the root of that line, or NaN if
    there is no crossing.
    """
    t = np.array([r.t for r in results])
    d = np.array([r.lhs - r.bound for r in results])
    order = np.argsort(t)
    t, d = t[order], d[order]
    change = np.nonzero((d[:-1] > 0) & (d[1:] <= 0))[0]
    if change.size == 0:
        return float("nan")
    i = change[0]
    guess = t[i] - d[i] * (t[i + 1] - t[i]) / (d[i + 1] - d[i])
    near = np.abs(t - guess) <= span
    if near.sum() < 2:
        return float(guess)
    slope, icept = np.polyfit(t[near], d[near], 1)
    return float(-icept / slope) if slope != 0 else float(guess)


def projective_theory(omega: float, delta_t: float) -> float:
    """``2 cos(Omega dt) - cos(2 Omega dt)``."""
    a = omega * delta_t
    return 2.0 * math.cos(a) - math.cos(2.0 * a)


def _evolve(rho, omega, t):
    u = expm(-0.5j * omega * t * SIGMA_X)
    return u @ rho @ u.conj().T


def _pair_correlator(rho0, omega, t_i, t_j, n, stream):
    """Two projective sigma_z measurements at ``t_i < t_j`` on fresh copies of ``rho0``."""
    rho_i = _evolve(rho0, omega, t_i)
    p_up = float(np.real(rho_i[0, 0]))
    u = stream.uniform(2 * n)
    a = np.where(u[:n] < p_up, 1.0, -1.0)
    # collapsed state |a> evolved over t_j - t_i has <sigma_z> = a cos(Omega dt)
    up = _evolve(np.diag([1.0, 0.0]).astype(complex), omega, t_j - t_i)
    p_same = float(np.real(up[0, 0]))
    b = np.where(u[n:] < p_same, a, -a)
    v = a * b
    mean = float(v.mean())
    return mean, float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else float("inf")


def projective_lg(omega: float, delta_t: float, n_shots: int, seed: int = 0,
                  initial=(0.0, 0.0, 1.0)) -> LGResult:
    """Three-time LG test with projective sigma_z measurements.

    Times are ``0, delta_t, 2 delta_t``.  Each two-time correlator comes from
    its own sub-ensemble of ``n_shots`` runs, each with exactly two
    measurements sampled by the Born rule.
    """
    if int(n_shots) < 1:
        raise ValueError("n_shots must be >= 1")
    n = int(n_shots)
    rho0 = bloch_to_density(initial if isinstance(initial, BlochState) else BlochState.from_array(initial)).matrix
    times = (0.0, delta_t, 2.0 * delta_t)
    pairs = ((0, 1), (1, 2), (0, 2))
    corr = []
    for p, (i, j) in enumerate(pairs):
        stream = NoiseStream(seed, p, Channel.PROJECTIVE)
        corr.append(_pair_correlator(rho0, omega, times[i], times[j], n, stream))
    lhs = corr[0][0] + corr[1][0] - corr[2][0]
    stderr = math.sqrt(sum(se ** 2 for _, se in corr))
    return LGResult(lhs, stderr, float(delta_t), float("nan"), projective_theory(omega, delta_t), 1.0,
                    f"projective, omega={omega:.6g}")


def lg_csv(results, header=()) -> str:
    """CSV ``phi,t,lhs,stderr,theory,bound,violated``."""
    cols = ["phi", "t", "lhs", "stderr", "theory", "bound", "violated"]
    data = [np.array([getattr(r, c) for r in results], dtype=float) for c in cols[:-1]]
    data.append(np.array([r.violated for r in results], dtype=object))
    return csv_text(cols, data, header)
