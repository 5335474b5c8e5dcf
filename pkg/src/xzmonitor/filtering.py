"""Model-independent tracking of the qubit from raw readouts.

The filter is an exponentially weighted moving average,

    y[k+1] = y[k] + (dt / tau_f) (r[k] - y[k]),    y[0] = r[0],

which needs no knowledge of the measurement model.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .artifacts import csv_text

__all__ = ["FilteredSignal", "TrackingMetrics", "ewma", "tracking_csv", "tracking_report"]


@dataclass(frozen=True)
class FilteredSignal:
    times: np.ndarray
    values: np.ndarray
    tau_f: float
    dt: float

    @property
    def out_of_range(self) -> np.ndarray:
        """Mask of samples outside ``[-1, 1]`` (noise leakage, not clipped)."""
        return np.abs(self.values) > 1.0

    @property
    def fraction_out_of_range(self) -> float:
        return float(self.out_of_range.mean())


def ewma(r, dt: float, tau_f: float, t0: float = 0.0) -> FilteredSignal:
    """Exponentially weighted moving average with time constant ``tau_f``.

    ``values[k]`` depends on ``r[0..k-1]`` only.
    """
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise ValueError("input must be a non-empty 1-D array")
    if not tau_f > dt:
        raise ValueError(f"filter time tau_f = {tau_f} must exceed dt = {dt}")
    alpha = dt / tau_f
    # y[k] = (1 - alpha) y[k-1] + alpha r[k-1]
    out, _ = lfilter([0.0, alpha], [1.0, -(1.0 - alpha)], r, zi=[r[0]])
    return FilteredSignal(t0 + dt * np.arange(r.size), out, float(tau_f), float(dt))


@dataclass(frozen=True)
class TrackingMetrics:
    rms: float
    correlation: float
    best_lag: float
    burn_in: float
    n: int


def tracking_report(filtered: FilteredSignal, truth, burn_in: float | None = None,
                    max_lag: float | None = None) -> TrackingMetrics:
    """Compare a filtered readout with the true Bloch component.

    Parameters
    ----------
    filtered : FilteredSignal
    truth : array
        True component on the same time grid.
    burn_in : float, optional
        Discarded initial time; defaults to ``5 tau_f``.
    max_lag : float, optional
        Search range for the lag of maximal cross-correlation (default
        ``3 tau_f``), searched in both directions.  A positive lag means the
        filter trails the truth.
    """
    truth = np.asarray(truth, dtype=float)
    if truth.shape != filtered.values.shape:
        raise ValueError(f"length mismatch: filtered {filtered.values.size}, truth {truth.size}")
    burn = 5.0 * filtered.tau_f if burn_in is None else burn_in
    k0 = int(round(burn / filtered.dt))
    y, x = filtered.values[k0:], truth[k0:]
    if y.size < 3:
        raise ValueError("nothing left after burn-in")
    rms = float(np.sqrt(np.mean((y - x) ** 2)))
    corr = float(np.corrcoef(y, x)[0, 1])
    span = int(round((3.0 * filtered.tau_f if max_lag is None else max_lag) / filtered.dt))
    span = min(span, y.size // 2)
    step = max(1, span // 200)
    lags = np.arange(-span, span + 1, step)
    yc, xc = y - y.mean(), x - x.mean()
    n = y.size
    cc = [float(np.dot(yc[m:], xc[: n - m])) / (n - m) if m >= 0 else
          float(np.dot(yc[: n + m], xc[-m:])) / (n + m) for m in lags]
    return TrackingMetrics(rms, corr, float(lags[int(np.argmax(cc))] * filtered.dt), float(burn), int(y.size))


def tracking_csv(filtered: FilteredSignal, raw, truth, stride: int = 1, header=()) -> str:
    """CSV ``t,raw,filtered,truth``."""
    idx = np.arange(0, filtered.values.size, int(stride))
    return csv_text(["t", "raw", "filtered", "truth"],
                    [filtered.times[idx], np.asarray(raw, float)[idx], filtered.values[idx],
                     np.asarray(truth, float)[idx]],
                    [f"tau_f={filtered.tau_f!r}, dt={filtered.dt!r}, stride={stride}", *header])
