"""Two-time correlation estimates with batch-means error bars.

The basic quantity is the lagged product average

    C_ab(k) = < a[i] b[i + k] >_i

pooled over one long record (temporal average) or over many records
(ensemble average, all start times within each record).  Raw lags can be
grouped into bins of a given width; a bin value is the pooled average of all
products whose lag falls inside the bin, and the matching theory value is
averaged with the same weights.

Error bars come from batch means: the data are split into contiguous
batches (or groups of records) and the spread of the per-batch estimates
gives the standard error.  Lag 0 carries the white-noise variance
``tau/dt`` and is reported on its own.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .artifacts import csv_text

__all__ = [
    "CorrelationEstimate",
    "SteadyStateReport",
    "autocorrelate",
    "batch_means",
    "constraint_check",
    "correlate_series",
    "exp_decay",
    "grouped_lag_sums",
    "records_of",
    "steady_state_check",
]

DEFAULT_BATCHES = 20


def exp_decay(tau: float):
    """Theory curve ``exp(-t / 2 tau)``."""
    return lambda t: np.exp(-np.asarray(t) / (2.0 * tau))


def _zero(t):
    return np.zeros_like(np.asarray(t, dtype=float))


@dataclass
class CorrelationEstimate:
    lags: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    theory: np.ndarray | None = None
    label: str = ""
    lag0: float = float("nan")
    lag0_stderr: float = float("nan")
    n_batches: int = 0
    bin_width: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lags.size and (self.lags[0] <= 0 or np.any(np.diff(self.lags) <= 0)):
            raise ValueError("lags must be positive and strictly increasing")

    def deviation(self) -> np.ndarray:
        if self.theory is None:
            raise ValueError(f"no theory curve for {self.label!r}")
        return self.values - self.theory

    def max_abs_deviation(self) -> float:
        return float(np.max(np.abs(self.deviation())))

    def within(self, tol: float) -> bool:
        return self.max_abs_deviation() <= tol

    def z_scores(self) -> np.ndarray:
        return self.deviation() / self.stderr

    def at(self, t: float) -> tuple[float, float]:
        """Value and standard error at the lag closest to ``t``."""
        i = int(np.argmin(np.abs(self.lags - t)))
        return float(self.values[i]), float(self.stderr[i])

    def to_csv(self, header=()) -> str:
        theory = self.theory if self.theory is not None else np.full(self.lags.shape, np.nan)
        head = [f"label={self.label}", f"lag0={self.lag0!r} +- {self.lag0_stderr!r}",
                f"n_batches={self.n_batches}", f"bin_width={self.bin_width}", *header]
        return csv_text(["lag", "estimate", "stderr", "theory"],
                        [self.lags, self.values, self.stderr, theory], head)


def batch_means(x, n_batches: int = DEFAULT_BATCHES) -> tuple[float, float]:
    """Mean of ``x`` and its batch-means standard error."""
    x = np.asarray(x, dtype=float)
    if n_batches < 2 or x.size < n_batches:
        raise ValueError("need at least two batches with one sample each")
    means = np.array([b.mean() for b in np.array_split(x, n_batches)])
    return float(x.mean()), float(means.std(ddof=1) / math.sqrt(n_batches))


def _lag_sums(a: np.ndarray, b: np.ndarray, max_k: int) -> np.ndarray:
    """``sum_i a[i] b[i+k]`` for ``k = 0..max_k`` by FFT."""
    n = a.size
    size = sfft.next_fast_len(n + max_k + 1, real=True)
    fa = sfft.rfft(a, size)
    fb = sfft.rfft(b, size)
    return sfft.irfft(np.conj(fa) * fb, size)[: max_k + 1]


def _bins(dt: float, max_k: int, bin_width: float | None):
    """Map raw lags ``1..max_k`` to bin indices."""
    k = np.arange(1, max_k + 1)
    if bin_width is None or bin_width <= dt * (1 + 1e-9):
        return k, np.arange(max_k)
    # bin j collects lags with (j) * w < k dt <= (j + 1) * w
    idx = np.ceil(k * dt / bin_width - 1e-9).astype(int) - 1
    return k, idx


def grouped_lag_sums(pairs, max_k: int, n_batches: int = DEFAULT_BATCHES):
    """Per-batch sums ``sum_i a[i] b[i+k]`` and their sample counts.

    A single ``(a, b)`` pair is cut into ``n_batches`` contiguous batches;
    several pairs are grouped into at most ``n_batches`` groups of records.
    Sums inside a group are merged with exact (compensated) summation, so
    the result does not depend on record order within a group.

    Returns
    -------
    sums, counts : ndarray, shape (n_groups, max_k + 1)
    """
    pairs = [(np.asarray(a, float), np.asarray(b, float)) for a, b in pairs]
    if not pairs:
        raise ValueError("no records")
    for a, b in pairs:
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("series in a pair must be 1-D with equal length")
    if len(pairs) == 1:
        a, b = pairs[0]
        if a.size < 4 * n_batches * max_k:
            raise ValueError(f"record of {a.size} samples too short for lags up to {max_k} steps "
                             f"with {n_batches} batches")
        edges = np.linspace(0, a.size, n_batches + 1).astype(int)
        groups = [[(a[lo:hi], b[lo:hi])] for lo, hi in zip(edges[:-1], edges[1:])]
    else:
        if min(a.size for a, _ in pairs) <= max_k:
            raise ValueError("records shorter than the largest lag")
        idx = np.array_split(np.arange(len(pairs)), min(n_batches, len(pairs)))
        groups = [[pairs[i] for i in grp] for grp in idx]

    sums = np.zeros((len(groups), max_k + 1))
    counts = np.zeros((len(groups), max_k + 1))
    lag_k = np.arange(max_k + 1)
    for g, grp in enumerate(groups):
        parts = [_lag_sums(a, b, max_k) for a, b in grp]
        sums[g] = [math.fsum(col) for col in zip(*parts)] if len(parts) > 1 else parts[0]
        counts[g] = np.sum([np.maximum(a.size - lag_k, 0) for a, _ in grp], axis=0)
    return sums, counts


def correlate_series(pairs, dt: float, max_lag: float, bin_width: float | None = None,
                     n_batches: int = DEFAULT_BATCHES, theory=None, label: str = "") -> CorrelationEstimate:
    """Pooled lagged-product estimate ``<a(0) b(t)>`` for ``0 < t <= max_lag``.

    Parameters
    ----------
    pairs : list of (array, array)
        One ``(a, b)`` pair per record; ``a`` and ``b`` are aligned in time.
        A single pair is split into ``n_batches`` contiguous batches; several
        pairs are grouped into ``n_batches`` groups of records.
    dt : float
        Sample spacing.
    max_lag : float
        Largest lag, in the time units of ``dt``.
    bin_width : float, optional
        Width of the lag bins; ``None`` keeps every raw lag.
    theory : callable, optional
        Function of lag, averaged with the estimator's own weights.
    """
    max_k = int(round(max_lag / dt))
    if max_k < 1:
        raise ValueError("max_lag shorter than one step")
    sums, counts = grouped_lag_sums(pairs, max_k, n_batches)
    nb = sums.shape[0]
    if nb < 2:
        raise ValueError("need at least two batches for an error bar")

    k, bin_of = _bins(dt, max_k, bin_width)
    n_bins = int(bin_of[-1]) + 1
    bs = np.array([np.bincount(bin_of, weights=sums[g, 1:], minlength=n_bins) for g in range(nb)])
    bc = np.array([np.bincount(bin_of, weights=counts[g, 1:], minlength=n_bins) for g in range(nb)])
    # exact merge across batches
    values = np.array([math.fsum(bs[:, j]) for j in range(n_bins)]) / bc.sum(axis=0)
    stderr = (bs / bc).std(axis=0, ddof=1) / math.sqrt(nb)
    w = counts.sum(axis=0)[1:]
    wsum = np.bincount(bin_of, weights=w, minlength=n_bins)
    lags = np.bincount(bin_of, weights=k * dt * w, minlength=n_bins) / wsum
    th = None
    if theory is not None:
        th = np.bincount(bin_of, weights=theory(k * dt) * w, minlength=n_bins) / wsum
    lag0_groups = sums[:, 0] / counts[:, 0]
    return CorrelationEstimate(
        lags=lags, values=values, stderr=stderr, theory=th, label=label,
        lag0=float(math.fsum(sums[:, 0]) / counts[:, 0].sum()),
        lag0_stderr=float(lag0_groups.std(ddof=1) / math.sqrt(nb)),
        n_batches=nb, bin_width=bin_width,
    )


def records_of(rec):
    """Normalize a record or a collection of records to a list of readout records."""
    from .integrators import ReadoutRecord, TrajectoryRecord

    items = rec if isinstance(rec, (list, tuple)) else [rec]
    out = []
    for item in items:
        if isinstance(item, TrajectoryRecord):
            out.append(item.readouts)
        elif hasattr(item, "as_readout_record"):
            out.append(item.as_readout_record())
        elif isinstance(item, ReadoutRecord):
            out.append(item)
        else:
            raise TypeError(f"cannot take readouts from {type(item).__name__}")
    dts = {r.dt for r in out}
    if len(dts) != 1:
        raise ValueError(f"records have mismatched dt values: {sorted(dts)}")
    return out


def _common_tau(records):
    taus = {(r.tau_x, r.tau_z) for r in records}
    if len(taus) == 1:
        tx, tz = taus.pop()
        if tx == tz:
            return tx
    return None


def autocorrelate(rec, pair=("x", "x"), max_lag: float = 6.0, bin_width: float | None = None,
                  n_batches: int = DEFAULT_BATCHES, burn_in: float = 0.0) -> CorrelationEstimate:
    """Readout correlator ``<r_a(0) r_b(t)>`` for ``pair = (a, b)``.

    ``rec`` may be one record (temporal average) or a list of records
    (ensemble average).  With equal measurement times the theory column is
    ``exp(-t/2tau)`` for ``a == b`` and 0 otherwise.
    """
    records = records_of(rec)
    dt = records[0].dt
    skip = int(round(burn_in / dt))
    a_name, b_name = pair
    pairs = [(r.channel(a_name)[skip:], r.channel(b_name)[skip:]) for r in records]
    tau = _common_tau(records)
    theory = None
    if tau is not None:
        theory = exp_decay(tau) if a_name == b_name else _zero
    return correlate_series(pairs, dt, max_lag, bin_width, n_batches, theory,
                            label=f"<r_{a_name}(0) r_{b_name}(t)>")


def constraint_check(trajectories, which=("x", "x"), max_lag: float = 4.0, bin_width: float | None = None,
                     n_batches: int = DEFAULT_BATCHES) -> CorrelationEstimate:
    """Combined state-plus-noise correlator ``<a(0) b(t) + sqrt(tau) xi_a(0) b(t)>``.

    ``which = (a, b)`` names the early component (whose noise enters) and the
    late component.  Theory is ``exp(-t/2tau)`` for ``a == b`` and 0
    otherwise.  The separate state-state and noise-state parts are attached
    as ``diagnostics["state"]`` and ``diagnostics["noise"]``; only their sum
    is compared with theory.
    """
    from .integrators import TrajectoryRecord

    trajs = trajectories if isinstance(trajectories, (list, tuple)) else [trajectories]
    col = {"x": 0, "z": 2}
    a_name, b_name = which
    if a_name not in col or b_name not in col:
        raise ValueError(f"which must name components 'x'/'z', got {which!r}")
    for t in trajs:
        if not isinstance(t, TrajectoryRecord):
            raise TypeError("constraint_check needs TrajectoryRecord inputs")
        if t.noise is None:
            raise ValueError("noise provenance missing: run with keep_noise=True")
        if t.stride != 1:
            raise ValueError("constraint_check needs full-resolution states (stride=1)")
    tau = _common_tau([t.readouts for t in trajs])
    if tau is None:
        raise ValueError("constraint_check needs equal measurement times")
    dt = trajs[0].dt
    ia, ib = col[a_name], col[b_name]
    noise_col = 0 if a_name == "x" else 1
    sq = math.sqrt(tau)
    early_state = [t.states[:-1, ia] for t in trajs]
    early_noise = [sq * t.noise[:, noise_col] for t in trajs]
    late = [t.states[:-1, ib] for t in trajs]
    theory = exp_decay(tau) if a_name == b_name else _zero
    label = f"<{a_name}(0) {b_name}(t) + sqrt(tau) xi_{a_name}(0) {b_name}(t)>"
    total = correlate_series([(s + q, l) for s, q, l in zip(early_state, early_noise, late)],
                             dt, max_lag, bin_width, n_batches, theory, label)
    total.diagnostics["state"] = correlate_series(list(zip(early_state, late)), dt, max_lag,
                                                  bin_width, n_batches, None, f"<{a_name}(0) {b_name}(t)>")
    total.diagnostics["noise"] = correlate_series(list(zip(early_noise, late)), dt, max_lag, bin_width,
                                                  n_batches, None, f"<sqrt(tau) xi_{a_name}(0) {b_name}(t)>")
    return total


@dataclass
class SteadyStateReport:
    estimates: dict
    max_z: float
    agree: bool
    burn_in: float
    pair: tuple

    def summary(self) -> str:
        verdict = "agree" if self.agree else "DISAGREE"
        return (f"{'/'.join(self.estimates)}: {self.pair} correlators {verdict} "
                f"(max |z| = {self.max_z:.2f}, burn-in {self.burn_in})")


def steady_state_check(ensembles: dict, pair=("x", "x"), max_lag: float = 4.0, bin_width: float | None = 0.5,
                       burn_in: float = 5.0, n_batches: int = DEFAULT_BATCHES, z_max: float = 3.0) -> SteadyStateReport:
    """Compare readout correlators of ensembles started from different states.

    ``ensembles`` maps a label (e.g. the initial state) to a record or list of
    records.  Estimates agree when every lag differs by at most ``z_max``
    joint standard errors.
    """
    if len(ensembles) < 2:
        raise ValueError("need at least two ensembles to compare")
    est = {label: autocorrelate(recs, pair, max_lag, bin_width, n_batches, burn_in)
           for label, recs in ensembles.items()}
    labels = list(est)
    worst = 0.0
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            a, b = est[labels[i]], est[labels[j]]
            z = np.abs(a.values - b.values) / np.sqrt(a.stderr ** 2 + b.stderr ** 2)
            worst = max(worst, float(np.max(z)))
    return SteadyStateReport(est, worst, worst <= z_max, burn_in, tuple(pair))
