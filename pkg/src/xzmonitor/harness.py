"""Experiment driver and command-line entry point.

Each named experiment runs one simulation campaign, writes CSV tables and
SVG line plots to an output directory and evaluates pass/fail checks at
fixed tolerances.  Time is always in units of ``tau``.

Configuration is a flat TOML file (see ``configs/example.toml``); command-line
flags override file values.  Every CSV header carries the tool version, the
resolved configuration and the random-stream layout.  ``workers`` is an
execution setting and is left out of headers, so serial and parallel runs
write identical files.

Usage::

    xzmonitor run correlators --out results/
    xzmonitor run lg-projective --omega 0
    xzmonitor run all --config my.toml
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .artifacts import csv_text, svg_line_plot, write_text
from .emulator import (
    UnequalMeasurementTimesError,
    diffusion_rate,
    emulate,
    emulate_ensemble,
    emulator_csv,
    reconstruction_identity_residual,
    third_party_reconstruct,
)
from .filtering import ewma, tracking_csv, tracking_report
from .integrators import (
    SimulationConfig,
    replay,
    run,
    run_ensemble,
    run_kraus,
    trajectory_csv,
)
from .leggett_garg import (
    lg_csv,
    lg_curve,
    phi_autocorrelator,
    phi_orthogonal_correlator,
    projective_lg,
    violation_boundary,
)
from .measurement import DT_OVER_TAU_MAX, joint_update, MeasurementChannel
from .noise import seed_layout
from .qubit_state import BlochState, bloch_ball_check
from .statistics import autocorrelate, constraint_check

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = [
    "EXPERIMENTS",
    "Check",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentResult",
    "load_config",
    "main",
    "run_experiment",
]

log = logging.getLogger(__name__)

PAIRS = (("x", "x"), ("z", "z"), ("x", "z"), ("z", "x"))
AUTO_TOL = 0.03
CROSS_TOL = 0.02


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved experiment settings.  Times are in units of ``tau``.

    ``duration = 0`` selects the experiment's own default run length.
    ``tau_x``/``tau_z`` are in units of ``tau``; 0 means "equal to ``tau``".
    """

    seed: int = 0
    dt_over_tau: float = 0.01
    tau: float = 1.0
    tau_x: float = 0.0
    tau_z: float = 0.0
    duration: float = 0.0
    n_traj: int = 1
    initial: tuple = (0.0, 0.0, 1.0)
    scheme: str = "kraus"
    ordering: str = "symmetric"
    noise_provenance: bool = True
    workers: int = 1
    max_lag: float = 6.0
    bin_width: float = 0.5
    phi_grid: tuple = (0.0, math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2)
    lg_phi: float = math.pi / 4
    lg_t: float = 0.1
    omega: float = math.pi / 3
    delta_t: float = 1.0
    n_shots: int = 100_000
    tau_f: float = 1.0
    theta0: float = 0.0
    n_compare: int = 32

    def __post_init__(self):
        if not 0 < self.dt_over_tau <= DT_OVER_TAU_MAX:
            raise ConfigError(f"dt_over_tau = {self.dt_over_tau} must lie in (0, {DT_OVER_TAU_MAX}]")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.tau <= 0 or self.tau_x < 0 or self.tau_z < 0:
            raise ConfigError("measurement times must be positive")
        if self.n_traj < 1 or self.n_shots < 1 or self.workers < 1 or self.n_compare < 2:
            raise ConfigError("n_traj, n_shots and workers must be >= 1, n_compare >= 2")
        if len(self.initial) != 3 or not bloch_ball_check(BlochState.from_array(self.initial)):
            raise ConfigError(f"initial = {self.initial} is not a Bloch vector")
        if self.scheme not in ("kraus", "stratonovich", "ito"):
            raise ConfigError(f"scheme {self.scheme!r} not one of kraus, stratonovich, ito")
        if self.ordering not in ("xz", "zx", "symmetric"):
            raise ConfigError(f"ordering {self.ordering!r} not one of xz, zx, symmetric")
        if self.tau_f <= self.dt_over_tau:
            raise ConfigError("tau_f must exceed the time step")

    @property
    def dt(self) -> float:
        return self.dt_over_tau * self.tau

    @property
    def taus(self) -> tuple[float, float]:
        return (self.tau_x or 1.0) * self.tau, (self.tau_z or 1.0) * self.tau

    def simulation(self, duration: float, **kw) -> SimulationConfig:
        tx, tz = self.taus
        args = dict(dt=self.dt, duration=duration * self.tau, tau_x=tx, tau_z=tz, seed=self.seed,
                    ordering=self.ordering, keep_noise=self.noise_provenance)
        args.update(kw)
        return SimulationConfig(**args)

    def header(self) -> list[str]:
        items = [f"{f.name}={_show(getattr(self, f.name))}" for f in dataclasses.fields(self) if f.name != "workers"]
        return [f"xzmonitor {__version__}", "config: " + ", ".join(items), seed_layout(self.seed)]


def _show(v):
    if isinstance(v, tuple):
        return "[" + " ".join(repr(float(a)) for a in v) + "]"
    return repr(v)


_TYPES = {f.name: type(f.default) for f in dataclasses.fields(ExperimentConfig)}


def _coerce(key, value):
    want = _TYPES[key]
    if want is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if want is tuple and isinstance(value, list):
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"config key '{key}': expected a list of numbers")
        return tuple(float(v) for v in value)
    if want is bool and not isinstance(value, bool):
        raise ConfigError(f"config key '{key}': expected bool, got {type(value).__name__}")
    if want is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigError(f"config key '{key}': expected int, got {type(value).__name__}")
    if not isinstance(value, want):
        raise ConfigError(f"config key '{key}': expected {want.__name__}, got {type(value).__name__}")
    return value


def resolve(values: dict, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Apply ``values`` on top of ``base`` (defaults), rejecting unknown keys."""
    unknown = sorted(set(values) - set(_TYPES))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    clean = {k: _coerce(k, v) for k, v in values.items()}
    return dataclasses.replace(base or ExperimentConfig(), **clean)


def load_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    """Read a flat TOML file, then apply ``overrides`` (e.g. from flags)."""
    values = {}
    if path is not None:
        with open(path, "rb") as fh:
            try:
                values = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from None
        nested = [k for k, v in values.items() if isinstance(v, dict)]
        if nested:
            raise ConfigError(f"config must be flat; found table(s): {', '.join(nested)}")
    cfg = resolve(values)
    return resolve(overrides or {}, cfg)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


@dataclass
class ExperimentResult:
    name: str
    checks: list = field(default_factory=list)
    files: list = field(default_factory=list)
    values: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name, passed, detail):
        c = Check(name, bool(passed), detail)
        self.checks.append(c)
        log.info(c.line())
        return c


class _Writer:
    def __init__(self, out: Path, cfg: ExperimentConfig, experiment: str, result: ExperimentResult):
        self.out, self.cfg, self.result = Path(out), cfg, result
        self.head = [*cfg.header(), f"experiment={experiment}"]
        try:
            self.out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory {self.out}: {exc}") from None

    def text(self, name, text):
        path = self.out / name
        try:
            write_text(path, text)
        except OSError as exc:
            raise ConfigError(f"cannot write {path}: {exc}") from None
        self.result.files.append(str(path))

    def table(self, name, columns, data, extra=()):
        self.text(name, csv_text(columns, data, [*self.head, *extra]))

    def estimate(self, name, est):
        self.text(name, est.to_csv(self.head))

    def svg(self, name, series, title, xlabel, ylabel):
        self.text(name, svg_line_plot(series, title, xlabel, ylabel))


# --------------------------------------------------------------- experiments

def _readout_suite(res, w, source, cfg, prefix=""):
    """Auto, cross and rotated correlators of one record or ensemble."""
    plot = {}
    for a, b in PAIRS:
        est = autocorrelate(source, (a, b), cfg.max_lag, cfg.bin_width)
        tol = AUTO_TOL if a == b else CROSS_TOL
        w.estimate(f"{prefix}corr_{a}{b}.csv", est)
        res.check(f"{prefix}<r_{a}(0) r_{b}(t)>", est.within(tol),
                  f"max |est - theory| = {est.max_abs_deviation():.4f} (tol {tol}), lag0 = {est.lag0:.2f}")
        plot[f"<r_{a} r_{b}>"] = (est.lags, est.values)
        if a == b == "x":
            plot["exp(-t/2tau) (dashed)"] = (est.lags, est.theory)
    w.svg(f"{prefix}correlators.svg", plot, "readout correlators", "t / tau", "correlation")
    for phi in cfg.phi_grid:
        tag = f"{math.degrees(phi):.0f}"
        est = phi_autocorrelator(source, phi, cfg.max_lag, cfg.bin_width)
        w.estimate(f"{prefix}corr_phi{tag}.csv", est)
        res.check(f"{prefix}<r_phi r_phi>, phi={tag} deg", est.within(AUTO_TOL),
                  f"max dev {est.max_abs_deviation():.4f} (tol {AUTO_TOL})")
        est = phi_orthogonal_correlator(source, phi, cfg.max_lag, cfg.bin_width)
        w.estimate(f"{prefix}corr_phi{tag}_orth.csv", est)
        res.check(f"{prefix}<r_phi r_phi+90>, phi={tag} deg", est.within(CROSS_TOL),
                  f"max dev {est.max_abs_deviation():.4f} (tol {CROSS_TOL})")


def _quantum_source(cfg, default_duration, keep_noise=None):
    init = BlochState.from_array(cfg.initial)
    kw = {} if keep_noise is None else {"keep_noise": keep_noise}
    if cfg.n_traj == 1:
        return run(init, cfg.simulation(cfg.duration or default_duration, **kw), cfg.scheme)
    return run_ensemble(init, cfg.n_traj, cfg.simulation(cfg.duration or 10.0, **kw), cfg.scheme,
                        workers=cfg.workers)


def exp_correlators(cfg, w, res):
    source = _quantum_source(cfg, 1e5, keep_noise=False)
    first = source if not isinstance(source, list) else source[0]
    head = first.readouts.slice(0, min(len(first.readouts), int(round(20.0 / cfg.dt_over_tau))))
    n = len(head)
    w.text("trajectory_head.csv", trajectory_csv(
        dataclasses.replace(first, states=first.states[: n // first.stride + 1], readouts=head), w.head))
    _readout_suite(res, w, source, cfg)


def exp_tracking(cfg, w, res):
    sim = cfg.simulation(cfg.duration or 1e3, keep_noise=False)
    rec = run(BlochState.from_array(cfg.initial), sim, cfg.scheme)
    n = len(rec.readouts)
    stride = max(1, int(round(0.05 / cfg.dt_over_tau)))
    tau_f = cfg.tau_f * cfg.tau
    q = {}
    for axis in ("x", "z"):
        raw = rec.readouts.channel(axis)
        truth = rec.states[:n, 0 if axis == "x" else 2]
        filt = ewma(raw, cfg.dt, tau_f)
        q[axis] = tracking_report(filt, truth)
        w.text(f"tracking_{axis}.csv", tracking_csv(filt, raw, truth, stride, w.head))
        if axis == "x":
            m = int(round(20.0 / cfg.dt_over_tau))
            w.svg("tracking.svg", {"filtered r_x": (filt.times[:m], filt.values[:m]),
                                   "x(t) (dashed)": (filt.times[:m], truth[:m])},
                  "EWMA tracking", "t / tau", "x")
    try:
        rd = emulate(math.atan2(cfg.initial[2], cfg.initial[0]), sim)
    except UnequalMeasurementTimesError:
        rd = None
    m = q["x"]
    res.values.update(quantum_corr=m.correlation)
    res.check("quantum tracking correlation r_x vs x", m.correlation >= 0.6,
              f"corr = {m.correlation:.4f} (>= 0.6), rms = {m.rms:.3f}, best lag = {m.best_lag:.2f}")
    res.check("quantum tracking correlation r_z vs z", q["z"].correlation >= 0.6,
              f"corr = {q['z'].correlation:.4f} (>= 0.6)")
    if rd is not None:
        me = tracking_report(ewma(rd.r_x, cfg.dt, tau_f), rd.x[:-1])
        res.values.update(emulator_corr=me.correlation)
        res.check("emulator tracking correlation matches quantum", abs(me.correlation - m.correlation) <= 0.05,
                  f"emulator {me.correlation:.4f} vs quantum {m.correlation:.4f} (tol 0.05)")


def _lg_checks(res, w, source, cfg, prefix=""):
    times = np.round(np.arange(0.02, 2.0 + 1e-9, 0.02), 10)
    curves, results = {}, []
    for phi in (cfg.lg_phi, -cfg.lg_phi):
        curve = lg_curve(source, phi, times)
        results.extend(curve)
        curves[f"phi={math.degrees(phi):.0f} deg"] = (times, np.array([r.lhs for r in curve]))
        curves[f"theory phi={math.degrees(phi):.0f} deg (dashed)"] = (times, np.array([r.theory for r in curve]))
        point = lg_curve(source, phi, [cfg.lg_t])[0]
        results.append(point)
        expect = point.theory > 1.0
        res.check(f"{prefix}LG lhs at phi={math.degrees(phi):.0f} deg, t={cfg.lg_t}",
                  abs(point.lhs - point.theory) <= 0.05,
                  f"lhs = {point.lhs:.4f} +- {point.stderr:.4f}, theory {point.theory:.4f} (tol 0.05)")
        res.check(f"{prefix}LG violation flag at phi={math.degrees(phi):.0f} deg",
                  point.violated == expect,
                  f"violated={point.violated} (expected {expect}), z = {point.z:.1f}")
        amp = math.cos(phi) + math.sin(phi)
        if amp > 1:
            t_star = violation_boundary(curve)
            want = 2.0 * math.log(amp)
            res.check(f"{prefix}LG boundary at phi={math.degrees(phi):.0f} deg",
                      abs(t_star - want) <= 0.1, f"t* = {t_star:.4f}, expected {want:.4f} (tol 0.1)")
    w.text(f"{prefix}lg_continuous.csv", lg_csv(results, w.head))
    curves["bound (dashed)"] = (times, np.ones_like(times))
    w.svg(f"{prefix}lg_continuous.svg", curves, "continuous LG combination", "t / tau", "K(t)")


def exp_lg_continuous(cfg, w, res):
    _lg_checks(res, w, _quantum_source(cfg, 1e5, keep_noise=False), cfg)


def exp_lg_projective(cfg, w, res):
    main = projective_lg(cfg.omega, cfg.delta_t, cfg.n_shots, cfg.seed, cfg.initial)
    ref = projective_lg(0.0, cfg.delta_t, cfg.n_shots, cfg.seed, cfg.initial)
    sweep = [projective_lg(a / cfg.delta_t, cfg.delta_t, cfg.n_shots, cfg.seed, cfg.initial)
             for a in np.linspace(0, math.pi, 25)]
    w.text("lg_projective.csv", lg_csv([main, ref, *sweep], w.head))
    ang = np.linspace(0, math.pi, 25)
    w.svg("lg_projective.svg", {"estimate": (ang, [r.lhs for r in sweep]),
                                "theory (dashed)": (ang, [r.theory for r in sweep]),
                                "bound (dashed)": (ang, np.ones_like(ang))},
          "projective LG", "Omega dt", "K")
    res.check(f"projective LG at Omega dt = {cfg.omega * cfg.delta_t:.4f}", abs(main.lhs - main.theory) <= 0.02,
              f"lhs = {main.lhs:.4f} +- {main.stderr:.4f}, theory {main.theory:.4f} (tol 0.02)")
    res.check("projective LG at Omega = 0", abs(ref.lhs - 1.0) <= 0.02 and not ref.violated,
              f"lhs = {ref.lhs:.4f}, violated={ref.violated}")


def _constraint_checks(res, w, trajs, cfg, prefix=""):
    max_lag = min(4.0, cfg.max_lag)
    for a, b in PAIRS:
        est = constraint_check(trajs, (a, b), max_lag, cfg.bin_width)
        tol = AUTO_TOL if a == b else CROSS_TOL
        w.estimate(f"{prefix}constraint_{a}{b}.csv", est)
        st, nz = est.diagnostics["state"], est.diagnostics["noise"]
        w.table(f"{prefix}constraint_{a}{b}_parts.csv", ["lag", "state", "noise", "total"],
                [est.lags, st.values, nz.values, est.values])
        res.check(f"{prefix}<{a}(0){b}(t) + sqrt(tau) xi_{a}(0){b}(t)>", est.within(tol),
                  f"max dev {est.max_abs_deviation():.4f} (tol {tol}); "
                  f"state part at first lag {st.values[0]:.3f}, noise part {nz.values[0]:.3f}")


def exp_constraints(cfg, w, res):
    if not cfg.noise_provenance:
        raise ConfigError("constraints experiment needs noise_provenance = true")
    source = _quantum_source(cfg, 1e5)
    _constraint_checks(res, w, source, cfg)


def exp_emulator(cfg, w, res):
    tx, tz = cfg.taus
    if tx != tz:
        raise UnequalMeasurementTimesError(
            f"tau_x = {tx} differs from tau_z = {tz}: the classical emulation is only valid "
            "for equal measurement times")
    sim = cfg.simulation(cfg.duration or 1e5)
    rd = emulate(cfg.theta0, sim)
    _readout_suite(res, w, rd, cfg, "emu_")
    _lg_checks(res, w, rd, cfg, "emu_")
    _constraint_checks(res, w, rd.as_trajectory(), cfg, "emu_")

    resid = float(reconstruction_identity_residual(rd).max())
    res.check("reconstruction identity", resid <= 1e-12, f"max residual {resid:.2e} (tol 1e-12)")

    short = emulate(cfg.theta0, cfg.simulation(10.0))
    w.text("emulator_run.csv", emulator_csv(short, 1, w.head))
    true0 = BlochState(math.cos(cfg.theta0), 0.0, math.sin(cfg.theta0))
    rec = third_party_reconstruct(short, true0)
    err = float(np.max(np.linalg.norm(rec.states - short.as_trajectory().states, axis=1)))
    heun = third_party_reconstruct(short, true0, "stratonovich")
    err_heun = float(np.max(np.linalg.norm(heun.states - short.as_trajectory().states, axis=1)))
    res.check("true-initialized reconstruction", err <= 0.05,
              f"sup |s_rec - s_spin| = {err:.2e} over 10 tau ({rec.scheme}; Heun {err_heun:.3f}) (tol 0.05)")
    t = short.times
    w.svg("emulator_reconstruction.svg", {"cos theta": (t, short.x), "x reconstructed (dashed)": (t, rec.x),
                                          "x Heun": (t, heun.x)},
          "third-party reconstruction", "t / tau", "x")

    runs = emulate_ensemble(cfg.theta0, 10_000, cfg.simulation(1.0))
    rate, rate_se = diffusion_rate(runs)
    rate *= cfg.tau
    res.check("theta variance growth rate", abs(rate - 1.0) <= 0.05,
              f"rate = {rate:.4f} +- {rate_se:.4f} per tau (tol 5%)")
    silent = emulate(cfg.theta0, cfg.simulation(10.0), subjective=False)
    res.check("spin path independent of subjective noise", np.array_equal(silent.theta, short.theta),
              "theta bit-identical with s~ off" if np.array_equal(silent.theta, short.theta) else "theta differs")


def _sup_distance(a, b):
    return float(np.max(np.linalg.norm(a.states - b.states, axis=1)))


def _coarsen(ro):
    n = len(ro) // 2 * 2
    return dataclasses.replace(ro, r_x=0.5 * (ro.r_x[:n:2] + ro.r_x[1:n:2]),
                               r_z=0.5 * (ro.r_z[:n:2] + ro.r_z[1:n:2]), dt=2 * ro.dt)


def _discrepancies(readouts, init, ordering):
    k = replay(readouts, init, "kraus", ordering)
    s = replay(readouts, init, "stratonovich")
    i = replay(readouts, init, "ito")
    return _sup_distance(k, s), _sup_distance(k, i), _sup_distance(s, i), (k, s, i)


def exp_compare_integrators(cfg, w, res):
    init = BlochState.from_array(cfg.initial)
    n = cfg.n_compare
    duration = cfg.duration or 10.0
    base = run_ensemble(init, n, cfg.simulation(duration, keep_noise=False), "kraus", workers=cfg.workers)
    rows = np.array([_discrepancies(r.readouts, init, cfg.ordering)[:3] for r in base])
    _, _, _, (k0, s0, i0) = _discrepancies(base[0].readouts, init, cfg.ordering)
    w.table("integrators_path.csv", ["t", "x_kraus", "z_kraus", "x_strat", "z_strat", "x_ito", "z_ito"],
            [k0.times, k0.x, k0.z, s0.x, s0.z, i0.x, i0.z])
    w.svg("integrators_path.svg", {"Kraus x": (k0.times, k0.x), "Heun x (dashed)": (s0.times, s0.x),
                                   "Ito x": (i0.times, i0.x)}, "same readouts, three schemes", "t / tau", "x")
    names = ("kraus-stratonovich", "kraus-ito", "stratonovich-ito")
    for j, name in enumerate(names):
        res.values[name] = float(rows[:, j].mean())
        res.check(f"same-noise sup-norm {name} at dt/tau={cfg.dt_over_tau}", rows[:, j].mean() <= 0.05,
                  f"mean over {n} trajectories {rows[:, j].mean():.4f}, max {rows[:, j].max():.4f} (tol 0.05)")

    # halving dt on the same Brownian paths: fine runs at dt/2, coarse records by pair averaging
    fine_cfg = dataclasses.replace(cfg, dt_over_tau=cfg.dt_over_tau / 2)
    fine = run_ensemble(init, n, fine_cfg.simulation(duration, keep_noise=False), "kraus",
                        workers=cfg.workers, first=n)
    d_fine = np.array([_discrepancies(r.readouts, init, cfg.ordering)[:3] for r in fine])
    d_coarse = np.array([_discrepancies(_coarsen(r.readouts), init, cfg.ordering)[:3] for r in fine])
    ratio = d_fine.mean(axis=0) / d_coarse.mean(axis=0)
    w.table("integrator_convergence.csv", ["pair", "dt_over_tau", "mean_sup"],
            [np.array(names * 2, dtype=object),
             np.array([cfg.dt_over_tau] * 3 + [cfg.dt_over_tau / 2] * 3, dtype=object),
             np.concatenate((d_coarse.mean(axis=0), d_fine.mean(axis=0))).astype(object)])
    for j, name in enumerate(names):
        res.check(f"discrepancy halves with dt, {name}", 0.35 <= ratio[j] <= 0.65,
                  f"ratio {ratio[j]:.3f} (expected 0.5 +- 0.15)")

    grid = np.geomspace(5e-4, 2e-2, 8)
    s = BlochState(0.6, 0.0, 0.8)
    err = []
    for h in grid:
        chx, chz = MeasurementChannel("x", 1.0, h), MeasurementChannel("z", 1.0, h)
        a = joint_update(s, 1.0, 1.0, chx, chz, "xz").as_array()
        b = joint_update(s, 1.0, 1.0, chx, chz, "zx").as_array()
        err.append(float(np.linalg.norm(a - b)))
    slope = float(np.polyfit(np.log(grid), np.log(err), 1)[0])
    w.table("ordering_error.csv", ["dt_over_tau", "xz_minus_zx"], [grid, np.array(err)])
    res.check("sequencing-order error slope", abs(slope - 2.0) <= 0.2, f"log-log slope {slope:.3f} (2 +- 0.2)")

    long = run_kraus(init, cfg.simulation(10_000 * cfg.dt_over_tau, keep_noise=False, ordering="xz"))
    drift = float(np.max(np.abs(np.sum(long.states ** 2, axis=1) - 1.0))) if init.is_pure else 0.0
    res.check("Kraus purity over 10^4 steps", drift <= 1e-9, f"max |x^2+y^2+z^2 - 1| = {drift:.2e} (tol 1e-9)")
    ok = all(r.in_ball() for r in base) and all(
        replay(r.readouts, init, sch).in_ball() for r in base[:4] for sch in ("stratonovich", "ito"))
    res.check("all states inside the Bloch ball", ok, "bloch_ball_check on every stored state")


EXPERIMENTS = {
    "correlators": exp_correlators,
    "tracking": exp_tracking,
    "lg-continuous": exp_lg_continuous,
    "lg-projective": exp_lg_projective,
    "constraints": exp_constraints,
    "emulator": exp_emulator,
    "compare-integrators": exp_compare_integrators,
}


def run_experiment(name: str, cfg: ExperimentConfig | None = None, out="results") -> ExperimentResult:
    """Run one named experiment, writing artifacts under ``out/name``."""
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    cfg = cfg or ExperimentConfig()
    res = ExperimentResult(name)
    w = _Writer(Path(out) / name, cfg, name, res)
    EXPERIMENTS[name](cfg, w, res)
    w.table("checks.csv", ["check", "passed", "detail"],
            [np.array([c.name.replace(",", ";") for c in res.checks], dtype=object),
             np.array([c.passed for c in res.checks], dtype=object),
             np.array([c.detail.replace(",", ";") for c in res.checks], dtype=object)])
    return res


# ----------------------------------------------------------------------- CLI

_FLAGS = {
    "seed": int, "dt_over_tau": float, "n_traj": int, "lg_phi": float, "omega": float,
    "delta_t": float, "n_shots": int, "tau_f": float, "duration": float, "workers": int, "scheme": str,
}


def _parse_set(items):
    out = {}
    for item in items or ():
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            out[key.strip()] = tomllib.loads(f"v = {raw}")["v"]
        except tomllib.TOMLDecodeError:
            out[key.strip()] = raw
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xzmonitor", description="Joint sigma_x / sigma_z monitoring experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a named experiment")
    r.add_argument("experiment", choices=[*EXPERIMENTS, "all"])
    r.add_argument("--config", help="flat TOML config file")
    r.add_argument("--out", default="results", help="output directory (default: results)")
    r.add_argument("--seed", type=int)
    r.add_argument("--dt-over-tau", dest="dt_over_tau", type=float)
    r.add_argument("--n-traj", dest="n_traj", type=int)
    r.add_argument("--phi", dest="lg_phi", type=float, help="LG angle in radians")
    r.add_argument("--omega", type=float, help="Rabi frequency for lg-projective")
    r.add_argument("--delta-t", dest="delta_t", type=float)
    r.add_argument("--n-shots", dest="n_shots", type=int)
    r.add_argument("--tau-f", dest="tau_f", type=float, help="EWMA time constant in units of tau")
    r.add_argument("--duration", type=float, help="run length in units of tau")
    r.add_argument("--scheme", choices=["kraus", "stratonovich", "ito"])
    r.add_argument("--workers", type=int)
    r.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")
    r.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("list", help="list experiments")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        print("\n".join(EXPERIMENTS))
        return 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        overrides = {k: getattr(args, k) for k in _FLAGS if getattr(args, k) is not None}
        overrides.update(_parse_set(args.set))
        cfg = load_config(args.config, overrides)
        names = list(EXPERIMENTS) if args.experiment == "all" else [args.experiment]
        ok = True
        for name in names:
            t0 = time.perf_counter()
            res = run_experiment(name, cfg, args.out)
            for c in res.checks:
                print(f"[{name}] {c.line()}")
            print(f"[{name}] {'passed' if res.passed else 'FAILED'} in {time.perf_counter() - t0:.1f} s; "
                  f"{len(res.files)} files in {Path(args.out) / name}")
            ok &= res.passed
    except (ConfigError, UnequalMeasurementTimesError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
