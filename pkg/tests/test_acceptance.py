"""Acceptance suite: one PASS/FAIL line per criterion.

Every experiment is run once through the harness at its default settings and
the criterion verdict is taken from the harness checks, so the same numbers
back the CLI exit code and this suite.
"""
import re
from pathlib import Path

import pytest

from conftest import ACCEPTANCE_LINES
from xzmonitor.harness import ExperimentConfig, run_experiment

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def results(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance")
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = run_experiment(name, ExperimentConfig(), out)
        return cache[name]

    return get


def _report(number, title, checks):
    ok = bool(checks) and all(c.passed for c in checks)
    worst = [c for c in checks if not c.passed] or checks
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} | " + "; ".join(
        f"{c.name}: {c.detail}" for c in worst[:3])
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def _select(res, pattern, exclude=None):
    out = [c for c in res.checks if re.search(pattern, c.name)]
    if exclude:
        out = [c for c in out if not re.search(exclude, c.name)]
    return out


def test_criterion_1_autocorrelators(results):
    _report(1, "readout auto/cross correlators, 10^5 tau", _select(results("correlators"), r"^<r_[xz]\(0\)"))


def test_criterion_2_phi_invariance(results):
    _report(2, "rotated-readout correlators over the phi grid", _select(results("correlators"), r"^<r_phi"))


def test_criterion_3_continuous_lg(results):
    _report(3, "continuous LG at phi=+-45 deg, t=0.1 tau, boundary", _select(results("lg-continuous"), r"^LG"))


def test_criterion_4_projective_lg(results):
    _report(4, "projective LG with 10^5 shots", _select(results("lg-projective"), r"^projective"))


def test_criterion_5_constraints(results):
    _report(5, "state-noise constraint correlators", _select(results("constraints"), r"sqrt\(tau\)"))


def test_criterion_6_integrator_equivalence(results):
    _report(6, "same-noise scheme agreement, halving, ordering slope",
            _select(results("compare-integrators"), r"sup-norm|halves|slope"))


def test_criterion_7_purity_and_ball(results):
    _report(7, "Kraus purity and Bloch-ball membership", _select(results("compare-integrators"), r"purity|ball"))


def test_criterion_8_emulator(results):
    res = results("emulator")
    checks = res.checks
    assert len(_select(res, r"^emu_")) == 23
    _report(8, "classical emulator suite", checks)


def test_criterion_9_tracking(results):
    _report(9, "EWMA tracking, quantum and emulator", results("tracking").checks)


def _csvs(root):
    root = Path(root)
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*.csv"))}


def test_criterion_10_reproducibility(tmp_path):
    checks = []
    from xzmonitor.harness import Check

    single = ExperimentConfig(seed=123, duration=2000.0)
    for name in ("correlators", "lg-projective", "tracking"):
        run_experiment(name, single, tmp_path / "first")
        run_experiment(name, single, tmp_path / "second")
    a, b = _csvs(tmp_path / "first"), _csvs(tmp_path / "second")
    checks.append(Check("repeat run", bool(a) and a == b, f"{len(a)} CSV files compared"))

    ens = dict(seed=321, n_traj=400, duration=10.0)
    for workers, tag in ((1, "serial"), (4, "parallel")):
        run_experiment("correlators", ExperimentConfig(**ens, workers=workers), tmp_path / tag)
        run_experiment("constraints", ExperimentConfig(**ens, workers=workers), tmp_path / tag)
    a, b = _csvs(tmp_path / "serial"), _csvs(tmp_path / "parallel")
    checks.append(Check("serial vs 4 workers", bool(a) and a == b, f"{len(a)} CSV files compared"))
    _report(10, "byte-identical outputs", checks)
