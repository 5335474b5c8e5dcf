"""
All harness experiments
=======================

The same runs as `xzmonitor run all`, from Python.  Outputs land in
./results/<experiment>/.  This takes a couple of minutes.
"""
from xzmonitor.harness import EXPERIMENTS, ExperimentConfig, run_experiment

cfg = ExperimentConfig(seed=0)
for name in EXPERIMENTS:
    res = run_experiment(name, cfg, "results")
    print(f"{name}: {'passed' if res.passed else 'FAILED'}")
    for c in res.checks:
        print("   ", c.line())
