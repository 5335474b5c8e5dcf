"""Joint continuous measurement of sigma_x and sigma_z on a single qubit.

Trajectory simulation (Kraus and SDE schemes), readout correlators,
Leggett-Garg tests, a classical spin emulator that reproduces the readout
statistics, and EWMA tracking.  ``xzmonitor.harness`` drives the named
experiments.
"""
__version__ = "0.1.0"

from .emulator import (
    EmulatedReadouts,
    SpinState,
    UnequalMeasurementTimesError,
    emulate,
    emulate_ensemble,
    make_effective_readouts,
    third_party_reconstruct,
)
from .filtering import FilteredSignal, ewma, tracking_report
from .integrators import (
    ReadoutRecord,
    SimulationConfig,
    TrajectoryRecord,
    replay,
    run,
    run_ensemble,
    run_ito,
    run_kraus,
    run_stratonovich,
)
from .leggett_garg import LGResult, lg_combination, lg_curve, projective_lg, rotate_readout
from .measurement import MeasurementChannel, kraus_update, sample_readout
from .noise import Channel, NoiseStream
from .qubit_state import BlochState, bloch_ball_check, bloch_to_density, density_to_bloch
from .statistics import CorrelationEstimate, autocorrelate, constraint_check, steady_state_check

__all__ = [
    "BlochState",
    "Channel",
    "CorrelationEstimate",
    "EmulatedReadouts",
    "FilteredSignal",
    "LGResult",
    "MeasurementChannel",
    "NoiseStream",
    "ReadoutRecord",
    "SimulationConfig",
    "SpinState",
    "TrajectoryRecord",
    "UnequalMeasurementTimesError",
    "autocorrelate",
    "bloch_ball_check",
    "bloch_to_density",
    "constraint_check",
    "density_to_bloch",
    "emulate",
    "emulate_ensemble",
    "ewma",
    "kraus_update",
    "lg_combination",
    "lg_curve",
    "make_effective_readouts",
    "projective_lg",
    "replay",
    "rotate_readout",
    "run",
    "run_ensemble",
    "run_ito",
    "run_kraus",
    "run_stratonovich",
    "sample_readout",
    "steady_state_check",
    "third_party_reconstruct",
    "tracking_report",
]
