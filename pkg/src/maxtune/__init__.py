"""Autonomic tuning of an admission-controlled web-server worker pool.

A discrete-event M/M/c-style simulator whose worker-pool size (max_requests)
is regulated at fixed intervals by a proportional or a fuzzy controller to
hold the mean queue wait at a reference value, plus system identification
and stability analysis for the underlying first-order model.
"""

from .controllers import (
    FixedController,
    FuzzyController,
    MembershipFunction,
    ProportionalController,
    default_membership_functions,
    fuzzify,
)
from .engine import EventKind, RngStream, SimEngine, SimEvent, sample_exponential
from .errors import (
    ConfigurationError,
    DivergenceError,
    IdentifiabilityError,
    SchedulingError,
)
from .harness import (
    ComparisonReport,
    ExperimentConfig,
    RunReport,
    RunSummary,
    compare,
    emit_csv,
    erlang_c_wait,
    run_experiment,
)
from .plant import ArxPlant, IntervalSample, WorkerPoolPlant, WorkloadConfig
from .sysid import (
    ArxModel,
    StabilityReport,
    closed_loop_pole,
    fit_arx,
    run_step_experiment,
    stable_gain_interval,
)

__all__ = [
    "ArxModel",
    "ArxPlant",
    "ComparisonReport",
    "ConfigurationError",
    "DivergenceError",
    "EventKind",
    "ExperimentConfig",
    "FixedController",
    "FuzzyController",
    "IdentifiabilityError",
    "IntervalSample",
    "MembershipFunction",
    "ProportionalController",
    "RngStream",
    "RunReport",
    "RunSummary",
    "SchedulingError",
    "SimEngine",
    "SimEvent",
    "StabilityReport",
    "WorkerPoolPlant",
    "WorkloadConfig",
    "closed_loop_pole",
    "compare",
    "default_membership_functions",
    "emit_csv",
    "erlang_c_wait",
    "fit_arx",
    "fuzzify",
    "run_experiment",
    "run_step_experiment",
    "sample_exponential",
    "stable_gain_interval",
]
