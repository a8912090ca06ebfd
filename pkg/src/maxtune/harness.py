"""Experiment orchestration: wires plant and controller into the timed loop
(3-minute intervals, 1-minute sampling window, 60-minute runs by default),
emits CSV series, runs paired controller comparisons, and hosts the Erlang-C
analytic oracle used to validate the simulator.
"""

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

from .controllers import FixedController, FuzzyController, ProportionalController
from .engine import EventKind, RngStream, SimEngine, SimEvent
from .errors import ConfigurationError
from .plant import IntervalSample, WorkerPoolPlant, WorkloadConfig

CONTROLLERS = ("prop", "fuzzy", "fixed")

CSV_COLUMNS = "k,window_end_sec,applied_max_requests,mean_response_sec,n_observed,error_sec"


@dataclass
class ExperimentConfig:
    controller: str
    reference: float
    duration: float = 3600.0
    measurement_interval: float = 180.0
    sampling_window: float = 60.0
    mean_interarrival: float = 0.2
    mean_service: float = 60.0
    seed: int = 1
    initial_max_requests: int = 200
    kp: float = -1.5
    u0: int = 300
    ge: Optional[float] = None   # default 1/reference
    gu: float = 0.05
    u_fixed: int = 300
    u_min: int = 1
    u_max: int = 10_000
    queue_guard: int = 500_000

    @property
    def effective_ge(self) -> float:
        return self.ge if self.ge is not None else 1.0 / self.reference

    def validate(self) -> None:
        if self.controller not in CONTROLLERS:
            raise ConfigurationError(
                f"unknown controller {self.controller!r}; choose from {CONTROLLERS}"
            )
        if self.reference <= 0:
            raise ConfigurationError(f"reference must be positive, got {self.reference}")
        if self.sampling_window > self.measurement_interval:
            raise ConfigurationError(
                f"sampling window ({self.sampling_window}) exceeds the "
                f"measurement interval ({self.measurement_interval})"
            )
        if self.measurement_interval <= 0 or self.sampling_window <= 0:
            raise ConfigurationError("interval and window must be positive")
        n = self.duration / self.measurement_interval
        if abs(n - round(n)) > 1e-9 or round(n) < 1:
            raise ConfigurationError(
                f"duration ({self.duration}) must be a positive multiple of the "
                f"measurement interval ({self.measurement_interval})"
            )
        if self.u_min < 1 or self.u_max < self.u_min:
            raise ConfigurationError(
                f"bad clamp range [{self.u_min}, {self.u_max}]"
            )
        if not (self.u_min <= self.initial_max_requests <= self.u_max):
            raise ConfigurationError(
                f"initial max_requests {self.initial_max_requests} outside "
                f"[{self.u_min}, {self.u_max}]"
            )
        # WorkloadConfig validates the means
        WorkloadConfig(self.mean_interarrival, self.mean_service)

    @property
    def n_intervals(self) -> int:
        return round(self.duration / self.measurement_interval)


@dataclass(frozen=True)
class RunSummary:
    final_half_mean_response: float
    final_half_mean_max_requests: float
    rms_error: float
    converged: bool


@dataclass
class RunReport:
    config: ExperimentConfig
    samples: list[IntervalSample]
    summary: RunSummary
    arrival_times: tuple[float, ...] = ()
    service_times: tuple[float, ...] = ()


@dataclass(frozen=True)
class ComparisonReport:
    prop: RunReport
    fuzzy: RunReport
    efficiency_delta: float  # prop final-half mean max_requests minus fuzzy's


def build_controller(cfg: ExperimentConfig):
    if cfg.controller == "prop":
        return ProportionalController(kp=cfg.kp, u0=cfg.u0,
                                      u_min=cfg.u_min, u_max=cfg.u_max)
    if cfg.controller == "fuzzy":
        return FuzzyController(ge=cfg.effective_ge, gu=cfg.gu,
                               initial_u=cfg.initial_max_requests,
                               u_min=cfg.u_min, u_max=cfg.u_max)
    return FixedController(cfg.u_fixed, u_min=cfg.u_min, u_max=cfg.u_max)


def summarize(samples: list[IntervalSample], cfg: ExperimentConfig) -> RunSummary:
    half = cfg.duration / 2.0
    final = [s for s in samples if s.window_end > half]
    if not final:
        final = samples
    mean_resp = sum(s.mean_response for s in final) / len(final)
    mean_u = sum(s.applied_max_requests for s in final) / len(final)
    rms = math.sqrt(sum(s.error ** 2 for s in samples) / len(samples))
    converged = abs(mean_resp - cfg.reference) <= 0.25 * cfg.reference
    return RunSummary(mean_resp, mean_u, rms, converged)


def run_experiment(cfg: ExperimentConfig, keep_traces: bool = False) -> RunReport:
    """One closed-loop run: sample, control, and actuate at every interval
    boundary.  Deterministic for a fixed (config, seed)."""
    cfg.validate()
    engine = SimEngine()
    arrival_stream = RngStream(cfg.seed, 0)
    service_stream = RngStream(cfg.seed, 1)
    plant = WorkerPoolPlant(
        engine,
        WorkloadConfig(cfg.mean_interarrival, cfg.mean_service),
        arrival_stream,
        service_stream,
        max_requests=cfg.initial_max_requests,
        queue_guard=cfg.queue_guard,
    )
    controller = build_controller(cfg)
    samples: list[IntervalSample] = []
    latest: dict[str, IntervalSample] = {}

    def on_measurement(event: SimEvent) -> None:
        k = event.payload
        t1 = event.fire_at
        sample = plant.sample_window(k, cfg.reference, (t1 - cfg.sampling_window, t1))
        latest["sample"] = sample
        samples.append(sample)

    def on_control(event: SimEvent) -> None:
        plant.set_max_requests(controller.update(latest["sample"]))

    engine.handlers[EventKind.MEASUREMENT_TICK] = on_measurement
    engine.handlers[EventKind.CONTROL_TICK] = on_control
    for k in range(1, cfg.n_intervals + 1):
        t = k * cfg.measurement_interval
        engine.schedule(SimEvent(t, EventKind.MEASUREMENT_TICK, payload=k))
        engine.schedule(SimEvent(t, EventKind.CONTROL_TICK, payload=k))
    engine.schedule(SimEvent(cfg.duration, EventKind.END_OF_RUN))

    plant.start()
    engine.run_until(cfg.duration)

    report = RunReport(config=cfg, samples=samples, summary=summarize(samples, cfg))
    if keep_traces:
        report.arrival_times = tuple(plant.arrival_times)
        report.service_times = tuple(plant.service_times)
    return report


def compare(cfg_prop: ExperimentConfig, cfg_fuzzy: ExperimentConfig,
            keep_traces: bool = False) -> ComparisonReport:
    """Run both controllers on the identical workload realization."""
    shared = ("mean_interarrival", "mean_service", "seed", "reference", "duration",
              "measurement_interval", "sampling_window")
    for name in shared:
        a, b = getattr(cfg_prop, name), getattr(cfg_fuzzy, name)
        if a != b:
            raise ConfigurationError(
                f"compare requires matching {name}: {a} != {b}"
            )
    rp = run_experiment(cfg_prop, keep_traces=keep_traces)
    rf = run_experiment(cfg_fuzzy, keep_traces=keep_traces)
    delta = (rp.summary.final_half_mean_max_requests
             - rf.summary.final_half_mean_max_requests)
    return ComparisonReport(prop=rp, fuzzy=rf, efficiency_delta=delta)


class QueueStepProbe:
    """Step-experiment adapter for the queueing plant.

    initial_output() runs one warm-up interval at the configured initial
    max_requests; measure(u) applies u for one measurement interval and
    returns the sampling-window mean response.
    """

    def __init__(self, cfg: ExperimentConfig):
        cfg.validate()
        self.cfg = cfg
        self.engine = SimEngine()
        self.plant = WorkerPoolPlant(
            self.engine,
            WorkloadConfig(cfg.mean_interarrival, cfg.mean_service),
            RngStream(cfg.seed, 0),
            RngStream(cfg.seed, 1),
            max_requests=cfg.initial_max_requests,
            queue_guard=cfg.queue_guard,
        )
        self.plant.start()
        self._k = 0

    def _run_one_interval(self) -> float:
        self._k += 1
        t1 = self._k * self.cfg.measurement_interval
        self.engine.run_until(t1)
        sample = self.plant.sample_window(
            self._k, self.cfg.reference,
            (t1 - self.cfg.sampling_window, t1))
        return sample.mean_response

    def initial_output(self) -> float:
        return self._run_one_interval()

    def measure(self, u: float) -> float:
        self.plant.set_max_requests(round(u))
        return self._run_one_interval()


# -- analytic oracle -----------------------------------------------------

def erlang_c_wait(lam: float, mu: float, c: int) -> float:
    """Expected M/M/c queue wait, seconds, via the stable Erlang-B recurrence.

    lam: arrivals/second, mu: services/second per worker, c: workers.
    """
    if lam < 0 or mu <= 0 or c < 1:
        raise ConfigurationError(f"bad oracle parameters lam={lam} mu={mu} c={c}")
    if lam == 0:
        return 0.0
    a = lam / mu  # offered load, erlangs
    rho = a / c
    if rho >= 1.0:
        raise ConfigurationError(
            f"unstable load: lam/(c*mu) = {rho:.4f} >= 1"
        )
    b = 1.0
    for n in range(1, c + 1):
        b = a * b / (n + a * b)
    p_wait = b / (1.0 - rho * (1.0 - b))
    return p_wait / (c * mu - lam)


# -- output --------------------------------------------------------------

def _config_header_lines(cfg: ExperimentConfig) -> list[str]:
    lines = [f"# rng={RngStream.GENERATOR_NAME}"]
    for f in sorted(dataclasses.fields(cfg), key=lambda f: f.name):
        value = getattr(cfg, f.name)
        if f.name == "ge":
            value = cfg.effective_ge
        lines.append(f"# {f.name}={value}")
    return lines


def format_csv(report: RunReport) -> str:
    lines = _config_header_lines(report.config)
    lines.append(CSV_COLUMNS)
    for s in report.samples:
        lines.append(
            f"{s.k},{s.window_end:.3f},{s.applied_max_requests},"
            f"{s.mean_response:.6f},{s.n_observed},{s.error:.6f}"
        )
    return "\n".join(lines) + "\n"


def emit_csv(report: RunReport, path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(format_csv(report))
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def plot_report(report: RunReport, path) -> None:
    """Two stacked panels (max_requests and response time per interval) as a
    self-contained vector-graphics file."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ks = [s.k for s in report.samples]
    us = [s.applied_max_requests for s in report.samples]
    ys = [s.mean_response for s in report.samples]
    fig, (ax_u, ax_y) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
    ax_u.step(ks, us, where="post")
    ax_u.set_ylabel("max_requests")
    ax_y.step(ks, ys, where="post")
    ax_y.axhline(report.config.reference, linestyle="--", color="gray",
                 label=f"reference = {report.config.reference:g} s")
    ax_y.set_ylabel("mean response (s)")
    ax_y.set_xlabel("measurement interval k")
    ax_y.legend()
    fig.suptitle(f"{report.config.controller} controller, "
                 f"seed {report.config.seed}")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
