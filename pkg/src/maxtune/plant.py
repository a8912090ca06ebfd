"""The controlled system: an admission-limited worker pool fed by a Poisson
workload, plus a pure linear first-order plant used to unit-test controllers.

Response time throughout means the time a request waits in the pending queue
before entering service; service time is excluded.
"""

from collections import deque
from dataclasses import dataclass

from .engine import EventKind, SimEvent, sample_exponential
from .errors import ConfigurationError, DivergenceError


@dataclass(frozen=True)
class WorkloadConfig:
    mean_interarrival: float  # seconds
    mean_service: float       # seconds

    def __post_init__(self):
        if self.mean_interarrival <= 0 or self.mean_service <= 0:
            raise ConfigurationError(
                "workload means must be strictly positive, got "
                f"interarrival={self.mean_interarrival} service={self.mean_service}"
            )


@dataclass(frozen=True)
class IntervalSample:
    """One measurement-interval record handed to the controller."""
    k: int
    window_end: float
    applied_max_requests: int
    mean_response: float
    n_observed: int
    error: float  # reference - mean_response


class WorkerPoolPlant:
    """max_requests parallel exponential servers behind one unbounded FIFO queue.

    Admission control: at most `max_requests` requests are in service at once;
    the rest wait in arrival order.  Shrinking max_requests never preempts
    requests already in service (lazy shrink): dispatch simply stalls until
    the busy count drops below the new limit.
    """

    def __init__(self, engine, workload: WorkloadConfig, arrival_stream,
                 service_stream, max_requests: int, queue_guard: int = 500_000,
                 auto_arrivals: bool = True):
        if max_requests < 1:
            raise ConfigurationError(f"max_requests must be >= 1, got {max_requests}")
        self.engine = engine
        self.workload = workload
        self.arrival_stream = arrival_stream
        self.service_stream = service_stream
        self.max_requests = int(max_requests)
        self.queue_guard = queue_guard
        self.auto_arrivals = auto_arrivals

        self.pending: deque[tuple[int, float]] = deque()  # (request id, arrival time)
        self.busy = 0
        self.arrivals = 0
        self.completions = 0
        self.service_entries = 0
        self.wait_sum = 0.0
        self.arrival_times: list[float] = []
        self.service_times: list[float] = []

        self._next_id = 0
        self._window_entries: list[tuple[float, float]] = []  # (service entry time, wait)
        self._last_mean = 0.0

        engine.handlers[EventKind.ARRIVAL] = self._on_arrival
        engine.handlers[EventKind.SERVICE_COMPLETION] = self._on_completion

    # -- event handlers -------------------------------------------------

    def start(self) -> None:
        """Schedule the first arrival."""
        dt = sample_exponential(self.arrival_stream, self.workload.mean_interarrival)
        self.engine.schedule(SimEvent(self.engine.clock + dt, EventKind.ARRIVAL))

    def _on_arrival(self, event: SimEvent) -> None:
        now = self.engine.clock
        self.arrivals += 1
        self.arrival_times.append(now)
        self.pending.append((self._next_id, now))
        self._next_id += 1
        if len(self.pending) > self.queue_guard:
            raise DivergenceError(
                f"pending queue exceeded guard of {self.queue_guard} at t={now}"
            )
        self.dispatch_if_free()
        if self.auto_arrivals:
            dt = sample_exponential(self.arrival_stream, self.workload.mean_interarrival)
            self.engine.schedule(SimEvent(now + dt, EventKind.ARRIVAL))

    def _on_completion(self, event: SimEvent) -> None:
        self.busy -= 1
        self.completions += 1
        self.dispatch_if_free()

    def dispatch_if_free(self) -> None:
        """Move queued requests into service while capacity allows."""
        now = self.engine.clock
        while self.busy < self.max_requests and self.pending:
            _, arrived = self.pending.popleft()
            wait = now - arrived
            self._window_entries.append((now, wait))
            self.wait_sum += wait
            self.service_entries += 1
            self.busy += 1
            st = sample_exponential(self.service_stream, self.workload.mean_service)
            self.service_times.append(st)
            self.engine.schedule(SimEvent(now + st, EventKind.SERVICE_COMPLETION))

    # -- actuation and measurement --------------------------------------

    def set_max_requests(self, value: int) -> None:
        if value < 1:
            raise ConfigurationError(f"max_requests must be >= 1, got {value}")
        self.max_requests = int(value)
        self.dispatch_if_free()

    def sample_window(self, k: int, reference: float,
                      window: tuple[float, float]) -> IntervalSample:
        """Average response times of requests that entered service in the window.

        An empty window holds the previous interval's value (n_observed = 0
        flags this in the output).
        """
        t0, t1 = window
        waits = [w for (t, w) in self._window_entries if t0 < t <= t1]
        if waits:
            mean = sum(waits) / len(waits)
        else:
            mean = self._last_mean
        self._last_mean = mean
        self._window_entries = [(t, w) for (t, w) in self._window_entries if t > t1]
        return IntervalSample(
            k=k,
            window_end=t1,
            applied_max_requests=self.max_requests,
            mean_response=mean,
            n_observed=len(waits),
            error=reference - mean,
        )

    @property
    def in_system(self) -> int:
        return self.busy + len(self.pending)

    @property
    def mean_wait(self) -> float:
        """Mean queue wait over every request that entered service so far."""
        if self.service_entries == 0:
            return 0.0
        return self.wait_sum / self.service_entries


class ArxPlant:
    """First-order linear plant y(k+1) = a*y(k) + b*u(k) in deviation variables.

    (y0, u0) is the operating point; step() takes the absolute input and
    returns the absolute next output.
    """

    def __init__(self, a: float, b: float, y0: float = 0.0, u0: float = 0.0,
                 y_dev: float = 0.0):
        self.a = a
        self.b = b
        self.y0 = y0
        self.u0 = u0
        self.y_dev = y_dev

    def step(self, u: float) -> float:
        u_dev = u - self.u0
        self.y_dev = self.a * self.y_dev + self.b * u_dev
        return self.y0 + self.y_dev

    @property
    def output(self) -> float:
        return self.y0 + self.y_dev
