"""Discrete-event kernel: simulation clock, event calendar, seeded variate streams."""

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum, auto
from typing import Any, Callable, Optional

import numpy as np

from .errors import ConfigurationError, SchedulingError


class EventKind(Enum):
    ARRIVAL = auto()
    SERVICE_COMPLETION = auto()
    MEASUREMENT_TICK = auto()
    CONTROL_TICK = auto()
    END_OF_RUN = auto()


@dataclass
class SimEvent:
    fire_at: float
    kind: EventKind
    payload: Any = None


class RngStream:
    """Reproducible uniform variate stream backed by numpy's PCG64.

    Streams with distinct ids are sub-seeded independently from the same
    master seed (via SeedSequence spawn keys), so drawing more variates on
    one stream never shifts another.  Stream 0 is conventionally the
    interarrival stream and stream 1 the service stream.
    """

    GENERATOR_NAME = "numpy-PCG64"

    def __init__(self, seed: int, stream_id: int):
        self.seed = seed
        self.stream_id = stream_id
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream_id,))
        self._rng = np.random.default_rng(ss)

    def uniform(self) -> float:
        """Uniform variate on (0, 1]."""
        return 1.0 - self._rng.random()


def sample_exponential(stream, mean: float) -> float:
    """Exponential variate with the given mean: mean * -ln(U), U on (0, 1]."""
    if mean <= 0:
        raise ConfigurationError(f"exponential mean must be positive, got {mean}")
    return mean * -math.log(stream.uniform())


class SimEngine:
    """Event calendar plus clock.  Events dispatch in (fire_at, insertion) order.

    Handlers are registered per event kind; an event whose kind has no
    handler is dispatched as a no-op (useful for END_OF_RUN markers).
    """

    def __init__(self):
        self.clock = 0.0
        self.handlers: dict[EventKind, Callable[[SimEvent], None]] = {}
        self._heap: list[tuple[float, int, SimEvent]] = []
        self._seq = 0

    def schedule(self, event: SimEvent) -> None:
        if event.fire_at < self.clock:
            raise SchedulingError(
                f"cannot schedule at t={event.fire_at} (clock is {self.clock})"
            )
        heapq.heappush(self._heap, (event.fire_at, self._seq, event))
        self._seq += 1

    def run_until(self, end: float) -> None:
        """Dispatch all events with fire_at <= end; the clock finishes at end."""
        if end < self.clock:
            raise SchedulingError(f"cannot run to t={end} (clock is {self.clock})")
        while self._heap and self._heap[0][0] <= end:
            fire_at, _, event = heapq.heappop(self._heap)
            self.clock = fire_at
            handler = self.handlers.get(event.kind)
            if handler is not None:
                handler(event)
        self.clock = end

    def peek_next(self) -> Optional[SimEvent]:
        return self._heap[0][2] if self._heap else None
