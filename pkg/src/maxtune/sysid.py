"""System identification and stability analysis for the first-order model
y(k+1) = a*y(k) + b*u(k): step experiments, least-squares fitting, and the
closed-loop pole a - b*Kp under proportional feedback.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ConfigurationError, IdentifiabilityError


@dataclass(frozen=True)
class ArxModel:
    a: float
    b: float
    y0: float
    u0: float
    residual_rms: float


@dataclass(frozen=True)
class StabilityReport:
    pole: float
    stable: bool
    kp_min: float
    kp_max: float


class ArxProbe:
    """Step-experiment adapter for the linear test plant."""

    def __init__(self, plant):
        self.plant = plant

    def initial_output(self) -> float:
        return self.plant.output

    def measure(self, u: float) -> float:
        return self.plant.step(u)


def run_step_experiment(probe, u_start: float, u_step: float,
                        n_intervals: int) -> list[tuple[float, float]]:
    """Sweep the input in fixed steps, one measurement interval per step.

    probe.measure(u) applies u for one full interval and returns the output
    measured at its end; probe.initial_output() is the output just before
    the sweep starts.  Each pair (u(k), y(k)) holds the output measured at
    the start of interval k, so the series satisfies
    y(k+1) = a*y(k) + b*u(k) exactly on a linear plant.
    """
    if n_intervals < 3:
        raise ConfigurationError(f"need at least 3 intervals, got {n_intervals}")
    data = []
    y = probe.initial_output()
    for k in range(n_intervals):
        u = u_start + k * u_step
        data.append((u, y))
        y = probe.measure(u)
    return data


def fit_arx(data: Sequence[tuple[float, float]], y0: Optional[float] = None,
            u0: Optional[float] = None) -> ArxModel:
    """Ordinary least squares for (a, b) on deviation variables.

    Solved via the closed-form 2x2 normal equations.  Centering defaults to
    the sample means of the supplied data.
    """
    if len(data) < 3:
        raise ConfigurationError(f"need at least 3 data points, got {len(data)}")
    us = [u for u, _ in data]
    ys = [y for _, y in data]
    if u0 is None:
        u0 = sum(us) / len(us)
    if y0 is None:
        y0 = sum(ys) / len(ys)
    ud = [u - u0 for u in us]
    yd = [y - y0 for y in ys]

    # regress yd[k+1] on (yd[k], ud[k])
    syy = sum(y * y for y in yd[:-1])
    suu = sum(u * u for u in ud[:-1])
    syu = sum(y * u for y, u in zip(yd[:-1], ud[:-1]))
    sty = sum(t * y for t, y in zip(yd[1:], yd[:-1]))
    stu = sum(t * u for t, u in zip(yd[1:], ud[:-1]))

    det = syy * suu - syu * syu
    scale = max(syy, suu, 1e-300)
    if abs(det) <= 1e-12 * scale * scale:
        raise IdentifiabilityError(
            "regressors are rank deficient; vary the input (and output) to identify a and b"
        )
    a = (sty * suu - stu * syu) / det
    b = (stu * syy - sty * syu) / det

    n = len(yd) - 1
    ss = sum((yd[k + 1] - a * yd[k] - b * ud[k]) ** 2 for k in range(n))
    return ArxModel(a=a, b=b, y0=y0, u0=u0, residual_rms=math.sqrt(ss / n))


def closed_loop_pole(model: ArxModel, kp: float) -> float:
    """Pole of the proportional loop u(k) = Kp*e(k): a - b*Kp."""
    return model.a - model.b * kp


def stable_gain_interval(model: ArxModel, kp: float = 0.0) -> StabilityReport:
    """Exact open interval of gains with |a - b*Kp| < 1, plus the pole at kp."""
    if model.b == 0:
        raise ConfigurationError("b = 0: the input does not actuate the output")
    lo, hi = sorted(((model.a - 1.0) / model.b, (model.a + 1.0) / model.b))
    pole = closed_loop_pole(model, kp)
    return StabilityReport(pole=pole, stable=abs(pole) < 1.0, kp_min=lo, kp_max=hi)
