"""The autonomic managers: proportional, fuzzy (with integrator), and a
fixed-value baseline.  Each exposes update(sample) -> next max_requests.
"""

import math
import warnings
from dataclasses import dataclass

from .plant import IntervalSample
from .sysid import ArxModel, stable_gain_interval


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def round_and_clamp(x: float, u_min: int, u_max: int) -> int:
    return round_half_away(min(float(u_max), max(float(u_min), x)))


class FixedController:
    """Constant baseline; demonstrates that one static setting fits no SLA."""

    def __init__(self, u_fixed: int, u_min: int = 1, u_max: int = 10_000):
        self.u_fixed = round_and_clamp(u_fixed, u_min, u_max)

    def update(self, sample: IntervalSample) -> int:
        return self.u_fixed


class ProportionalController:
    """u(k) = u0 + Kp * e(k), rounded and clamped.  Stateless between calls.

    The gain acts on the deviation from the operating point u0; with b < 0
    a negative Kp raises max_requests when the system is too slow.
    """

    def __init__(self, kp: float = -1.5, u0: int = 300, u_min: int = 1,
                 u_max: int = 10_000, model: ArxModel | None = None):
        self.kp = kp
        self.u0 = u0
        self.u_min = u_min
        self.u_max = u_max
        if model is not None:
            report = stable_gain_interval(model, kp)
            if not report.stable:
                warnings.warn(
                    f"Kp={kp} is outside the stable interval "
                    f"({report.kp_min:.4f}, {report.kp_max:.4f})",
                    stacklevel=2,
                )

    def update(self, sample: IntervalSample) -> int:
        return round_and_clamp(self.u0 + self.kp * sample.error, self.u_min, self.u_max)


@dataclass(frozen=True)
class MembershipFunction:
    """Triangular membership over the normalized universe [-1, 1].

    Degree is 1 at the center, 0 at or beyond the feet, linear between; the
    outer functions saturate at 1 beyond their center.
    """
    name: str
    center: float
    left_foot: float
    right_foot: float
    saturate_left: bool = False
    saturate_right: bool = False

    def degree(self, x: float) -> float:
        if self.saturate_left and x <= self.center:
            return 1.0
        if self.saturate_right and x >= self.center:
            return 1.0
        if x == self.center:
            return 1.0
        if x < self.center:
            if x <= self.left_foot:
                return 0.0
            return (x - self.left_foot) / (self.center - self.left_foot)
        if x >= self.right_foot:
            return 0.0
        return (self.right_foot - x) / (self.right_foot - self.center)


MF_NAMES = ("neglarge", "negsmall", "zero", "possmall", "poslarge")

# Inverse pairing: a large negative error (system too slow) commands a large
# positive change in max_requests, and vice versa.
DEFAULT_RULES = (
    ("neglarge", "poslarge"),
    ("negsmall", "possmall"),
    ("zero", "zero"),
    ("possmall", "negsmall"),
    ("poslarge", "neglarge"),
)


def default_membership_functions() -> tuple[MembershipFunction, ...]:
    """Five uniform triangles with 50% overlap: a partition of unity on [-1, 1]."""
    return (
        MembershipFunction("neglarge", -1.0, -1.5, -0.5, saturate_left=True),
        MembershipFunction("negsmall", -0.5, -1.0, 0.0),
        MembershipFunction("zero", 0.0, -0.5, 0.5),
        MembershipFunction("possmall", 0.5, 0.0, 1.0),
        MembershipFunction("poslarge", 1.0, 0.5, 1.5, saturate_right=True),
    )


def fuzzify(mfs: tuple[MembershipFunction, ...], x_norm: float) -> dict[str, float]:
    """Degrees of a crisp normalized value in each set; they sum to 1 on [-1, 1]."""
    return {mf.name: mf.degree(x_norm) for mf in mfs}


class FuzzyController:
    """Fuzzify the normalized error, fire the rule table, defuzzify by
    center average, denormalize, and integrate into max_requests.

    ge scales the raw error (seconds) onto [-1, 1]; the defuzzified output is
    divided by gu to obtain the change in max_requests per interval.
    """

    def __init__(self, ge: float, gu: float, initial_u: int = 300,
                 u_min: int = 1, u_max: int = 10_000,
                 mfs: tuple[MembershipFunction, ...] | None = None,
                 rules: tuple[tuple[str, str], ...] = DEFAULT_RULES):
        if ge <= 0 or gu <= 0:
            raise ValueError(f"normalization gains must be positive, got ge={ge} gu={gu}")
        self.ge = ge
        self.gu = gu
        self.u_min = u_min
        self.u_max = u_max
        self.mfs = mfs if mfs is not None else default_membership_functions()
        self.rules = rules
        self._centers = {mf.name: mf.center for mf in self.mfs}
        self.current_u = round_and_clamp(initial_u, u_min, u_max)

    def normalized_output(self, e_norm: float) -> float:
        """Center-average defuzzification of the rule table at a normalized error."""
        degrees = fuzzify(self.mfs, e_norm)
        num = 0.0
        den = 0.0
        for antecedent, consequent in self.rules:
            strength = degrees[antecedent]
            num += strength * self._centers[consequent]
            den += strength
        # the partition of unity makes den = 1 on [-1, 1]; a zero here is a bug
        assert den > 0.0, "no rule fired; membership functions do not cover the universe"
        return num / den

    def update(self, sample: IntervalSample) -> int:
        e_norm = min(1.0, max(-1.0, self.ge * sample.error))
        du = self.normalized_output(e_norm) / self.gu
        self.current_u = round_and_clamp(self.current_u + du, self.u_min, self.u_max)
        return self.current_u
