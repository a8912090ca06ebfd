class ConfigurationError(ValueError):
    """Invalid parameter or configuration; rejected before any simulation runs."""


class SchedulingError(RuntimeError):
    """An event was scheduled in the simulated past."""


class IdentifiabilityError(ValueError):
    """Regression data cannot pin down the model (rank-deficient regressors)."""


class DivergenceError(RuntimeError):
    """The pending queue blew past the configured guard; the plant is diverging."""
