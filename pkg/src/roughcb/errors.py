"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class ParameterError(ValueError):
    """A model or simulation configuration is infeasible."""


class EstimationError(RuntimeError):
    """An estimator has too little (or degenerate) data to produce a value."""
