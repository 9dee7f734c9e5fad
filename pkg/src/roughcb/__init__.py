"""Rough continuous-state branching processes: analytic laws and Monte Carlo checks.

Modules:

* :mod:`roughcb.specfun`: Gamma and Mittag-Leffler functions.
* :mod:`roughcb.model`: limit model, Laplace exponent, scale function.
* :mod:`roughcb.prelimit`: level-n compound Poisson model.
* :mod:`roughcb.analytics`: extinction, progeny and mean-mass laws.
* :mod:`roughcb.simulate`: excursion and aggregate Monte Carlo.
* :mod:`roughcb.stats`: estimators and comparison reports.
* :mod:`roughcb.cli`: command-line entry point.
"""

__version__ = "0.1.0"

from .errors import DomainError, EstimationError, ParameterError
from .model import ModelParams

__all__ = ["DomainError", "EstimationError", "ModelParams", "ParameterError", "__version__"]
