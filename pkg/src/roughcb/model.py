"""The limit model: a spectrally positive (1+alpha)-stable process with drift.

Its Laplace exponent is ``Phi(lam) = b lam + c lam^(1+alpha)`` and its scale
function ``W`` is the increasing function with ``int e^{-lam x} W(x) dx =
1 / Phi(lam)``, vanishing on the negative half line.  In closed form

    W'(x) = x^(alpha-1) E_{alpha,alpha}(-(b/c) x^alpha) / c,
    W(x)  = (1 - E_{alpha,1}(-(b/c) x^alpha)) / b        (b > 0),
    W(x)  = x^alpha / (c Gamma(1+alpha))                 (b = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import specfun
from ._roots import invert_increasing
from .errors import DomainError

# Gauss-Legendre rule for W' over short intervals [t - x, t].
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_SHORT_INCREMENT = 1e-3


@dataclass(frozen=True)
class ModelParams:
    """Parameters ``(alpha, b, c)`` of the limit model."""

    alpha: float
    b: float = 0.0
    c: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.b >= 0.0 or not math.isfinite(self.b):
            raise DomainError(f"b must be a nonnegative real, got {self.b}")
        if not self.c > 0.0 or not math.isfinite(self.c):
            raise DomainError(f"c must be positive, got {self.c}")

    @cached_property
    def c0(self) -> float:
        """Space scaling constant ``(c / Gamma(1 - alpha))^(1/(1+alpha))``."""
        return (self.c / math.gamma(1.0 - self.alpha)) ** (1.0 / (1.0 + self.alpha))

    @property
    def critical(self) -> bool:
        return self.b == 0.0

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "b": self.b, "c": self.c}


def laplace_exponent(p: ModelParams, lam: float) -> float:
    """``Phi(lam) = b lam + c lam^(1+alpha)``."""
    if not lam >= 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    return p.b * lam + p.c * lam ** (1.0 + p.alpha)


def _exponent_slope(p, lam):
    return p.b + p.c * (1.0 + p.alpha) * lam**p.alpha


def levy_density(p: ModelParams, y: float) -> float:
    """Density of the Levy measure, ``c alpha (alpha+1) y^(-alpha-2) / Gamma(1-alpha)``."""
    if not y > 0:
        raise DomainError(f"Levy density is defined for y > 0, got {y}")
    a = p.alpha
    return p.c * a * (a + 1.0) / math.gamma(1.0 - a) * y ** (-a - 2.0)


def inverse_exponent(p: ModelParams, y: float) -> float:
    """Inverse ``Psi`` of the Laplace exponent on ``[0, inf)``."""
    if not y >= 0:
        raise DomainError(f"y must be nonnegative, got {y}")
    if y == 0:
        return 0.0
    # Phi(x) >= c x^(1+alpha) and Phi(x) >= b x, so each bound dominates
    # Psi(y); Newton from above is monotone on convex Phi.
    start = (y / p.c) ** (1.0 / (1.0 + p.alpha))
    if p.b > 0:
        start = min(start, y / p.b)
    hi = start + 1.0
    return invert_increasing(
        lambda x: laplace_exponent(p, x),
        lambda x: _exponent_slope(p, x),
        y,
        hi,
        x0=start,
    )


def _map(fn, x):
    if isinstance(x, np.ndarray):
        return np.array([fn(float(v)) for v in x.ravel()]).reshape(x.shape)
    return fn(float(x))


def _w_prime_scalar(p, x):
    if x <= 0:
        return 0.0
    a = p.alpha
    if p.b == 0:
        return x ** (a - 1.0) / (p.c * math.gamma(a))
    return x ** (a - 1.0) * specfun.ml_two(a, -(p.b / p.c) * x**a) / p.c


def _w_scalar(p, x):
    if x <= 0:
        return 0.0
    a = p.alpha
    if p.b == 0:
        return x**a / (p.c * math.gamma(1.0 + a))
    return specfun.ml_one_complement(a, -(p.b / p.c) * x**a) / p.b


def scale_w_prime(p: ModelParams, x):
    """Derivative ``W'(x)``; zero for ``x <= 0``, integrable blow-up at ``0+``."""
    return _map(lambda v: _w_prime_scalar(p, v), x)


def scale_w(p: ModelParams, x):
    """Scale function ``W(x)``; zero for ``x <= 0``."""
    return _map(lambda v: _w_scalar(p, v), x)


def scale_increment(p: ModelParams, t: float, x: float) -> float:
    """``W(t) - W(t - x)`` for ``x >= 0``, accurate also for ``x << t``.

    ``W`` vanishes on the negative half line, so the increment equals
    ``W(t)`` once ``x >= t``.
    """
    if x <= 0 or t <= 0:
        return 0.0
    if x >= t:
        return _w_scalar(p, t)
    if x > _SHORT_INCREMENT * t:
        return _w_scalar(p, t) - _w_scalar(p, t - x)
    half = 0.5 * x
    mid = t - half
    nodes = mid + half * _GL_NODES
    vals = [_w_prime_scalar(p, float(s)) for s in nodes]
    return half * float(np.dot(_GL_WEIGHTS, vals))


def mean_mass_ratio(p: ModelParams, t: float) -> float:
    """``1 - b W(t)``, evaluated as ``E_{alpha,1}(-(b/c) t^alpha)``."""
    if t <= 0:
        return 1.0
    if p.b == 0:
        return 1.0
    return specfun.ml_one(p.alpha, -(p.b / p.c) * t**p.alpha)
