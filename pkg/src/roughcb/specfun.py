"""Gamma and Mittag-Leffler functions on the nonpositive real axis.

Only the two Mittag-Leffler families needed by the scale function are
provided,

    E_{a,1}(z) = sum_n z^n / Gamma(a n + 1),
    E_{a,a}(z) = sum_n z^n / Gamma(a (n + 1)),

for 0 < a < 1 and real z <= 0.  Evaluation is split in three regimes by
the reduced argument ``r = |z| ** (1 / a)``:

* ``r <= 5``: the defining series with compensated summation.  The largest
  term grows like ``exp(r)``, so this bound keeps cancellation below ~1e-13.
* ``5 < r < 60``: the Laplace-type integral representation
  ``E_{a,b}(-t^a) = int_0^inf exp(-r t) K_{a,b}(r) dr``, integrated by
  adaptive quadrature after the substitution ``u = r^a``.
* ``r >= 60``: the algebraic asymptotic expansion
  ``-sum_{k>=1} z^{-k} / Gamma(b - a k)`` truncated at its smallest term,
  whose size is about ``exp(-r)``.

All functions accept floats or numpy arrays and return the same kind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError

SERIES_LIMIT = 5.0
ASYMPTOTIC_LIMIT = 60.0

_SERIES_MAX_TERMS = 400
_ASYMPTOTIC_MAX_TERMS = 600
_QUAD_EPSREL = 1e-13


@dataclass(frozen=True)
class MLRegime:
    """One evaluation regime: used for ``lower < |z| <= switch_point``."""

    kind: str
    lower: float
    switch_point: float

    def __post_init__(self):
        if self.kind not in ("series", "integral", "asymptotic"):
            raise DomainError(f"unknown regime kind {self.kind!r}")
        if not self.switch_point > 0:
            raise DomainError("switch_point must be positive")


def ml_regimes(alpha: float) -> tuple[MLRegime, MLRegime, MLRegime]:
    """Regime boundaries in ``|z|`` for index ``alpha``."""
    _check_alpha(alpha)
    s1 = SERIES_LIMIT**alpha
    s2 = ASYMPTOTIC_LIMIT**alpha
    return (
        MLRegime("series", 0.0, s1),
        MLRegime("integral", s1, s2),
        MLRegime("asymptotic", s2, math.inf),
    )


def gamma_fn(x: float) -> float:
    """Gamma function; raises :class:`DomainError` at the poles."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise DomainError(f"Gamma has a pole at {x}")
    return math.gamma(x)


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def _prepare(alpha, z):
    _check_alpha(alpha)
    arr = np.asarray(z, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError("z is NaN")
    if np.any(arr > 0):
        raise DomainError("only nonpositive arguments are supported")
    return arr


def _series(alpha, beta, z, *, skip_first=False):
    """Compensated partial sums of sum_n z^n / Gamma(alpha n + beta)."""
    total = np.zeros_like(z)
    comp = np.zeros_like(z)
    power = np.ones_like(z)
    start = 1 if skip_first else 0
    if skip_first:
        power = power * z
    for n in range(start, _SERIES_MAX_TERMS):
        term = power * special.rgamma(alpha * n + beta)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if n >= start + 2 and np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
        power = power * z
    return total


def _asymptotic(alpha, beta, z):
    """Optimally truncated algebraic expansion for large negative z."""
    x = -z
    logx = np.log(x)
    total = np.zeros_like(z)
    prev_env = np.full_like(z, np.inf)
    active = np.ones(z.shape, dtype=bool)
    for k in range(1, _ASYMPTOTIC_MAX_TERMS):
        g = beta - alpha * k
        # 1/Gamma(g) = Gamma(1-g) sin(pi g) / pi, kept in log form.
        log_env = special.gammaln(1.0 - g) - k * logx
        env = np.exp(log_env)
        active &= env <= prev_env
        if not np.any(active):
            break
        term = -((-1.0) ** k) * env * math.sin(math.pi * g) / math.pi
        total = np.where(active, total + term, total)
        active &= env > 1e-18 * np.abs(total)
        prev_env = env
    return total


def _integral_scalar(alpha, beta, x):
    """E_{alpha,beta}(-x) from the Laplace-type integral representation."""
    t = x ** (1.0 / alpha)
    s = math.sin(alpha * math.pi)
    c = math.cos(alpha * math.pi)
    p = 1.0 / alpha
    # exp(-t u^p) underflows beyond this cutoff.
    cutoff = (745.0 / t) ** alpha
    if beta == 1.0:
        def f(u):
            return math.exp(-t * u**p) / (u * u + 2.0 * u * c + 1.0)
        scale = s / (math.pi * alpha)
    else:
        def f(u):
            return u**p * math.exp(-t * u**p) / (u * u + 2.0 * u * c + 1.0)
        scale = t ** (1.0 - alpha) * s / (math.pi * alpha)
    pts = [v for v in (0.5, 1.0, 2.0) if v < cutoff]
    val, _ = integrate.quad(
        f, 0.0, cutoff, points=pts or None, epsabs=0.0, epsrel=_QUAD_EPSREL, limit=200
    )
    return scale * val


def _rgamma(x):
    if x <= 0 and x == math.floor(x):
        return 0.0
    if x > 171.0:
        return 0.0
    return 1.0 / math.gamma(x)


def _series_scalar(alpha, beta, z, skip_first):
    total = 0.0
    comp = 0.0
    start = 1 if skip_first else 0
    power = z if skip_first else 1.0
    for n in range(start, _SERIES_MAX_TERMS):
        term = power * _rgamma(alpha * n + beta)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if n >= start + 2 and abs(term) <= 1e-17 * abs(total):
            break
        power *= z
    return total


def _asymptotic_scalar(alpha, beta, z):
    logx = math.log(-z)
    total = 0.0
    prev_env = math.inf
    for k in range(1, _ASYMPTOTIC_MAX_TERMS):
        g = beta - alpha * k
        env = math.exp(math.lgamma(1.0 - g) - k * logx)
        if env > prev_env:
            break
        total -= (-1.0) ** k * env * math.sin(math.pi * g) / math.pi
        if env <= 1e-18 * abs(total):
            break
        prev_env = env
    return total


def _evaluate_scalar(alpha, beta, z, complement):
    r = abs(z) ** (1.0 / alpha)
    if r <= SERIES_LIMIT:
        if complement:
            return -_series_scalar(alpha, beta, z, True)
        return _series_scalar(alpha, beta, z, False)
    if r >= ASYMPTOTIC_LIMIT:
        val = _asymptotic_scalar(alpha, beta, z)
    else:
        val = _integral_scalar(alpha, beta, -z)
    return 1.0 - val if complement else val


def _integral(alpha, beta, z):
    out = np.empty_like(z)
    flat_in = z.ravel()
    flat_out = out.ravel()
    for i, v in enumerate(flat_in):
        flat_out[i] = _integral_scalar(alpha, beta, -float(v))
    return out


def _evaluate(alpha, beta, z, *, complement=False):
    if isinstance(z, (float, int)) and not isinstance(z, bool):
        _check_alpha(alpha)
        if not z <= 0:
            raise DomainError("only nonpositive arguments are supported")
        return _evaluate_scalar(alpha, beta, float(z), complement)
    arr = _prepare(alpha, z)
    scalar = arr.ndim == 0
    if scalar:
        return _evaluate_scalar(alpha, beta, float(arr), complement)
    z1 = np.atleast_1d(arr)
    out = np.empty_like(z1)
    r = np.abs(z1) ** (1.0 / alpha)
    ser = r <= SERIES_LIMIT
    asy = r >= ASYMPTOTIC_LIMIT
    mid = ~(ser | asy)
    if np.any(ser):
        if complement:
            out[ser] = -_series(alpha, beta, z1[ser], skip_first=True)
        else:
            out[ser] = _series(alpha, beta, z1[ser])
    for mask, fn in ((mid, _integral), (asy, _asymptotic)):
        if np.any(mask):
            vals = fn(alpha, beta, z1[mask])
            out[mask] = 1.0 - vals if complement else vals
    if scalar:
        return float(out[0])
    return out


def ml_two(alpha: float, z):
    """Two-parameter Mittag-Leffler function ``E_{alpha,alpha}(z)``, z <= 0.

    ``ml_two(alpha, 0) == 1 / Gamma(alpha)``.
    """
    return _evaluate(alpha, float(alpha), z)


def ml_one(alpha: float, z):
    """One-parameter Mittag-Leffler function ``E_{alpha,1}(z)``, z <= 0."""
    return _evaluate(alpha, 1.0, z)


def ml_one_complement(alpha: float, z):
    """``1 - E_{alpha,1}(z)`` without cancellation for small ``|z|``."""
    return _evaluate(alpha, 1.0, z, complement=True)
