"""Laws of the limit process: extinction time, total progeny and mean mass.

With ``W`` the scale function of the limit model, the mass started from
``zeta`` satisfies

    E[exp(-lam X(t))] = exp(-zeta v_t(lam)),
    v_t(lam) = lam (1 - b W(t)) / (1 + lam W(t)),

so that ``P(tau > t) = 1 - exp(-zeta vbar(t))`` with
``vbar(t) = (1 - b W(t)) / W(t)``.  The total progeny has
``E[exp(-lam T)] = exp(-zeta c Psi(lam)^alpha)``.

The closed form of ``v_t`` rests on the identity

    (c / Gamma(1-alpha)) int_0^t W'(t-x) x^-alpha dx = 1 - b W(t),

which :func:`gap_integral` evaluates by quadrature;
:func:`extinction_exponent_integral` evaluates ``v_t`` from its defining
integral without using it.  Both are intended as oracles for tests.

The Feller diffusion (``Phi(lam) = b lam + c lam^2``) is provided as a
baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy import integrate

from . import specfun
from .errors import DomainError
from .model import (
    ModelParams,
    inverse_exponent,
    mean_mass_ratio,
    scale_increment,
    scale_w,
)

POWER_LAW = "power-law"
EXPONENTIAL = "exponential"
EXPONENTIAL_BOUND = "exponential upper bound"


@dataclass(frozen=True)
class TailAsymptote:
    """Tail law ``P(X > x) ~ constant * x^-exponent``.

    For ``regime_note`` other than ``"power-law"`` the record means
    ``constant * exp(-exponent * x)``; an ``"exponential upper bound"`` is a
    one-sided bound, not an equivalence.
    """

    exponent: float
    constant: float
    regime_note: str

    def __call__(self, x: float) -> float:
        if self.regime_note == POWER_LAW:
            return self.constant * x ** (-self.exponent)
        return self.constant * math.exp(-self.exponent * x)


def _check_t(t):
    if not t > 0 or not math.isfinite(t):
        raise DomainError(f"t must be positive and finite, got {t}")


def _check_lam(lam):
    if not lam >= 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")


def _check_zeta(zeta):
    if not zeta > 0 or not math.isfinite(zeta):
        raise DomainError(f"zeta must be positive and finite, got {zeta}")


# Closed forms ---------------------------------------------------------------


def extinction_exponent(p: ModelParams, t: float, lam: float) -> float:
    """``v_t(lam) = lam (1 - b W(t)) / (1 + lam W(t))``."""
    _check_t(t)
    _check_lam(lam)
    if lam == 0:
        return 0.0
    w = scale_w(p, t)
    ratio = mean_mass_ratio(p, t)
    if math.isinf(lam):
        return ratio / w
    return ratio / (w + 1.0 / lam)


def vbar(p: ModelParams, t: float) -> float:
    """``lim_{lam -> inf} v_t(lam) = (1 - b W(t)) / W(t)``."""
    _check_t(t)
    return mean_mass_ratio(p, t) / scale_w(p, t)


def extinction_survival(p: ModelParams, zeta: float, t: float) -> float:
    """``P(tau > t) = 1 - exp(-zeta vbar(t))``."""
    _check_zeta(zeta)
    return -math.expm1(-zeta * vbar(p, t))


def mass_laplace(p: ModelParams, zeta: float, t: float, lam: float) -> float:
    """``E[exp(-lam X(t))] = exp(-zeta v_t(lam))``."""
    _check_zeta(zeta)
    return math.exp(-zeta * extinction_exponent(p, t, lam))


def mean_mass(p: ModelParams, zeta: float, t: float) -> float:
    """``E[X(t)] = zeta (1 - b W(t))``; identically ``zeta`` when ``b = 0``."""
    _check_zeta(zeta)
    if not t >= 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    return zeta * mean_mass_ratio(p, t)


def progeny_exponent(p: ModelParams, lam: float) -> float:
    """``V_T(lam) = c Psi(lam)^alpha``."""
    _check_lam(lam)
    return p.c * inverse_exponent(p, lam) ** p.alpha


def progeny_laplace(p: ModelParams, zeta: float, lam: float) -> float:
    """``E[exp(-lam T)] = exp(-zeta V_T(lam))``."""
    _check_zeta(zeta)
    return math.exp(-zeta * progeny_exponent(p, lam))


def extinction_tail_asymptote(p: ModelParams, zeta: float) -> TailAsymptote:
    """``P(tau > t) ~ C t^-alpha``.

    Critical: ``C = zeta c Gamma(1+alpha)``; subcritical:
    ``C = zeta c / Gamma(1-alpha)``.
    """
    _check_zeta(zeta)
    a = p.alpha
    if p.critical:
        const = zeta * p.c * math.gamma(1.0 + a)
    else:
        const = zeta * p.c / math.gamma(1.0 - a)
    return TailAsymptote(a, const, POWER_LAW)


def progeny_tail_asymptote(p: ModelParams, zeta: float) -> TailAsymptote:
    """``P(T > x) ~ C x^-e`` with ``e = alpha/(1+alpha)`` (critical) or ``alpha``."""
    _check_zeta(zeta)
    a = p.alpha
    if p.critical:
        return TailAsymptote(
            a / (1.0 + a),
            zeta * p.c ** (1.0 / (1.0 + a)) / math.gamma(1.0 / (1.0 + a)),
            POWER_LAW,
        )
    return TailAsymptote(a, zeta * p.c / (p.b**a * math.gamma(1.0 - a)), POWER_LAW)


# Quadrature oracles ----------------------------------------------------------

_ORACLE_EPSREL = 1e-10


def _quad(f, lo, hi):
    val, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=_ORACLE_EPSREL, limit=400)
    return val


def _ml_factor(p, s):
    """``W'(s) s^(1-alpha) = E_{alpha,alpha}(-(b/c) s^alpha) / c``."""
    if p.b == 0:
        return 1.0 / (p.c * math.gamma(p.alpha))
    return specfun.ml_two(p.alpha, -(p.b / p.c) * s**p.alpha) / p.c


def gap_integral(p: ModelParams, t: float) -> float:
    """``(c / Gamma(1-alpha)) int_0^t W'(t-x) x^-alpha dx`` by quadrature.

    The two endpoint singularities are removed by ``u = x^(1-alpha)`` on
    ``(0, t/2)`` and ``w = (t-x)^alpha`` on ``(t/2, t)``.
    """
    _check_t(t)
    a = p.alpha
    half = 0.5 * t

    # x^-alpha dx = du / (1 - alpha)
    def left(u):
        x = u ** (1.0 / (1.0 - a))
        s = t - x
        return _ml_factor(p, s) * s ** (a - 1.0) / (1.0 - a)

    # W'(s) ds = _ml_factor(s) dw / alpha with s = w^(1/alpha)
    def right(w):
        s = w ** (1.0 / a)
        return _ml_factor(p, s) * (t - s) ** (-a) / a

    total = _quad(left, 0.0, half ** (1.0 - a)) + _quad(right, 0.0, half**a)
    return p.c / math.gamma(1.0 - a) * total


@lru_cache(maxsize=4096)
def _increment_moment(p: ModelParams, t: float) -> float:
    """``int_0^inf (W(t) - W(t-x)) alpha x^(-alpha-1) dx``."""
    a = p.alpha
    half = 0.5 * t

    # x = u^(1/(1-alpha)): alpha x^(-alpha-1) dx = alpha / (1-alpha) du / x
    def left(u):
        x = u ** (1.0 / (1.0 - a))
        return scale_increment(p, t, x) / x * a / (1.0 - a)

    # x = t - w^(1/alpha): dx = w^(1/alpha - 1) dw / alpha
    def right(w):
        s = w ** (1.0 / a)
        x = t - s
        return scale_increment(p, t, x) * x ** (-a - 1.0) * w ** (1.0 / a - 1.0)

    near = _quad(left, 0.0, half ** (1.0 - a))
    far = _quad(right, 0.0, half**a) if half > 0 else 0.0
    tail = scale_w(p, t) * t ** (-a)
    return near + far + tail


def extinction_exponent_integral(p: ModelParams, t: float, lam: float) -> float:
    """``v_t(lam)`` from its defining integral over the Levy measure.

    ``(c / Gamma(1-alpha)) int_0^inf lam (W(t) - W(t-x)) / (lam W(t) + 1)
    alpha x^(-alpha-1) dx``, with ``W = 0`` on the negative half line.
    The piece over ``(t, inf)`` is done in closed form.
    """
    _check_t(t)
    _check_lam(lam)
    if lam == 0:
        return 0.0
    moment = _increment_moment(p, float(t))
    w = scale_w(p, t)
    return p.c / math.gamma(1.0 - p.alpha) * moment / (w + 1.0 / lam)


# Feller diffusion baseline ---------------------------------------------------


def _check_feller(b, c):
    if not b >= 0 or not math.isfinite(b):
        raise DomainError(f"b must be a nonnegative real, got {b}")
    if not c > 0 or not math.isfinite(c):
        raise DomainError(f"c must be positive, got {c}")


def feller_mass_laplace(b: float, c: float, zeta: float, t: float, lam: float) -> float:
    """``E[exp(-lam Y(t))]`` for the Feller diffusion with ``Phi = b lam + c lam^2``."""
    _check_feller(b, c)
    _check_zeta(zeta)
    _check_lam(lam)
    if not t >= 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    if b == 0:
        u = lam / (1.0 + c * lam * t)
    else:
        # (1 - e^{-bt}) / b, stable for small b t
        growth = -math.expm1(-b * t) / b
        u = lam * math.exp(-b * t) / (1.0 + c * lam * growth)
    return math.exp(-zeta * u)


def feller_survival(b: float, c: float, zeta: float, t: float) -> float:
    """``P(tau > t)`` for the Feller diffusion."""
    _check_feller(b, c)
    _check_zeta(zeta)
    _check_t(t)
    if b == 0:
        rate = 1.0 / (c * t)
    else:
        rate = b / (c * math.expm1(b * t))
    return -math.expm1(-zeta * rate)


def feller_progeny_laplace(b: float, c: float, zeta: float, lam: float) -> float:
    """``E[exp(-lam T)] = exp(-zeta (sqrt(b^2 + 4 c lam) - b) / (2c))``."""
    _check_feller(b, c)
    _check_zeta(zeta)
    _check_lam(lam)
    # Rationalised to avoid cancellation when 4 c lam << b^2.
    root = 2.0 * lam / (math.sqrt(b * b + 4.0 * c * lam) + b) if lam > 0 else 0.0
    return math.exp(-zeta * root)


def feller_asymptotes(b: float, c: float, zeta: float) -> tuple[TailAsymptote, TailAsymptote]:
    """Tails of (extinction time, total progeny) for the Feller diffusion.

    Critical: ``zeta / (c t)`` and ``zeta x^-1/2 / (sqrt(c) Gamma(1/2))``.
    Subcritical: ``zeta (b/c) e^{-bt}`` and the Chernoff bound
    ``exp(b zeta / (2c) - b^2 x / (4c))``.
    """
    _check_feller(b, c)
    _check_zeta(zeta)
    if b == 0:
        ext = TailAsymptote(1.0, zeta / c, POWER_LAW)
        prog = TailAsymptote(0.5, zeta / (math.sqrt(c) * math.gamma(0.5)), POWER_LAW)
    else:
        ext = TailAsymptote(b, zeta * b / c, EXPONENTIAL)
        prog = TailAsymptote(b * b / (4.0 * c), math.exp(b * zeta / (2.0 * c)), EXPONENTIAL_BOUND)
    return ext, prog
