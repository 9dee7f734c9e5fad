"""Level-n compound Poisson approximation of the stable process.

At level ``n`` the process has drift -1, Poisson jump arrivals at rate
``gamma_n`` with Pareto II sizes (tail ``(1+x)^-(alpha+1)``), and starts from
the integrated-tail law with tail ``(1+x)^-alpha``.  Rescaling space by
``c0 / n`` and time by ``n^(1+alpha)`` recovers the limit model.

Besides the scale function ``W_n`` and the Laplace exponent and its
inverse, the module exposes the exact finite-n laws of the local-time
aggregate (``prelimit_*``), which the Monte Carlo engine reproduces up to
sampling error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from ._roots import invert_increasing
from .errors import DomainError, ParameterError
from .model import ModelParams


@dataclass(frozen=True)
class DiscreteModel:
    """The level-``n`` model.

    ``drift_deficit`` is ``1 - gamma_n / alpha`` (minus the mean drift of
    the compound Poisson process), stored exactly as ``(b / c0) n^-alpha``.
    """

    params: ModelParams
    n: int
    gamma_n: float
    c0: float
    drift_deficit: float

    @property
    def alpha(self) -> float:
        return self.params.alpha

    @property
    def excursion_count_scale(self) -> float:
        """``c0 n^alpha``: excursions per unit initial mass."""
        return self.c0 * self.n**self.alpha

    def level(self, t: float) -> float:
        """Pre-limit level ``n t / c0`` matching limit time ``t``."""
        return self.n * t / self.c0

    def excursion_count(self, zeta: float) -> int:
        return math.floor(self.excursion_count_scale * zeta)


@dataclass(frozen=True)
class ScaleTable:
    """Grid values ``W_n(k * step)``, ``k = 0..K``."""

    step: float
    values: np.ndarray = field(repr=False)

    @property
    def x_max(self) -> float:
        return self.step * (len(self.values) - 1)

    def __call__(self, x):
        """Piecewise-linear interpolation; zero on the negative half line."""
        xs = np.asarray(x, dtype=float)
        if np.any(xs > self.x_max * (1 + 1e-12)):
            raise DomainError(f"table covers [0, {self.x_max}], got {np.max(xs)}")
        grid = np.arange(len(self.values)) * self.step
        out = np.where(xs < 0, 0.0, np.interp(xs, grid, self.values))
        return float(out) if out.ndim == 0 else out


def make_discrete(p: ModelParams, n: int) -> DiscreteModel:
    """Level-``n`` model with ``n^alpha (1 - gamma_n / alpha) = b / c0`` exactly."""
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    n = int(n)
    c0 = p.c0
    deficit = (p.b / c0) * n ** (-p.alpha)
    if deficit >= 1.0:
        need = (p.b / c0) ** (1.0 / p.alpha)
        raise ParameterError(
            f"gamma_n would be {p.alpha * (1 - deficit):.3g} <= 0 at n={n}; "
            f"use n > {need:.6g}"
        )
    return DiscreteModel(p, n, p.alpha * (1.0 - deficit), c0, deficit)


def jump_tail(dm: DiscreteModel, x: float) -> float:
    """``P(J >= x) = (1 + x)^-(alpha+1)``."""
    if not x >= 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    return (1.0 + x) ** (-(dm.alpha + 1.0))


def _check_unit(u):
    arr = np.asarray(u, dtype=float)
    if np.any(~((arr > 0) & (arr < 1))):
        raise DomainError("u must lie in (0, 1)")
    return arr


def sample_jump(dm: DiscreteModel, u):
    """Inverse-tail transform of a uniform: ``u^(-1/(alpha+1)) - 1``."""
    arr = _check_unit(u)
    out = arr ** (-1.0 / (dm.alpha + 1.0)) - 1.0
    return float(out) if out.ndim == 0 else out


def sample_initial(dm: DiscreteModel, u):
    """Inverse-tail transform for the initial law: ``u^(-1/alpha) - 1``."""
    arr = _check_unit(u)
    out = arr ** (-1.0 / dm.alpha) - 1.0
    return float(out) if out.ndim == 0 else out


def tail_integral(alpha: float, lam: float) -> float:
    """``I(lam) = int_0^inf (1 - e^{-lam x}) (1+x)^-(1+alpha) dx``.

    Closed form ``e^lam lam^alpha Gamma(1-alpha, lam) / alpha`` for small
    ``lam`` (no cancellation as ``lam -> 0``); quadrature of the
    complementary integral otherwise.
    """
    if lam <= 0:
        return 0.0
    if lam < 1.0:
        upper = math.gamma(1.0 - alpha) * special.gammaincc(1.0 - alpha, lam)
        return math.exp(lam) * lam**alpha * upper / alpha
    # x = s / lam puts the exponential on a unit scale.
    rest, _ = integrate.quad(
        lambda s: math.exp(-s) * (1.0 + s / lam) ** (-1.0 - alpha),
        0.0,
        math.inf,
        epsabs=0.0,
        epsrel=1e-13,
        limit=200,
    )
    return 1.0 / alpha - rest / lam


def _tail_integral_slope(alpha, lam, value):
    # d/dlam of e^lam lam^alpha Gamma(1-alpha, lam) / alpha
    return value * (1.0 + alpha / lam) - 1.0 / alpha


def jump_laplace(dm: DiscreteModel, lam: float) -> float:
    """``E[exp(-lam J)]`` for a single jump."""
    if not lam >= 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    return 1.0 - lam * (1.0 / dm.alpha - tail_integral(dm.alpha, lam))


def discrete_exponent(dm: DiscreteModel, lam: float) -> float:
    """``Phi_n(lam) = lam + gamma_n int (e^{-lam x} - 1) Lambda(dx)``.

    Written as ``lam (1 - gamma_n/alpha) + gamma_n lam I(lam)`` so that the
    near-cancellation at small ``lam`` is done analytically.
    """
    if not lam >= 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    if lam == 0:
        return 0.0
    return lam * (dm.drift_deficit + dm.gamma_n * tail_integral(dm.alpha, lam))


def _discrete_slope(dm, lam):
    if lam == 0:
        return dm.drift_deficit
    i = tail_integral(dm.alpha, lam)
    return dm.drift_deficit + dm.gamma_n * (i + lam * _tail_integral_slope(dm.alpha, lam, i))


def discrete_inverse(dm: DiscreteModel, y: float) -> float:
    """Inverse ``Psi_n`` of :func:`discrete_exponent` on ``[0, inf)``."""
    if not y >= 0:
        raise DomainError(f"y must be nonnegative, got {y}")
    if y == 0:
        return 0.0
    # Phi_n(lam) >= lam - gamma_n bounds the root from above.
    hi = y + dm.gamma_n
    return invert_increasing(
        lambda x: discrete_exponent(dm, x), lambda x: _discrete_slope(dm, x), y, hi
    )


def default_step(x_max: float) -> float:
    return min(0.01, x_max / 1e4)


def _trapezoid_scale(dm, h, k_max):
    kern = dm.gamma_n * (1.0 + h * np.arange(k_max + 1)) ** (-(1.0 + dm.alpha))
    w = np.empty(k_max + 1)
    w[0] = 1.0
    denom = 1.0 - 0.5 * h * kern[0]
    for k in range(1, k_max + 1):
        acc = np.dot(kern[1:k], w[k - 1 : 0 : -1]) + 0.5 * kern[k] * w[0]
        w[k] = (1.0 + h * acc) / denom
    return w


def discrete_scale(
    dm: DiscreteModel, step: float | None, x_max: float, *, extrapolate: bool = False
) -> ScaleTable:
    """Solve ``W(x) = 1 + gamma_n int_0^x (1+y)^-(1+alpha) W(x-y) dy`` on a grid.

    Trapezoidal discretisation, O(K^2) in the number of grid points, with
    O(step^2) error.  ``extrapolate=True`` also solves on the half step and
    returns the Richardson combination ``(4 W_{h/2} - W_h) / 3`` on the
    coarse grid, which is far more accurate for the same coarse step.
    """
    if step is None:
        step = default_step(x_max)
    if not step > 0:
        raise DomainError(f"step must be positive, got {step}")
    if not x_max >= step:
        raise DomainError("x_max must be at least one step")
    k_max = int(math.ceil(x_max / step - 1e-9))
    w = _trapezoid_scale(dm, step, k_max)
    if extrapolate:
        fine = _trapezoid_scale(dm, 0.5 * step, 2 * k_max)[::2]
        w = (4.0 * fine - w) / 3.0
    return ScaleTable(step, w)


def z_laplace_from_t(dm: DiscreteModel, W_t: float, lam: float) -> float:
    """Laplace transform of the local time at level ``t`` started from ``t``.

    The count is geometric on {0, 1, ...} with success probability
    ``W_n(0) / W_n(t) = 1 / W_t``.
    """
    if not W_t >= 1:
        raise DomainError(f"W_t must be >= 1, got {W_t}")
    if not lam >= 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    p = 1.0 / W_t
    q = math.exp(-lam)
    return p / (1.0 - q * (1.0 - p))


def z_laplace_from_x(dm: DiscreteModel, W_t: float, W_t_minus_x: float, lam: float) -> float:
    """Laplace transform of the local time at ``t`` started from ``x != t``.

    ``W_t_minus_x`` is ``W_n(t - x)``, zero when ``x > t``.
    """
    if not W_t >= 1:
        raise DomainError(f"W_t must be >= 1, got {W_t}")
    if not 0 <= W_t_minus_x <= W_t:
        raise DomainError("need 0 <= W(t - x) <= W(t)")
    if not lam >= 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    p = 1.0 / W_t
    q = math.exp(-lam)
    grad = (W_t - W_t_minus_x) / W_t
    return 1.0 - grad * (1.0 - q) / (1.0 - q * (1.0 - p))


# Exact finite-n laws of the aggregate ------------------------------------


def local_time_mean(dm: DiscreteModel, W_y: float) -> float:
    """``E[Z(y)]`` for one excursion started from the initial law.

    Integrating the renewal equation against the initial density gives
    ``W - (alpha / gamma_n)(W - 1)`` with ``W = W_n(y)``; equal to one in
    the critical case.
    """
    return W_y - (W_y - 1.0) / (1.0 - dm.drift_deficit)


def reach_probability(dm: DiscreteModel, W_y: float) -> float:
    """``P(Z(y) > 0)``: probability that one excursion visits level ``y``."""
    return local_time_mean(dm, W_y) / W_y


def prelimit_mass_laplace(dm: DiscreteModel, W_y: float, zeta: float, lam: float) -> float:
    """Exact ``E[exp(-lam S_n(t))]`` where ``W_y = W_n(n t / c0)``."""
    k = dm.excursion_count(zeta)
    mu = lam / dm.excursion_count_scale
    q = math.exp(-mu)
    p = 1.0 / W_y
    one = 1.0 - (-math.expm1(-mu)) / (1.0 - q * (1.0 - p)) * reach_probability(dm, W_y)
    return one**k


def prelimit_survival(dm: DiscreteModel, W_y: float, zeta: float) -> float:
    """Exact ``P(tau_n > t)`` where ``W_y = W_n(n t / c0)``."""
    k = dm.excursion_count(zeta)
    return -math.expm1(k * math.log1p(-reach_probability(dm, W_y)))


def prelimit_mean_mass(dm: DiscreteModel, W_y: float, zeta: float) -> float:
    return dm.excursion_count(zeta) / dm.excursion_count_scale * local_time_mean(dm, W_y)


def prelimit_progeny_laplace(dm: DiscreteModel, zeta: float, lam: float) -> float:
    """Exact ``E[exp(-lam T_n)]`` with ``T_n = n^-(1+alpha) * sum of durations``.

    Each excursion from ``x`` has ``E[e^{-s tau}] = e^{-x Psi_n(s)}``;
    averaging over the initial law gives ``1 - alpha I(Psi_n(s))``.
    """
    k = dm.excursion_count(zeta)
    s = lam / dm.n ** (1.0 + dm.alpha)
    psi = discrete_inverse(dm, s)
    return (1.0 - dm.alpha * tail_integral(dm.alpha, psi)) ** k
