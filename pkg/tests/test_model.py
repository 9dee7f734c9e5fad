import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from roughcb.errors import DomainError
from roughcb.model import (
    ModelParams,
    inverse_exponent,
    laplace_exponent,
    levy_density,
    mean_mass_ratio,
    scale_increment,
    scale_w,
    scale_w_prime,
)

from oracle_data import SCALE_W_HALF_B1_AT_1

GRID = [
    ModelParams(a, b, c)
    for a, b, c in itertools.product((0.3, 0.5, 0.7, 0.9), (0.0, 0.5, 2.0), (0.5, 1.0, 2.0))
]


@pytest.mark.parametrize("alpha, b, c", [(0.0, 0, 1), (1.0, 0, 1), (0.5, -1, 1), (0.5, 0, 0), (0.5, 0, -2)])
def test_invalid_parameters(alpha, b, c):
    with pytest.raises(DomainError):
        ModelParams(alpha, b, c)


def test_c0():
    p = ModelParams(0.5, 1.0, 1.0)
    assert p.c0 == pytest.approx((1.0 / math.sqrt(math.pi)) ** (2.0 / 3.0), rel=1e-15)
    assert p.c0 == pytest.approx(0.6827840632552957, rel=1e-14)
    assert not p.critical and ModelParams(0.5).critical


def test_laplace_exponent_examples():
    assert laplace_exponent(ModelParams(0.5, 0, 1), 1.0) == 1.0
    assert laplace_exponent(ModelParams(0.5, 1, 2), 4.0) == pytest.approx(20.0)
    assert laplace_exponent(ModelParams(0.7, 3, 2), 0.0) == 0.0
    with pytest.raises(DomainError):
        laplace_exponent(ModelParams(0.5), -1.0)


def test_laplace_exponent_matches_levy_khintchine():
    # Phi(lam) - b lam = int (e^{-lam y} - 1 + lam y) Pi(dy).
    p = ModelParams(0.4, 0.7, 1.3)
    lam = 2.5

    def f(y):
        return (math.expm1(-lam * y) + lam * y) * levy_density(p, y)

    val = integrate.quad(f, 0, 1, epsrel=1e-11)[0] + integrate.quad(f, 1, np.inf, epsrel=1e-11)[0]
    assert val + p.b * lam == pytest.approx(laplace_exponent(p, lam), rel=1e-8)


def test_levy_density_examples():
    v1 = levy_density(ModelParams(0.5, 0, 1), 1.0)
    assert v1 == pytest.approx(0.75 / math.sqrt(math.pi), rel=1e-15)
    assert levy_density(ModelParams(0.5, 0, 1), 4.0) == pytest.approx(v1 * 4.0**-2.5, rel=1e-15)
    assert levy_density(ModelParams(0.5, 0, 2), 1.0) == pytest.approx(2 * v1, rel=1e-15)
    for y in (0.0, -1.0):
        with pytest.raises(DomainError):
            levy_density(ModelParams(0.5), y)


def test_inverse_exponent_examples():
    assert inverse_exponent(ModelParams(0.5, 0, 1), 8.0) == pytest.approx(4.0, rel=1e-12)
    assert inverse_exponent(ModelParams(0.3, 2, 1), 0.0) == 0.0
    p = ModelParams(0.6, 1.5, 0.7)
    assert inverse_exponent(p, laplace_exponent(p, 2.3)) == pytest.approx(2.3, rel=1e-10)
    with pytest.raises(DomainError):
        inverse_exponent(p, -1.0)


@pytest.mark.parametrize("p", GRID[::3])
def test_inverse_identity_on_log_grid(p):
    for lam in np.logspace(-6, 6, 25):
        assert laplace_exponent(p, inverse_exponent(p, lam)) == pytest.approx(lam, rel=1e-10)


def test_scale_w_prime_examples():
    assert scale_w_prime(ModelParams(0.5, 0, 1), 4.0) == pytest.approx(0.5 / math.sqrt(math.pi), rel=1e-14)
    assert scale_w_prime(ModelParams(0.5, 1, 1), -1.0) == 0.0
    p = ModelParams(0.5, 2, 1)
    x = 1e3
    lead = p.c * p.alpha * x ** (-p.alpha - 1) / (p.b**2 * math.gamma(1 - p.alpha))
    assert scale_w_prime(p, x) == pytest.approx(lead, rel=0.05)


def test_scale_w_examples():
    assert scale_w(ModelParams(0.5, 0, 1), 1.0) == pytest.approx(1.0 / math.gamma(1.5), rel=1e-14)
    assert scale_w(ModelParams(0.5, 1, 1), 0.0) == 0.0
    assert scale_w(ModelParams(0.5, 1, 1), -3.0) == 0.0
    assert scale_w(ModelParams(0.5, 1, 1), 1.0) == pytest.approx(SCALE_W_HALF_B1_AT_1, rel=1e-8)


def test_scale_w_matches_quadrature_of_derivative():
    p = ModelParams(0.5, 1, 1)
    # x = u^2 absorbs the x^{-1/2} singularity at 0.
    val = integrate.quad(lambda u: 2 * u * scale_w_prime(p, u * u), 0, 1, epsrel=1e-12)[0]
    assert scale_w(p, 1.0) == pytest.approx(val, rel=1e-8)


def _w_laplace(p, lam):
    # Tail beyond X: W <= 1/b for b > 0; for b = 0 integrate the power law exactly.
    x_up = 60.0 / lam
    a = p.alpha
    head = integrate.quad(
        lambda u: scale_w(p, u ** (1 / a)) * math.exp(-lam * u ** (1 / a)) * u ** (1 / a - 1) / a,
        0,
        x_up**a,
        epsrel=1e-11,
        limit=400,
    )[0]
    if p.b == 0:
        tail = special.gammaincc(1 + a, lam * x_up) * math.gamma(1 + a) / (
            p.c * math.gamma(1 + a) * lam ** (1 + a)
        )
    else:
        tail = math.exp(-lam * x_up) / (lam * p.b)
    return head + tail


@pytest.mark.parametrize("p", [ModelParams(0.3, 0, 1), ModelParams(0.5, 1, 1), ModelParams(0.8, 2, 0.5)])
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_scale_function_laplace_identity(p, lam):
    assert _w_laplace(p, lam) == pytest.approx(1.0 / laplace_exponent(p, lam), rel=1e-5)


@pytest.mark.parametrize("p", GRID)
def test_scale_w_increasing_and_saturating(p):
    xs = np.logspace(-4, 6, 60)
    w = scale_w(p, xs)
    assert np.all(np.diff(w) > 0)
    if p.b > 0:
        assert np.all(p.b * w < 1.0)
        # 1 - bW(x) decays like 1 / ((b/c) x^alpha Gamma(1 - alpha)).
        gap = 1.0 - p.b * scale_w(p, 1e6)
        lead = 1.0 / ((p.b / p.c) * 1e6**p.alpha * math.gamma(1 - p.alpha))
        assert gap == pytest.approx(lead, rel=0.1)
        if p.alpha >= 0.5:
            assert p.b * scale_w(p, 1e6) > 0.99


@pytest.mark.parametrize("p", GRID[::2])
def test_derivative_matches_difference_quotient(p):
    for x in (0.05, 1.0, 20.0):
        h = 1e-5 * x
        dq = (scale_w(p, x + h) - scale_w(p, x - h)) / (2 * h)
        assert dq == pytest.approx(scale_w_prime(p, x), rel=1e-6)


def test_scale_w_accepts_arrays():
    p = ModelParams(0.6, 0.5, 1.0)
    xs = np.array([[-1.0, 0.0], [1.0, 2.0]])
    out = scale_w(p, xs)
    assert out.shape == (2, 2)
    assert out[0, 0] == 0.0 and out[1, 1] == pytest.approx(scale_w(p, 2.0))


@settings(max_examples=50, deadline=None)
@given(
    alpha=st.floats(0.1, 0.9),
    b=st.floats(0.0, 3.0),
    t=st.floats(0.01, 100.0),
    frac=st.floats(1e-9, 1.0),
)
def test_scale_increment_consistency(alpha, b, t, frac):
    p = ModelParams(alpha, b, 1.0)
    x = frac * t
    inc = scale_increment(p, t, x)
    assert inc >= 0.0
    if frac > 1e-2:
        assert inc == pytest.approx(scale_w(p, t) - scale_w(p, t - x), rel=1e-9, abs=1e-15)
    else:
        assert inc == pytest.approx(scale_w_prime(p, t) * x, rel=5 * frac)


def test_scale_increment_beyond_t():
    p = ModelParams(0.5, 1.0, 1.0)
    assert scale_increment(p, 2.0, 5.0) == scale_w(p, 2.0)
    assert scale_increment(p, 2.0, 0.0) == 0.0


@pytest.mark.parametrize("p", GRID[::4])
def test_mean_mass_ratio(p):
    for t in (0.1, 1.0, 10.0):
        assert mean_mass_ratio(p, t) == pytest.approx(1 - p.b * scale_w(p, t), rel=1e-10, abs=1e-14)
    assert mean_mass_ratio(p, 0.0) == 1.0
