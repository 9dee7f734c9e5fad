import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roughcb import analytics as A
from roughcb.errors import DomainError
from roughcb.model import ModelParams, inverse_exponent, scale_w

CRIT = ModelParams(0.5, 0.0, 1.0)


def test_extinction_exponent_examples():
    t = math.gamma(1.5) ** 2
    assert scale_w(CRIT, t) == pytest.approx(1.0, rel=1e-14)
    assert A.extinction_exponent(CRIT, t, 1.0) == pytest.approx(0.5, rel=1e-13)
    assert A.extinction_exponent(CRIT, t, 0.0) == 0.0
    with pytest.raises(DomainError):
        A.extinction_exponent(CRIT, 0.0, 1.0)
    with pytest.raises(DomainError):
        A.extinction_exponent(CRIT, 1.0, -1.0)


@pytest.mark.parametrize("p", [CRIT, ModelParams(0.3, 0.5, 2.0), ModelParams(0.8, 2.0, 0.5)])
@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_extinction_exponent_slope_at_zero(p, t):
    h = 1e-6
    slope = (A.extinction_exponent(p, t, h) - A.extinction_exponent(p, t, 0.0)) / h
    assert slope == pytest.approx(1 - p.b * scale_w(p, t), rel=1e-4)


@pytest.mark.parametrize("p", [CRIT, ModelParams(0.7, 0.5, 1.0)])
def test_quadrature_oracle_examples(p):
    t = 1.3
    assert A.extinction_exponent_integral(p, t, 0.0) == 0.0
    for lam in (0.1, 1.0, 10.0):
        assert A.extinction_exponent_integral(p, t, lam) == pytest.approx(
            A.extinction_exponent(p, t, lam), rel=1e-5
        )


def test_quadrature_oracle_critical_closed_form():
    for t in (0.1, 1.0, 10.0):
        lam = 3.0
        expected = lam / (1 + lam * scale_w(CRIT, t))
        assert A.extinction_exponent_integral(CRIT, t, lam) == pytest.approx(expected, rel=1e-5)


@pytest.mark.parametrize("p", [CRIT, ModelParams(0.4, 1.0, 0.5)])
def test_gap_identity_spot(p):
    for t in (0.1, 3.0):
        assert A.gap_integral(p, t) == pytest.approx(1 - p.b * scale_w(p, t), rel=1e-6)


def test_vbar_examples():
    assert A.vbar(CRIT, 1.0) == pytest.approx(math.gamma(1.5), rel=1e-14)
    p = ModelParams(0.5, 2.0, 1.0)
    lead = p.c / math.gamma(1 - p.alpha) * 1e4**-p.alpha
    assert A.vbar(p, 1e4) == pytest.approx(lead, rel=0.05)


@pytest.mark.parametrize("p", [CRIT, ModelParams(0.3, 0.5, 2.0), ModelParams(0.9, 2.0, 1.0)])
def test_vbar_decreasing_to_zero(p):
    ts = np.logspace(-3, 6, 40)
    v = [A.vbar(p, t) for t in ts]
    assert np.all(np.diff(v) < 0)
    assert v[-1] < 0.05 * v[0]


@pytest.mark.parametrize("p", [CRIT, ModelParams(0.3, 0.5, 2.0), ModelParams(0.9, 2.0, 1.0)])
@pytest.mark.parametrize("t", [0.01, 1.0, 100.0])
def test_exponent_concave_and_bounded(p, t):
    lams = np.logspace(-4, 4, 50)
    v = np.array([A.extinction_exponent(p, t, lam) for lam in lams])
    assert np.all(np.diff(v) >= 0)
    slopes = np.diff(v) / np.diff(lams)
    assert np.all(np.diff(slopes) <= 1e-12)
    assert np.all(v <= A.vbar(p, t) * (1 + 1e-12))
    if scale_w(p, t) >= 0.1:
        gap = 1 - A.extinction_exponent(p, t, 1e6) / A.vbar(p, t)
        assert 0 <= gap < 1e-4


def test_extinction_survival():
    assert A.extinction_survival(CRIT, 1.0, 1.0) == pytest.approx(1 - math.exp(-math.gamma(1.5)), rel=1e-14)
    assert A.extinction_survival(CRIT, 1.0, 1.0) == pytest.approx(0.5877919, abs=1e-6)
    for zeta in (1e-6, 1e-9):
        ratio = A.extinction_survival(CRIT, zeta, 2.0) / (zeta * A.vbar(CRIT, 2.0))
        assert ratio == pytest.approx(1.0, abs=10 * zeta)
    assert A.extinction_survival(CRIT, 1.0, 1e12) < 1e-5
    with pytest.raises(DomainError):
        A.extinction_survival(CRIT, 0.0, 1.0)


def test_progeny_examples():
    assert A.progeny_exponent(CRIT, 8.0) == pytest.approx(2.0, rel=1e-13)
    assert A.progeny_exponent(CRIT, 0.0) == 0.0
    p = ModelParams(0.5, 1.0, 1.0)
    assert A.progeny_exponent(p, 1e-6) == pytest.approx((1e-6 / p.b) ** 0.5, rel=1e-3)
    assert A.progeny_laplace(CRIT, 1.0, 0.0) == 1.0
    assert A.progeny_laplace(CRIT, 1.0, 8.0) == pytest.approx(math.exp(-2.0), rel=1e-13)


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(0.05, 0.95), b=st.floats(0.0, 5.0), c=st.floats(0.1, 5.0), lam=st.floats(1e-6, 1e6))
def test_progeny_exponent_is_c_psi_alpha(alpha, b, c, lam):
    p = ModelParams(alpha, b, c)
    v = A.progeny_exponent(p, lam)
    assert v == pytest.approx(p.c * inverse_exponent(p, lam) ** alpha, rel=1e-12)
    assert A.progeny_exponent(p, 2 * lam) > v


def test_mean_mass():
    p = ModelParams(0.6, 0.0, 3.0)
    for t in (1e-3, 1.0, 1e3):
        assert A.mean_mass(p, 2.0, t) == 2.0
    q = ModelParams(0.6, 1.0, 1.0)
    assert A.mean_mass(q, 1.0, 1e-12) == pytest.approx(1.0, abs=1e-6)
    assert A.mean_mass(q, 1.0, 1e8) < 1e-3
    assert A.mean_mass(q, 1.0, 1.0) == pytest.approx(1 - scale_w(q, 1.0), rel=1e-12)


def test_mass_laplace_consistency():
    p = ModelParams(0.6, 0.5, 1.0)
    assert A.mass_laplace(p, 1.0, 1.0, 0.0) == 1.0
    # E[e^{-lam X}] -> P(X = 0) = 1 - P(tau > t) as lam -> infinity.
    assert A.mass_laplace(p, 1.0, 1.0, 1e9) == pytest.approx(1 - A.extinction_survival(p, 1.0, 1.0), rel=1e-6)


def test_extinction_tail_asymptote_examples():
    crit = A.extinction_tail_asymptote(CRIT, 1.0)
    assert (crit.exponent, crit.regime_note) == (0.5, A.POWER_LAW)
    assert crit.constant == pytest.approx(math.gamma(1.5))
    sub = A.extinction_tail_asymptote(ModelParams(0.5, 2.0, 1.0), 1.0)
    assert sub.exponent == 0.5
    assert sub.constant == pytest.approx(1 / math.gamma(0.5))
    assert A.extinction_tail_asymptote(CRIT, 2.0).constant == pytest.approx(2 * crit.constant)


@pytest.mark.parametrize("p", [CRIT, ModelParams(0.3, 0.5, 2.0), ModelParams(0.7, 2.0, 1.0)])
def test_extinction_tail_matches_survival(p):
    tail = A.extinction_tail_asymptote(p, 0.7)
    t = 1e12
    assert A.extinction_survival(p, 0.7, t) / tail(t) == pytest.approx(1.0, rel=0.01)


def test_progeny_tail_asymptote_examples():
    crit = A.progeny_tail_asymptote(CRIT, 1.0)
    assert crit.exponent == pytest.approx(1 / 3)
    assert crit.constant == pytest.approx(1 / math.gamma(2 / 3))
    sub = A.progeny_tail_asymptote(ModelParams(0.5, 1.0, 1.0), 1.0)
    assert sub.exponent == 0.5
    assert sub.constant == pytest.approx(1 / math.gamma(0.5))
    assert A.progeny_tail_asymptote(CRIT, 3.0).constant == pytest.approx(3 * crit.constant)


@pytest.mark.parametrize("p", [CRIT, ModelParams(0.3, 0.5, 2.0), ModelParams(0.7, 2.0, 1.0)])
def test_progeny_tail_is_tauberian_dual(p):
    # P(T > x) ~ C x^-r  <=>  1 - E e^{-lam T} ~ C Gamma(1 - r) lam^r.
    zeta = 0.7
    tail = A.progeny_tail_asymptote(p, zeta)
    lam = 1e-12
    lhs = -math.expm1(-zeta * A.progeny_exponent(p, lam))
    rhs = tail.constant * math.gamma(1 - tail.exponent) * lam**tail.exponent
    assert lhs / rhs == pytest.approx(1.0, rel=0.01)


def test_feller_examples():
    assert A.feller_mass_laplace(0.0, 1.0, 1.0, 1.0, 1.0) == pytest.approx(math.exp(-0.5), rel=1e-15)
    assert A.feller_mass_laplace(1.0, 1.0, 1.0, 1.0, 0.0) == 1.0
    assert A.feller_mass_laplace(1.0, 2.0, 1.5, 0.0, 1.0) == pytest.approx(math.exp(-1.5), rel=1e-15)
    ext, prog = A.feller_asymptotes(0.0, 1.0, 1.0)
    assert (ext.exponent, ext.constant) == (1.0, 1.0)
    ext, prog = A.feller_asymptotes(0.0, 4.0, 1.0)
    assert prog.exponent == 0.5
    assert prog.constant == pytest.approx(1 / (2 * math.gamma(0.5)))
    ext, prog = A.feller_asymptotes(2.0, 1.0, 1.0)
    assert ext.regime_note == A.EXPONENTIAL and ext.exponent == 2.0
    assert prog.regime_note == A.EXPONENTIAL_BOUND and prog.exponent == pytest.approx(1.0)


def test_feller_survival_and_asymptotes():
    for b in (0.0, 0.8):
        ext, _ = A.feller_asymptotes(b, 1.5, 0.4)
        t = 1e6 if b == 0 else 40.0
        assert A.feller_survival(b, 1.5, 0.4, t) / ext(t) == pytest.approx(1.0, rel=1e-3)
    # Survival is the large-lambda limit of the mass transform.
    assert 1 - A.feller_mass_laplace(0.8, 1.5, 0.4, 2.0, 1e12) == pytest.approx(
        A.feller_survival(0.8, 1.5, 0.4, 2.0), rel=1e-9
    )


def test_feller_progeny_chernoff_bound():
    b, c, zeta = 1.0, 2.0, 1.5
    _, bound = A.feller_asymptotes(b, c, zeta)
    # Markov on e^{s T} at s = b^2/(4c): P(T > x) <= E e^{sT} e^{-s x}.
    s = b * b / (4 * c)
    assert math.exp(zeta * b / (2 * c)) == pytest.approx(bound.constant)
    assert bound.exponent == pytest.approx(s)
    # Small lambda: the rationalised root keeps full precision.
    lam = 1e-14
    assert -math.log(A.feller_progeny_laplace(b, c, zeta, lam)) == pytest.approx(zeta * lam / b, rel=1e-9)


def test_feller_domain():
    with pytest.raises(DomainError):
        A.feller_mass_laplace(-1.0, 1.0, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        A.feller_survival(0.0, 0.0, 1.0, 1.0)
