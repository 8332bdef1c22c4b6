import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats
from scipy.integrate import quad

from wavepeel import ggd
from wavepeel.errors import DomainError, EstimationError


def test_make_params_gaussian():
    p = ggd.make_params(1.0, 2.0)
    assert p.beta == pytest.approx(1 / math.sqrt(2), rel=1e-13)
    assert p.alpha == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-13)
    x = np.linspace(-4, 4, 41)
    np.testing.assert_allclose(ggd.pdf(p, x), stats.norm.pdf(x), rtol=1e-12)


def test_make_params_laplace():
    p = ggd.make_params(1.0, 1.0)
    assert p.beta == pytest.approx(math.sqrt(2), rel=1e-13)
    assert p.alpha == pytest.approx(math.sqrt(2) / 2, rel=1e-13)
    x = np.linspace(-4, 4, 41)
    np.testing.assert_allclose(ggd.pdf(p, x), stats.laplace.pdf(x, scale=1 / math.sqrt(2)), rtol=1e-12)
    assert ggd.pdf(p, 0.0) == pytest.approx(0.70711, abs=1e-5)


def test_beta_scales_inversely_with_sigma():
    assert ggd.make_params(2.0, 2.0).beta == pytest.approx(0.5 * ggd.make_params(1.0, 2.0).beta)


@pytest.mark.parametrize("sigma,u", [(1.0, 0.5), (2.5, 1.3), (0.3, 4.0), (1.0, 0.1)])
def test_derived_constants_recompute(sigma, u):
    p = ggd.make_params(sigma, u)
    beta = math.sqrt(math.gamma(3 / u) / math.gamma(1 / u)) / sigma
    assert p.beta == pytest.approx(beta, rel=1e-12)
    assert p.alpha == pytest.approx(beta * u / (2 * math.gamma(1 / u)), rel=1e-12)


@pytest.mark.parametrize("sigma,u", [(1.0, 0.7), (1.0, 2.0), (2.0, 3.0), (0.5, 1.0)])
def test_pdf_normalized_with_variance_sigma2(sigma, u):
    p = ggd.make_params(sigma, u)
    mass = 2 * quad(lambda x: ggd.pdf(p, x), 0, math.inf, epsabs=1e-13, limit=200)[0]
    var = 2 * quad(lambda x: x * x * ggd.pdf(p, x), 0, math.inf, epsabs=1e-13, limit=200)[0]
    assert mass == pytest.approx(1.0, abs=1e-6)
    assert var == pytest.approx(sigma**2, rel=1e-5)


def test_pdf_symmetric():
    p = ggd.make_params(1.7, 0.8)
    x = np.linspace(0, 5, 11)
    np.testing.assert_array_equal(ggd.pdf(p, x), ggd.pdf(p, -x))
    assert ggd.pdf(ggd.make_params(1, 2), 0.0) == pytest.approx(0.39894, abs=1e-5)


def test_params_domain_errors():
    with pytest.raises(DomainError):
        ggd.make_params(0.0, 2.0)
    with pytest.raises(DomainError):
        ggd.make_params(1.0, -1.0)
    with pytest.raises(OverflowError):
        ggd.make_params(1.0, 5e-4)


def test_squared_pdf():
    p = ggd.make_params(1.0, 2.0)
    assert ggd.squared_pdf(p, 0.0) == 0.0
    assert ggd.squared_pdf(p, -3.0) == 0.0
    w = np.linspace(0.01, 10, 200)
    np.testing.assert_allclose(ggd.squared_pdf(p, w), stats.chi2.pdf(w, 1), rtol=1e-12)
    for u in (0.6, 1.0, 3.0):
        q = ggd.make_params(1.3, u)
        mass = quad(lambda w: ggd.squared_pdf(q, w), 0, math.inf, limit=200)[0]
        assert mass == pytest.approx(1.0, abs=1e-6)
        np.testing.assert_allclose(ggd.squared_pdf(q, w), ggd.pdf(q, np.sqrt(w)) / np.sqrt(w), rtol=1e-12)


def test_sample_transform_matches_density():
    # |beta X|^u = G ~ Gamma(1/u): the density of X from the change of variables
    # x -> g = |beta x|^u is alpha exp(-|beta x|^u).
    u, p = 0.8, ggd.make_params(1.0, 0.8)
    x = np.linspace(0.1, 3, 20)
    g = (p.beta * x) ** u
    jac = u * p.beta**u * x ** (u - 1)
    via_gamma = 0.5 * stats.gamma.pdf(g, 1 / u) * jac
    np.testing.assert_allclose(via_gamma, ggd.pdf(p, x), rtol=1e-10)


def test_sample_moments_and_determinism():
    p = ggd.make_params(1.0, 2.0)
    x = ggd.sample(p, 7, 10**6)
    assert 0.995 <= x.std() <= 1.005
    np.testing.assert_array_equal(x, ggd.sample(p, 7, 10**6))
    assert not np.array_equal(x[:100], ggd.sample(p, 8, 100))
    y = ggd.sample(ggd.make_params(1.0, 1.0), 3, 10**6)
    assert stats.kurtosis(y, fisher=False) == pytest.approx(6.0, abs=0.2)
    assert ggd.kurtosis(1.0) == pytest.approx(6.0, rel=1e-12)
    assert ggd.sample(p, 1, 0).size == 0


def test_sample_ks_against_analytic_cdf():
    n = 10**5
    for u in (0.5, 2.0):
        p = ggd.make_params(1.0, u)
        x = ggd.sample(p, 11, n)
        d = stats.kstest(x, lambda v: ggd.cdf(p, v)).statistic
        assert d <= 2 * 2 / math.sqrt(n)


def test_cdf_matches_scipy_gennorm():
    u = 1.5
    p = ggd.make_params(1.0, u)
    x = np.linspace(-3, 3, 13)
    ref = stats.gennorm.cdf(x, u, scale=1 / p.beta)
    np.testing.assert_allclose(ggd.cdf(p, x), ref, atol=1e-12)


def test_moment_ratio_anchor_and_monotone():
    assert ggd.moment_ratio(2.0) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-12)
    us = np.geomspace(0.05, 20, 200)
    r = [ggd.moment_ratio(u) for u in us]
    assert all(b > a for a, b in zip(r, r[1:]))


@given(st.floats(min_value=0.06, max_value=19.0))
def test_moment_ratio_inversion(u):
    assert ggd.invert_moment_ratio(ggd.moment_ratio(u), tol=1e-13) == pytest.approx(u, rel=1e-6)


def test_estimate_examples():
    est = ggd.estimate_params(ggd.sample(ggd.make_params(1.0, 2.0), 5, 10**6))
    assert 1.94 <= est.u <= 2.06
    est = ggd.estimate_params(ggd.sample(ggd.make_params(3.0, 1.0), 6, 10**6))
    assert 2.98 <= est.sigma <= 3.02
    assert 0.95 <= est.u <= 1.05


@pytest.mark.slow
@pytest.mark.parametrize("u", [0.5, 1.0, 2.0, 3.0])
@pytest.mark.parametrize("sigma", [0.5, 1.0, 4.0])
def test_estimate_round_trip(sigma, u):
    est = ggd.estimate_params(ggd.sample(ggd.make_params(sigma, u), 100, 10**6))
    assert est.sigma == pytest.approx(sigma, rel=0.05)
    assert est.u == pytest.approx(u, rel=0.05)


def test_estimate_errors():
    with pytest.raises(EstimationError):
        ggd.estimate_params(np.ones(500))
    with pytest.raises(EstimationError):
        ggd.estimate_params(np.arange(10.0))
    # two-point symmetric law has m1/sqrt(m2) = 1 > R(20)
    with pytest.raises(EstimationError):
        ggd.estimate_params(np.tile([-1.0, 1.0], 200))
