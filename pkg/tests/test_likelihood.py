import math

import numpy as np
import pytest
from scipy import stats

from bitreg.likelihood import (DegenerateProbability, ScalarModel, bvn_cdf, collision_derivative,
                               collision_probability, fisher_information, fit_mle, log_likelihood,
                               simulate_collisions)


@pytest.mark.parametrize("h, k, rho", [(0.3, -0.7, 0.5), (-1.2, -0.4, -0.8), (0.0, 0.0, 0.3), (0.0, 1.1, -0.2),
                                       (2.0, 0.0, 0.9), (-0.5, 0.0, 0.1)])
def test_bvn_cdf_matches_scipy(h, k, rho):
    ref = stats.multivariate_normal([0, 0], [[1, rho], [rho, 1]]).cdf([h, k])
    assert bvn_cdf(h, k, rho) == pytest.approx(ref, abs=1e-7)


def test_pi_symmetries():
    m = ScalarModel(0.0, 1.0, 2.0, 3.0)
    assert collision_probability(m) == pytest.approx(0.5, abs=1e-12)
    for b in (0.3, 1.0, 2.5):
        assert collision_probability(m.at(b)) + collision_probability(m.at(-b)) == pytest.approx(1.0, abs=1e-12)
    assert collision_probability(m.at(1.0)) > 0.5


@pytest.mark.parametrize("beta, sigma, R, L", [(0.5, 1.0, 2.0, 3.0), (-1.0, 0.5, 3.0, 5.0), (2.0, 2.0, 1.5, 4.0)])
def test_quadrature_routes_agree(beta, sigma, R, L):
    m = ScalarModel(beta, sigma, R, L)
    assert collision_probability(m, "reduced") == pytest.approx(collision_probability(m, "dither2d"), abs=1e-9)


def test_quadrature_matches_monte_carlo():
    m = ScalarModel(0.7, 1.0, 2.0, 3.0)
    n = 400_000
    c = simulate_collisions(m, n, seed=5)
    p = collision_probability(m)
    assert abs(c.mean() - p) < 4 * math.sqrt(p * (1 - p) / n)


def test_derivative_stencils_agree_and_match_slope():
    m = ScalarModel(0.5, 1.0, 2.0, 3.0)
    d1 = collision_derivative(m)
    d2 = collision_derivative(m, stencil="five-point")
    assert d1 == pytest.approx(d2, rel=1e-7)
    h = 1e-3
    fd = (collision_probability(m.at(0.5 + h)) - collision_probability(m.at(0.5 - h))) / (2 * h)
    assert d1 == pytest.approx(fd, rel=1e-5)


def test_fisher_information_positive_and_decreasing_in_range():
    small = fisher_information(ScalarModel(0.5, 1.0, 2.0, 3.0))
    large = fisher_information(ScalarModel(0.5, 1.0, 8.0, 12.0))
    assert small > large > 0


def test_mle_recovers_beta():
    m = ScalarModel(0.8, 1.0, 2.0, 3.0)
    c = simulate_collisions(m, 200_000, seed=3)
    fit = fit_mle(c, m, interval=(-4, 4))
    se = 1 / math.sqrt(200_000 * fisher_information(m))
    assert not fit.at_boundary
    assert abs(fit.beta - 0.8) < 5 * se
    assert fit.log_likelihood == pytest.approx(log_likelihood(c, fit.beta, m), rel=1e-9)


def test_mle_boundary_is_flagged():
    m = ScalarModel(0.8, 1.0, 2.0, 3.0)
    fit = fit_mle(np.ones(50, np.uint8), m, interval=(-2, 2))
    assert fit.at_boundary and fit.beta == 2.0


def test_degenerate_and_invalid_inputs():
    with pytest.raises(ValueError):
        ScalarModel(0.0, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        collision_probability(ScalarModel(0.0, 1.0, 1.0, 1.0), method="mc")
    assert log_likelihood(np.array([]), 0.0, ScalarModel(0.0, 1.0, 1.0, 1.0)) == 0.0
    assert issubclass(DegenerateProbability, ValueError)
