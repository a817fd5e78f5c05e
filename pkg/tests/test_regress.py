import numpy as np
import pytest

from bitreg.moments import MomentEstimates, estimate_moments
from bitreg.quantize import Ranges, quantize_dataset
from bitreg.regress import (NotPositiveDefinite, estimating_residuals, fit_ols, fit_quantized, normal_ci,
                            normal_quantile, relative_efficiency, sandwich_covariance, solve_moments)
from conftest import linear_data


def test_solve_recovers_exact_system():
    S = np.array([[2.0, 0.5], [0.5, 1.0]])
    beta = np.array([0.3, -1.2])
    m = MomentEstimates(S, S @ beta, 10, 1.0, 1.0)
    got, min_eig = solve_moments(m)
    np.testing.assert_allclose(got, beta, rtol=1e-14)
    assert min_eig == pytest.approx(np.linalg.eigvalsh(S)[0])


def test_not_positive_definite_is_reported():
    m = MomentEstimates(np.array([[1.0, 2.0], [2.0, 1.0]]), np.ones(2), 10, 1.0, 1.0)
    with pytest.raises(NotPositiveDefinite) as exc:
        solve_moments(m)
    assert exc.value.min_eig == pytest.approx(-1.0)


def test_residuals_average_to_zero_at_the_estimate(rng):
    X, y = linear_data(rng, 3000, [1.0, -0.5])
    ds = quantize_dataset(X, y, Ranges.from_bounds(2.5, 4.0), seed=3)
    beta, _ = solve_moments(estimate_moments(ds))
    np.testing.assert_allclose(estimating_residuals(ds, beta).mean(axis=0), 0, atol=1e-10)


def test_fit_is_consistent_and_ci_is_symmetric(rng):
    beta = np.array([0.8, -0.4, 0.2])
    X, y = linear_data(rng, 200_000, beta)
    ds = quantize_dataset(X, y, Ranges.from_bounds(2.5, 4.0), seed=1)
    fit = fit_quantized(ds, level=0.9)
    assert np.all(np.abs(fit.beta_hat - beta) < 5 * fit.std_errors)
    np.testing.assert_allclose(fit.ci.mean(axis=1), fit.beta_hat)
    np.testing.assert_allclose(fit.ci[:, 1] - fit.beta_hat, normal_quantile(0.95) * fit.std_errors)
    out = fit.to_dict()
    assert set(out) >= {"beta", "se", "ci", "level", "n", "d", "minEig"}


def test_sandwich_matches_replication_spread():
    g = np.random.default_rng(8)
    beta = np.array([0.7, -0.3])
    ranges = Ranges.from_bounds(3.0, 5.0)
    est, ses = [], []
    for r in range(300):
        X, y = linear_data(g, 5000, beta)
        ds = quantize_dataset(X, y, ranges, seed=r)
        fit = fit_quantized(ds)
        est.append(fit.beta_hat)
        ses.append(fit.std_errors)
    ratio = np.mean(ses, axis=0) / np.std(est, axis=0, ddof=1)
    assert np.all(np.abs(ratio - 1) < 0.15)


def test_sandwich_is_symmetric_psd(rng):
    X, y = linear_data(rng, 2000, [1.0, 0.0, -1.0])
    ds = quantize_dataset(X, y, Ranges.from_bounds(2.5, 4.0), seed=0)
    cov = sandwich_covariance(ds, solve_moments(estimate_moments(ds))[0])
    assert np.array_equal(cov, cov.T)
    assert np.linalg.eigvalsh(cov)[0] > 0


def test_ols_and_efficiency(rng):
    X, y = linear_data(rng, 500, [2.0, 1.0], sigma=0.0)
    ols = fit_ols(X, y)
    np.testing.assert_allclose(ols.beta_hat, [2.0, 1.0], atol=1e-12)
    with pytest.raises(np.linalg.LinAlgError):
        fit_ols(np.ones((10, 2)), np.ones(10))
    assert relative_efficiency(2.0, 0.5) == 4.0


def test_normal_ci_levels():
    lo, hi = normal_ci(np.array([0.0]), np.array([1.0]), 0.95)[0]
    assert hi == pytest.approx(1.959963984540054) and lo == -hi
    with pytest.raises(ValueError):
        normal_ci(np.array([0.0]), np.array([1.0]), 1.5)


def test_scale_equivariance(rng):
    """Scaling y and L by 2 leaves every bit unchanged and doubles the estimate."""
    X, y = linear_data(rng, 4000, [0.6, -0.2])
    a = fit_quantized(quantize_dataset(X, y, Ranges.from_bounds(2.5, 4.0), seed=5))
    b = fit_quantized(quantize_dataset(X, 2 * y, Ranges.from_bounds(2.5, 8.0), seed=5))
    assert np.array_equal(b.beta_hat, 2 * a.beta_hat)
    np.testing.assert_allclose(b.std_errors, 2 * a.std_errors, rtol=1e-12)
