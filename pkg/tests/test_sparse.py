import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bitreg.moments import MomentEstimates, estimate_moments
from bitreg.quantize import Ranges, quantize_dataset
from bitreg.sparse import (Infeasible, LassoConfig, compute_debias_matrix, debias, debias_matrix_auto, default_mu,
                           fit_lasso, lasso_objective, project_l1_ball, soft_threshold)

vec = arrays(np.float64, st.integers(1, 20), elements=st.floats(-100, 100))


@given(vec, st.floats(0.01, 50))
def test_projection_is_feasible_and_idempotent(v, r):
    p = project_l1_ball(v, r)
    assert np.abs(p).sum() <= r * (1 + 1e-12) + 1e-12
    np.testing.assert_allclose(project_l1_ball(p, r), p, atol=1e-9)
    if np.abs(v).sum() <= r:
        assert np.array_equal(p, v)


@settings(max_examples=50)
@given(vec, st.floats(0.01, 50), st.integers(0, 2 ** 32))
def test_projection_is_closest_point(v, r, seed):
    p = project_l1_ball(v, r)
    g = np.random.default_rng(seed)
    for _ in range(20):
        q = project_l1_ball(g.standard_normal(v.size) * 10, r)
        assert np.linalg.norm(v - p) <= np.linalg.norm(v - q) + 1e-9


def test_soft_threshold():
    np.testing.assert_array_equal(soft_threshold(np.array([-3.0, -0.5, 0.0, 0.5, 3.0]), 1.0),
                                  [-2.0, 0.0, 0.0, 0.0, 2.0])


def moments_from(S, beta, n=1000):
    S = np.asarray(S, float)
    return MomentEstimates(S, S @ np.asarray(beta, float), n, 1.0, 1.0)


def test_lasso_orthogonal_design_is_soft_threshold():
    m = moments_from(np.eye(4), [2.0, -0.3, 0.0, 1.0])
    res = fit_lasso(m, LassoConfig(lam=0.5))
    assert res.converged
    np.testing.assert_allclose(res.beta, [1.5, 0.0, 0.0, 0.5], atol=1e-9)
    np.testing.assert_array_equal(res.support, [0, 3])


def test_lasso_zero_penalty_is_least_squares():
    S = np.array([[2.0, 0.3, 0.0], [0.3, 1.0, 0.2], [0.0, 0.2, 1.5]])
    beta = np.array([1.0, -2.0, 0.5])
    res = fit_lasso(moments_from(S, beta), LassoConfig(lam=0.0, tol=1e-12))
    np.testing.assert_allclose(res.beta, beta, atol=1e-9)


def test_lasso_respects_ball_and_decreases_objective(rng):
    A = rng.standard_normal((30, 8))
    S = A.T @ A / 30
    m = moments_from(S, rng.standard_normal(8) * 3)
    res = fit_lasso(m, LassoConfig(lam=0.05, radius=1.0))
    assert res.converged
    assert np.abs(res.beta).sum() <= 1.0 + 1e-9
    assert res.objective <= lasso_objective(np.zeros(8), m, 0.05)
    # no feasible point nearby does better
    for _ in range(200):
        b = project_l1_ball(res.beta + 0.01 * rng.standard_normal(8), 1.0)
        assert lasso_objective(b, m, 0.05) >= res.objective - 1e-9


def test_lasso_handles_indefinite_sigma_with_ball():
    S = np.array([[1.0, 0.0], [0.0, -0.5]])
    m = MomentEstimates(S, np.array([0.2, 0.1]), 100, 1.0, 1.0)
    res = fit_lasso(m, LassoConfig(lam=0.01, radius=2.0))
    assert res.converged and np.abs(res.beta).sum() <= 2.0 + 1e-9


def test_lasso_config_validation():
    with pytest.raises(ValueError):
        LassoConfig(lam=-1.0)
    with pytest.raises(ValueError):
        LassoConfig(lam=1.0, radius=0.0)


def test_debias_matrix_constraint_and_exact_inverse(rng):
    A = rng.standard_normal((200, 6))
    S = A.T @ A / 200
    m = moments_from(S, np.zeros(6))
    M = compute_debias_matrix(m, 0.05)
    assert np.abs(M @ S - np.eye(6)).max() <= 0.05 * (1 + 1e-8) + 1e-13
    tight = compute_debias_matrix(m, 1e-9)
    np.testing.assert_allclose(tight, np.linalg.inv(S), atol=1e-6)


def test_debias_infeasible_and_auto_retry():
    S = np.array([[1.0, 1.0], [1.0, 1.0]])  # singular: tiny mu cannot be met
    m = moments_from(S, np.zeros(2))
    with pytest.raises(Infeasible):
        compute_debias_matrix(m, 1e-3, max_iter=2000)
    M, mu = debias_matrix_auto(m, mu=0.2)
    assert mu >= 0.2 and np.abs(M @ S - np.eye(2)).max() <= mu * (1 + 1e-8) + 1e-13
    assert default_mu(40, 10_000) == pytest.approx(0.1 * math.sqrt(math.log(40) / 10_000))


def test_debias_low_dim_matches_plug_in(rng):
    """With M = Sigma_hat^-1 the one-step estimate is the plug-in root."""
    X = rng.standard_normal((20_000, 3))
    y = X @ [1.0, 0.0, -0.5] + rng.standard_normal(20_000)
    ds = quantize_dataset(X, y, Ranges.from_bounds(2.5, 4.0), seed=2)
    m = estimate_moments(ds)
    las = fit_lasso(m, LassoConfig(lam=0.05))
    res = debias(m, las.beta, ds, np.linalg.inv(m.sigma_hat))
    np.testing.assert_allclose(res.beta_db, np.linalg.solve(m.sigma_hat, m.sigma_xy_hat), atol=1e-10)
    assert np.all(res.std_errors > 0)
    np.testing.assert_allclose(res.ci.mean(axis=1), res.beta_db)
