"""Least squares from quantized moments, sandwich standard errors and OLS."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.special import ndtri

from bitreg.moments import MomentEstimates, estimate_moments
from bitreg.quantize import QuantizedDataset

PD_TOLERANCE = 1e-8


class NotPositiveDefinite(ArithmeticError):
    """The estimated second-moment matrix is not positive definite.

    Usually means ``n`` is too small relative to ``d``; more data helps.
    """

    def __init__(self, min_eig):
        super().__init__(f"estimated covariance not positive definite (min eigenvalue {min_eig:.3g})")
        self.min_eig = float(min_eig)


def normal_quantile(p):
    return float(ndtri(p))


def normal_ci(estimate, se, level):
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    z = normal_quantile(0.5 + level / 2)
    estimate, se = np.asarray(estimate), np.asarray(se)
    return np.column_stack([estimate - z * se, estimate + z * se])


@dataclass
class FitResult:
    beta_hat: np.ndarray
    cov_hat: np.ndarray
    std_errors: np.ndarray
    ci: np.ndarray        # (d, 2)
    level: float
    n: int
    min_eig_sigma_hat: float

    @property
    def d(self):
        return self.beta_hat.shape[0]

    def to_dict(self):
        return {
            "beta": self.beta_hat.tolist(),
            "se": self.std_errors.tolist(),
            "ci": self.ci.tolist(),
            "level": self.level,
            "n": self.n,
            "d": self.d,
            "minEig": self.min_eig_sigma_hat,
        }


def _factor(sigma_hat, pd_tol):
    min_eig = float(np.linalg.eigvalsh(sigma_hat)[0])
    if not min_eig > pd_tol:
        raise NotPositiveDefinite(min_eig)
    return linalg.cho_factor(sigma_hat, lower=True), min_eig


def solve_moments(moments: MomentEstimates, pd_tol: float = PD_TOLERANCE):
    """Root of sigma_hat @ beta = sigma_xy_hat; returns ``(beta, min_eig)``."""
    factor, min_eig = _factor(moments.sigma_hat, pd_tol)
    beta = linalg.cho_solve(factor, moments.sigma_xy_hat)
    # one step of iterative refinement
    beta -= linalg.cho_solve(factor, moments.sigma_hat @ beta - moments.sigma_xy_hat)
    return beta, min_eig


def estimating_residuals(ds: QuantizedDataset, beta) -> np.ndarray:
    """Per-sample terms X~ Y~ - (X~ X~^T + Delta) beta, shape (n, d)."""
    beta = np.asarray(beta, dtype=float)
    if not np.all(np.isfinite(beta)):
        raise ValueError("beta must be finite")
    xt = ds.x_tilde()
    yt = ds.y_tilde()
    delta = ds.xsq_tilde() - ds.R ** 2
    return xt * (yt - xt @ beta)[:, None] - delta * beta


def residual_covariance(ds: QuantizedDataset, beta) -> np.ndarray:
    """Covariance of the estimating-equation terms, centered at their mean."""
    r = estimating_residuals(ds, beta)
    r = r - r.mean(axis=0)
    v = r.T @ r / ds.n
    return 0.5 * (v + v.T)


def sandwich_from(sigma_hat, vhat, n, pd_tol=PD_TOLERANCE):
    factor, _ = _factor(sigma_hat, pd_tol)
    a = linalg.cho_solve(factor, vhat)
    cov = linalg.cho_solve(factor, a.T) / n
    return 0.5 * (cov + cov.T)


def sandwich_covariance(ds: QuantizedDataset, beta_hat, moments: MomentEstimates | None = None,
                        pd_tol: float = PD_TOLERANCE) -> np.ndarray:
    """Estimated covariance of ``beta_hat``: Sigma^-1 V Sigma^-1 / n."""
    if moments is None:
        moments = estimate_moments(ds)
    return sandwich_from(moments.sigma_hat, residual_covariance(ds, beta_hat), ds.n, pd_tol)


def fit_quantized(ds: QuantizedDataset, level: float = 0.95, pd_tol: float = PD_TOLERANCE) -> FitResult:
    moments = estimate_moments(ds)
    beta, min_eig = solve_moments(moments, pd_tol)
    cov = sandwich_covariance(ds, beta, moments, pd_tol)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return FitResult(beta, cov, se, normal_ci(beta, se, level), level, ds.n, min_eig)


# ---------------------------------------------------------------------------
# full-precision reference

@dataclass
class OlsResult:
    beta_hat: np.ndarray
    cov_hat: np.ndarray
    sigma2_hat: float
    rss: float
    n: int


def fit_ols(X, y) -> OlsResult:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.ndim == 1:
        X = X[:, None]
    n, d = X.shape
    if y.shape[0] != n:
        raise ValueError(f"dimension mismatch: X {X.shape}, y {y.shape}")
    if n < d or np.linalg.matrix_rank(X) < d:
        raise np.linalg.LinAlgError("singular design")
    q, r = np.linalg.qr(X)
    beta = linalg.solve_triangular(r, q.T @ y)
    resid = y - X @ beta
    rss = float(resid @ resid)
    sigma2 = rss / (n - d) if n > d else float("nan")
    rinv = linalg.solve_triangular(r, np.eye(d))
    cov = sigma2 * (rinv @ rinv.T)
    return OlsResult(beta, cov, sigma2, rss, n)


def relative_efficiency(quantized_mse: float, ols_mse: float) -> float:
    if not ols_mse > 0:
        raise ValueError("OLS MSE must be positive")
    return quantized_mse / ols_mse
