"""L1-penalized regression from quantized moments, with debiased inference."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from bitreg.moments import MomentEstimates
from bitreg.quantize import QuantizedDataset
from bitreg.regress import normal_ci, residual_covariance


def soft_threshold(z, t):
    z = np.asarray(z, dtype=float)
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def project_l1_ball(v, radius):
    """Euclidean projection of ``v`` onto {b : |b|_1 <= radius}."""
    v = np.asarray(v, dtype=float)
    if not radius > 0:
        raise ValueError("radius must be positive")
    a = np.abs(v)
    if math.isinf(radius) or a.sum() <= radius:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, u.size + 1)
    rho = np.nonzero(u * k > css - radius)[0][-1]
    theta = (css[rho] - radius) / (rho + 1.0)
    return np.sign(v) * np.maximum(a - theta, 0.0)


@dataclass(frozen=True)
class LassoConfig:
    """``step=None`` selects backtracking from 1/|Sigma_hat|_op; a number fixes the step."""

    lam: float
    radius: float = math.inf
    max_iter: int = 20000
    tol: float = 1e-9
    step: float | None = None

    def __post_init__(self):
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ValueError("lambda must be finite and >= 0")
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.step is not None and not self.step > 0:
            raise ValueError("step size must be positive")


@dataclass
class LassoResult:
    beta: np.ndarray
    converged: bool
    n_iter: int
    residual: float   # fixed-point residual of the prox-gradient map
    objective: float

    @property
    def support(self):
        return np.flatnonzero(self.beta)


def lasso_objective(beta, moments: MomentEstimates, lam):
    return 0.5 * beta @ moments.sigma_hat @ beta - beta @ moments.sigma_xy_hat + lam * np.abs(beta).sum()


def fit_lasso(moments: MomentEstimates, cfg: LassoConfig, beta0=None) -> LassoResult:
    """Stationary point of 1/2 b'Sb - b's + lam |b|_1 over the l1 ball.

    Prox-gradient steps (soft-threshold, then project onto the ball) with a
    sufficient-decrease test, so the objective never increases even when
    Sigma_hat is indefinite.
    """
    S, s = moments.sigma_hat, moments.sigma_xy_hat
    lam, r = cfg.lam, cfg.radius
    beta = np.zeros(moments.d) if beta0 is None else project_l1_ball(np.asarray(beta0, float), r)

    def smooth(b):
        return 0.5 * b @ S @ b - b @ s

    if cfg.step is not None:
        eta = cfg.step
    else:
        opnorm = float(np.max(np.abs(np.linalg.eigvalsh(S))))
        eta = 1.0 / opnorm if opnorm > 0 else 1.0

    f = smooth(beta)
    res = math.inf
    for it in range(1, cfg.max_iter + 1):
        g = S @ beta - s
        while True:
            nxt = project_l1_ball(soft_threshold(beta - eta * g, eta * lam), r)
            step = nxt - beta
            f_nxt = smooth(nxt)
            if f_nxt <= f + g @ step + (step @ step) / (2 * eta) + 1e-15 * abs(f):
                break
            eta *= 0.5
            if eta < 1e-20:
                raise ArithmeticError("step size underflow in lasso line search")
        res = float(np.max(np.abs(step))) if step.size else 0.0
        if res <= cfg.tol:
            return LassoResult(beta, True, it, res, f + lam * np.abs(beta).sum())
        if not np.all(np.isfinite(nxt)):
            break
        beta, f = nxt, f_nxt
    return LassoResult(beta, False, cfg.max_iter, res, f + lam * np.abs(beta).sum())


# ---------------------------------------------------------------------------
# debiasing

class Infeasible(ArithmeticError):
    def __init__(self, row, best_residual, mu):
        super().__init__(f"row {row}: no M with |M Sigma_hat - I|_inf <= {mu:.3g} "
                         f"(best {best_residual:.3g}); increase mu")
        self.row, self.best_residual, self.mu = row, best_residual, mu


def default_mu(d, n):
    return 0.1 * math.sqrt(math.log(max(d, 2)) / n)


def compute_debias_matrix(moments: MomentEstimates, mu: float, max_iter: int = 100_000,
                          tol: float = 1e-13) -> np.ndarray:
    """Approximate inverse M with |M Sigma_hat - I|_inf <= mu.

    Row j minimizes 1/2 m'Sm - m_j + mu |m|_1, whose optimality conditions
    are exactly the constraint. All rows share S, so they are solved together
    by accelerated proximal gradient on the matrix M with adaptive restart.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    S = moments.sigma_hat
    d = S.shape[0]
    diag = np.diag(S)
    bad = np.flatnonzero(diag <= 0)
    if bad.size:
        raise Infeasible(int(bad[0]), 1.0, mu)
    eye = np.eye(d)
    eta = 1.0 / float(np.max(np.abs(np.linalg.eigvalsh(S))))
    M = np.diag(1.0 / diag)
    Z, t = M.copy(), 1.0
    for _ in range(max_iter):
        nxt = soft_threshold(Z - eta * (Z @ S - eye), eta * mu)
        step = nxt - M
        # restart momentum when it points uphill
        if np.sum((Z - nxt) * step) > 0:
            Z, t = M.copy(), 1.0
            continue
        t_nxt = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        Z = nxt + ((t - 1.0) / t_nxt) * step
        M, t = nxt, t_nxt
        scale = float(np.max(np.abs(M)))
        if not math.isfinite(scale) or scale > 1e12:
            break
        if float(np.max(np.abs(step))) <= tol * max(1.0, scale):
            break
    resid = np.abs(M @ S - eye).max(axis=1)
    worst = int(np.argmax(resid))
    if not np.all(np.isfinite(resid)) or resid[worst] > mu * (1 + 1e-8) + 1e-12:
        raise Infeasible(worst, float(resid[worst]), mu)
    return M


def debias_matrix_auto(moments: MomentEstimates, mu: float | None = None, retries: int = 4):
    """Debias matrix at ``mu`` (default 0.1 sqrt(log d / n)), doubling mu on failure."""
    mu = default_mu(moments.d, moments.n) if mu is None else mu
    for attempt in range(retries + 1):
        try:
            return compute_debias_matrix(moments, mu), mu
        except Infeasible:
            if attempt == retries:
                raise
            mu *= 2.0


@dataclass
class DebiasResult:
    beta_db: np.ndarray
    M: np.ndarray
    per_coord_var: np.ndarray
    ci: np.ndarray
    level: float
    inf_norm_residual: float

    @property
    def std_errors(self):
        return np.sqrt(self.per_coord_var)


def debias(moments: MomentEstimates, beta_lasso, ds: QuantizedDataset, M, level: float = 0.95) -> DebiasResult:
    """One-step correction beta + M (s_xy - S beta) with per-coordinate intervals."""
    beta_lasso = np.asarray(beta_lasso, dtype=float)
    M = np.asarray(M, dtype=float)
    d = moments.d
    if beta_lasso.shape != (d,) or M.shape != (d, d) or ds.d != d:
        raise ValueError("dimension mismatch between moments, beta, dataset and M")
    beta_db = beta_lasso + M @ (moments.sigma_xy_hat - moments.sigma_hat @ beta_lasso)
    V = residual_covariance(ds, beta_lasso)
    var = np.einsum("ij,jk,ik->i", M, V, M) / ds.n
    var = np.clip(var, 0.0, None)
    resid = float(np.max(np.abs(M @ moments.sigma_hat - np.eye(d))))
    return DebiasResult(beta_db, M, var, normal_ci(beta_db, np.sqrt(var), level), level, resid)
