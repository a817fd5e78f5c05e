"""Single-predictor Gaussian model: collision probability, 1-bit MLE, Fisher information.

With X ~ N(0, 1), Y = beta X + sigma eps and dithers uniform on [-R, R] and
[-L, L], the signs of the quantized pair agree with probability

    pi(beta) = 2 P(X + z1 > 0, Y + z2 > 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate, optimize
from scipy.special import ndtr, owens_t

from bitreg import _rng
from bitreg.quantize import Ranges, quantize_bits

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class QuadratureError(ArithmeticError):
    pass


class DegenerateProbability(ValueError):
    """Collision probability numerically 0 or 1; the ranges are too extreme."""


@dataclass(frozen=True)
class ScalarModel:
    beta_star: float
    sigma: float
    R: float
    L: float

    def __post_init__(self):
        if not self.sigma > 0 or not self.R > 0 or not self.L > 0:
            raise ValueError("sigma, R and L must be positive")

    def at(self, beta):
        return replace(self, beta_star=float(beta))

    @property
    def V(self):
        b = self.beta_star
        return np.array([[1.0, b], [b, b * b + self.sigma ** 2]])


def bvn_cdf(h, k, rho):
    """P(U <= h, W <= k) for standard normals with correlation |rho| < 1 (Owen's T)."""
    h, k = np.broadcast_arrays(np.asarray(h, float), np.asarray(k, float))
    s = math.sqrt(1.0 - rho * rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        ah = (k - rho * h) / (h * s)
        ak = (h - rho * k) / (k * s)
    # h == 0 or k == 0 sends the slope to +-inf, where T(0, +-inf) = +-1/4 is the right limit
    ah = np.where(h == 0, np.copysign(np.inf, k), ah)
    ak = np.where(k == 0, np.copysign(np.inf, h), ak)
    hk = h * k
    delta = np.where((hk < 0) | ((hk == 0) & (h + k < 0)), 0.5, 0.0)
    out = 0.5 * (ndtr(h) + ndtr(k)) - owens_t(h, ah) - owens_t(k, ak) - delta
    both = (h == 0) & (k == 0)
    out = np.where(both, 0.25 + math.asin(rho) / (2 * math.pi), out)
    return out if out.ndim else float(out)


def _psi(t):
    # antiderivative of the normal cdf
    return t * ndtr(t) + _INV_SQRT_2PI * np.exp(-0.5 * t * t)


def _pi_reduced(beta, sigma, R, L, epsabs, epsrel):
    # Averaging each sign indicator over its dither in closed form leaves a 1-D
    # integral over x: P(X~ > 0 | x) = clip((x + R) / 2R), and
    # P(Y~ > 0 | x) = mean over z of ndtr((z + beta x) / sigma).
    def y_up(x):
        return sigma / (2 * L) * (_psi((L + beta * x) / sigma) - _psi((beta * x - L) / sigma))

    def inside(x):
        return _INV_SQRT_2PI * math.exp(-0.5 * x * x) * (x + R) / (2 * R) * y_up(x)

    def outside(x):
        return _INV_SQRT_2PI * math.exp(-0.5 * x * x) * y_up(x)

    a, ea = integrate.quad(inside, -R, R, epsabs=epsabs, epsrel=epsrel, limit=200)
    b, eb = integrate.quad(outside, R, np.inf, epsabs=epsabs, epsrel=epsrel, limit=200)
    if not (ea + eb) <= max(10 * epsabs, 10 * epsrel * abs(a + b)):
        raise QuadratureError(f"quadrature error estimate {ea + eb:.3g} exceeds tolerance")
    return 2.0 * (a + b)


def _pi_dither2d(beta, sigma, R, L, epsabs):
    sy = math.hypot(beta, sigma)
    rho = beta / sy

    def orthant(z2, z1):
        # P(X > -z1, Y > -z2) by symmetry of the centered normal law
        return bvn_cdf(z1, z2 / sy, rho)

    val, err = integrate.dblquad(orthant, -R, R, -L, L, epsabs=epsabs, epsrel=0)
    if not err <= 10 * epsabs * 4 * R * L:
        raise QuadratureError(f"quadrature error estimate {err:.3g} exceeds tolerance")
    return 2.0 * val / (4.0 * R * L)


def collision_probability(model: ScalarModel, method: str = "reduced", tol: float = 1e-12) -> float:
    """pi(beta_star) to absolute accuracy ``tol``.

    ``method="dither2d"`` integrates the bivariate-normal orthant probability
    over the dither square; ``"reduced"`` integrates the dithers out in
    closed form first (smooth in beta, used for derivatives).
    """
    b, s, R, L = model.beta_star, model.sigma, model.R, model.L
    if method == "reduced":
        return _pi_reduced(b, s, R, L, epsabs=tol, epsrel=tol)
    if method == "dither2d":
        # dblquad tolerances act on the unnormalized integral
        return _pi_dither2d(b, s, R, L, epsabs=tol * 4 * R * L / 2)
    raise ValueError(f"unknown method {method!r}")


def simulate_collisions(model: ScalarModel, n: int, seed: int, chunk: int = 1 << 20) -> np.ndarray:
    """Collision indicators from ``n`` simulated, quantized (X, Y) pairs."""
    ranges = Ranges.from_bounds(model.R, model.L)
    out = np.empty(n, np.uint8)
    for i, a in enumerate(range(0, n, chunk)):
        m = min(chunk, n - a)
        g = _rng.generator(seed, _rng.SCENARIO, i)
        x = g.standard_normal(m)
        y = model.beta_star * x + model.sigma * g.standard_normal(m)
        xb, _ = quantize_bits(x, ranges.x, g.random(m))
        yb, _ = quantize_bits(y, ranges.y, g.random(m))
        out[a:a + m] = xb == yb
    return out


def _log_lik_counts(k, n, p):
    if not 0.0 < p < 1.0:
        raise DegenerateProbability(f"collision probability {p!r} at the boundary")
    return k * math.log(p) + (n - k) * math.log1p(-p)


def log_likelihood(bits, beta: float, model: ScalarModel) -> float:
    """Sum of c log pi(beta) + (1 - c) log(1 - pi(beta)) over indicators ``bits``."""
    bits = np.asarray(bits)
    n = bits.size
    if n == 0:
        return 0.0
    k = int(np.count_nonzero(bits))
    return _log_lik_counts(k, n, collision_probability(model.at(beta)))


@dataclass
class MleFit:
    beta: float
    log_likelihood: float
    at_boundary: bool


def fit_mle(bits, model: ScalarModel, interval=(-5.0, 5.0), xtol: float = 1e-7) -> MleFit:
    """Maximize the collision likelihood over ``interval`` (bounded Brent search).

    If the maximum sits on an endpoint (e.g. all indicators equal) the
    result is flagged with ``at_boundary``.
    """
    bits = np.asarray(bits)
    n, k = bits.size, int(np.count_nonzero(bits))
    if n == 0:
        raise ValueError("no observations")
    lo, hi = map(float, interval)
    if not lo < hi:
        raise ValueError("empty search interval")

    def nll(b):
        p = collision_probability(model.at(b), tol=1e-13)
        p = min(max(p, 1e-300), 1 - 1e-16)
        return -(k * math.log(p) + (n - k) * math.log1p(-p))

    res = optimize.minimize_scalar(nll, bounds=(lo, hi), method="bounded",
                                   options={"xatol": xtol, "maxiter": 500})
    beta = float(res.x)
    at_boundary = min(beta - lo, hi - beta) <= 10 * xtol or k in (0, n)
    if at_boundary:
        ends = {lo: nll(lo), hi: nll(hi), beta: float(res.fun)}
        beta = min(ends, key=ends.get)
    return MleFit(beta, -nll(beta), bool(at_boundary))


def collision_derivative(model: ScalarModel, h: float | None = None, stencil: str = "richardson") -> float:
    """d pi / d beta by finite differences of the reduced-form probability."""
    b = model.beta_star
    if h is None:
        h = 1e-4 * max(1.0, abs(b))

    def p(x):
        return collision_probability(model.at(x), tol=1e-14)

    def central(step):
        return (p(b + step) - p(b - step)) / (2 * step)

    if stencil == "richardson":
        return (4.0 * central(h / 2) - central(h)) / 3.0
    if stencil == "five-point":
        return (-p(b + 2 * h) + 8 * p(b + h) - 8 * p(b - h) + p(b - 2 * h)) / (12 * h)
    raise ValueError(f"unknown stencil {stencil!r}")


def fisher_information(model: ScalarModel) -> float:
    """Per-observation Fisher information pi'^2 (1/pi + 1/(1 - pi))."""
    p = collision_probability(model, tol=1e-14)
    if not 0.0 < p < 1.0:
        raise DegenerateProbability(f"collision probability {p!r} at the boundary")
    dp = collision_derivative(model)
    return dp * dp * (1.0 / p + 1.0 / (1.0 - p))
