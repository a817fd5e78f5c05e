"""One-bit dithered scalar quantization and quantizer range policies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Union

import numpy as np

from bitreg import _rng


class OutOfRangeError(ValueError):
    """Input outside the quantizer range while clamping is disabled."""


@dataclass(frozen=True)
class QuantizerRange:
    lower: float
    upper: float

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError("range endpoints must be finite")
        if not self.lower < self.upper:
            raise ValueError(f"need lower < upper, got [{self.lower}, {self.upper}]")

    @classmethod
    def symmetric(cls, r):
        return cls(-float(r), float(r))

    @property
    def width(self):
        return self.upper - self.lower

    def upper_probability(self, z):
        """Probability that ``z`` is mapped to ``upper``."""
        return (np.asarray(z, dtype=float) - self.lower) / self.width

    def decode(self, bits):
        return np.where(np.asarray(bits, dtype=bool), self.upper, self.lower)


class Ranges(NamedTuple):
    x: QuantizerRange
    xsq: QuantizerRange
    y: QuantizerRange

    @classmethod
    def from_bounds(cls, R, L):
        return cls(QuantizerRange.symmetric(R), QuantizerRange(0.0, float(R) ** 2),
                   QuantizerRange.symmetric(L))

    @property
    def R(self):
        return self.x.upper

    @property
    def L(self):
        return self.y.upper


# ---------------------------------------------------------------------------
# range policies

@dataclass(frozen=True)
class Fixed:
    R: float
    L: float


@dataclass(frozen=True)
class EmpiricalFixed:
    """Fixed ranges ``R`` and ``L = scale * sqrt(sigma^2 + |beta|^2)``."""

    sigma: float
    signal_norm: float
    R: float = 2.5
    scale: float = 2.5

    @property
    def L(self):
        return self.scale * math.hypot(self.sigma, self.signal_norm)


@dataclass(frozen=True)
class SubGaussianLogN:
    """Ranges growing like sqrt(log n) for sub-Gaussian predictors and noise.

    ``sigma`` is carried for bookkeeping; the response range depends on the
    noise only through ``cKeps``.
    """

    q: float = 3.0
    cK: float = 1.0
    cKbar: float = 1.0
    cKeps: float = 1.0
    sigma: float = 1.0
    signal_norm: float = 1.0

    def __post_init__(self):
        if self.q < 0 or self.sigma < 0 or self.signal_norm < 0:
            raise ValueError("q, sigma and signal_norm must be non-negative")
        if min(self.cK, self.cKbar, self.cKeps) <= 0:
            raise ValueError("sub-Gaussian constants must be positive")

    def R_n(self, n, d):
        return math.sqrt(2.0 * self.cK * (self.q + 1) * math.log(n * d))

    def L_n(self, n):
        a = math.sqrt(2.0 * (self.q + 1) * self.cKbar) * self.signal_norm
        b = math.sqrt(2.0 * (self.q + 1) * self.cKeps)
        return (a + b) * math.sqrt(math.log(n))


RangePolicy = Union[Fixed, EmpiricalFixed, SubGaussianLogN]


def resolve_ranges(policy: RangePolicy, n: int, d: int) -> Ranges:
    """Quantizer ranges for X, X^2 and Y under ``policy``."""
    if n < 2 or d < 1:
        raise ValueError(f"need n >= 2 and d >= 1, got n={n}, d={d}")
    if isinstance(policy, (Fixed, EmpiricalFixed)):
        return Ranges.from_bounds(policy.R, policy.L)
    if isinstance(policy, SubGaussianLogN):
        if policy.q > 0 and not n > 8.0 ** (1.0 / policy.q):
            raise ValueError(f"n={n} too small: need n > 8^(1/q) = {8.0 ** (1.0 / policy.q):.3g}")
        return Ranges.from_bounds(policy.R_n(n, d), policy.L_n(n))
    raise TypeError(f"unknown range policy {policy!r}")


# ---------------------------------------------------------------------------
# quantizer

def _prepare(z, rng_range, clamp):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("quantizer input must be finite")
    outside = (z < rng_range.lower) | (z > rng_range.upper)
    n_out = int(np.count_nonzero(outside))
    if n_out:
        if not clamp:
            raise OutOfRangeError(
                f"{n_out} value(s) outside [{rng_range.lower}, {rng_range.upper}]")
        z = np.clip(z, rng_range.lower, rng_range.upper)
    return z, n_out


def quantize_bits(z, rng_range: QuantizerRange, uniforms, clamp=True):
    """Bits (1 = upper endpoint) for ``z`` given matching U[0,1) draws.

    Returns ``(bits, n_clamped)``.
    """
    z, n_out = _prepare(z, rng_range, clamp)
    bits = np.asarray(uniforms) < rng_range.upper_probability(z)
    return bits.astype(np.uint8), n_out


def quantize_scalar(z: float, rng_range: QuantizerRange, rng: np.random.Generator,
                    clamp: bool = True) -> float:
    """Map ``z`` to ``upper`` w.p. (z - lower)/(upper - lower), else ``lower``."""
    bit, _ = quantize_bits(z, rng_range, rng.random(), clamp=clamp)
    return float(rng_range.decode(bit))


@dataclass(frozen=True)
class QuantizedSample:
    x_bits: np.ndarray
    xsq_bits: np.ndarray
    y_bit: int

    @property
    def n_bits(self):
        return 2 * len(self.x_bits) + 1


def quantize_triplet(x, y: float, ranges: Ranges, rng: np.random.Generator,
                     clamp: bool = True) -> QuantizedSample:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise ValueError("x must be a vector")
    if np.ndim(y) != 0:
        raise ValueError("y must be a scalar")
    d = x.shape[0]
    u = rng.random(2 * d + 1)
    xb, _ = quantize_bits(x, ranges.x, u[:d], clamp)
    # the square of the raw input is quantized, clamped into [0, R^2]
    sq = np.minimum(x * x, ranges.xsq.upper) if clamp else x * x
    sb, _ = quantize_bits(sq, ranges.xsq, u[d:2 * d], clamp)
    yb, _ = quantize_bits(y, ranges.y, u[2 * d], clamp)
    return QuantizedSample(xb, sb, int(yb))


@dataclass
class QuantizedDataset:
    """Bit triplets for ``n`` samples plus the ranges that decode them."""

    x_bits: np.ndarray      # (n, d) uint8
    xsq_bits: np.ndarray    # (n, d) uint8
    y_bits: np.ndarray      # (n,) uint8
    R: float
    L: float
    seed: int = 0
    clamp_events: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.x_bits = np.ascontiguousarray(self.x_bits, dtype=np.uint8)
        self.xsq_bits = np.ascontiguousarray(self.xsq_bits, dtype=np.uint8)
        self.y_bits = np.ascontiguousarray(self.y_bits, dtype=np.uint8).reshape(-1)
        if self.x_bits.ndim != 2 or self.x_bits.shape != self.xsq_bits.shape:
            raise ValueError("x_bits and xsq_bits must be (n, d) arrays of equal shape")
        if self.y_bits.shape[0] != self.x_bits.shape[0]:
            raise ValueError("y_bits must have one bit per sample")

    @property
    def n(self):
        return self.x_bits.shape[0]

    @property
    def d(self):
        return self.x_bits.shape[1]

    @property
    def ranges(self):
        return Ranges.from_bounds(self.R, self.L)

    def x_tilde(self):
        return self.ranges.x.decode(self.x_bits)

    def xsq_tilde(self):
        return self.ranges.xsq.decode(self.xsq_bits)

    def y_tilde(self):
        return self.ranges.y.decode(self.y_bits)

    def __len__(self):
        return self.n

    def __getitem__(self, i) -> QuantizedSample:
        return QuantizedSample(self.x_bits[i], self.xsq_bits[i], int(self.y_bits[i]))

    def __iter__(self) -> Iterator[QuantizedSample]:
        return (self[i] for i in range(self.n))

    def __eq__(self, other):
        if not isinstance(other, QuantizedDataset):
            return NotImplemented
        return (self.R == other.R and self.L == other.L and self.seed == other.seed
                and np.array_equal(self.x_bits, other.x_bits)
                and np.array_equal(self.xsq_bits, other.xsq_bits)
                and np.array_equal(self.y_bits, other.y_bits))

    @classmethod
    def from_samples(cls, samples, R, L, seed=0):
        samples = list(samples)
        if not samples:
            raise ValueError("no samples")
        return cls(np.array([s.x_bits for s in samples]), np.array([s.xsq_bits for s in samples]),
                   np.array([s.y_bit for s in samples]), R, L, seed)


def _check_data(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"dimension mismatch: X {X.shape}, y {y.shape}")
    return X, y


def quantize_dataset(X, y, ranges: Ranges, seed: int, clamp: bool = True,
                     start: int = 0, block_size: int = 1 << 16) -> QuantizedDataset:
    """Quantize rows of ``(X, y)`` with counter-based dither streams.

    Sample ``start + i`` always uses the same random draws, so quantizing a
    dataset in pieces reproduces quantizing it whole.
    """
    X, y = _check_data(X, y)
    n, d = X.shape
    xb = np.empty((n, d), np.uint8)
    sb = np.empty((n, d), np.uint8)
    yb = np.empty(n, np.uint8)
    events = {"x": 0, "xsq": 0, "y": 0}
    for a in range(0, n, block_size):
        b = min(n, a + block_size)
        i0, cnt = start + a, b - a
        xs = X[a:b]
        xb[a:b], c = quantize_bits(xs, ranges.x, _rng.uniform_block(seed, _rng.X_BITS, i0, cnt, d), clamp)
        events["x"] += c
        sq = xs * xs
        if clamp:
            events["xsq"] += int(np.count_nonzero(sq > ranges.xsq.upper))
            sq = np.minimum(sq, ranges.xsq.upper)
        sb[a:b], _ = quantize_bits(sq, ranges.xsq, _rng.uniform_block(seed, _rng.XSQ_BITS, i0, cnt, d), clamp)
        u = _rng.uniform_block(seed, _rng.Y_BITS, i0, cnt, 1)[:, 0]
        yb[a:b], c = quantize_bits(y[a:b], ranges.y, u, clamp)
        events["y"] += c
    return QuantizedDataset(xb, sb, yb, ranges.R, ranges.L, seed, events)


def quantize_second_copy(X, ranges: Ranges, seed: int, clamp: bool = True, start: int = 0):
    """Independent re-quantization of ``X`` on its own dither stream."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, d = X.shape
    u = _rng.uniform_block(seed, _rng.X_BITS_SECOND, start, n, d)
    bits, _ = quantize_bits(X, ranges.x, u, clamp)
    return bits
