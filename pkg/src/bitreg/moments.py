"""Unbiased second-moment estimates from quantized triplets.

All quantized products take two values (``±R^2``, ``±RL``, ``{0, R^2}``), so
sums are carried as exact integer counts and scaled once at the end. This
makes streaming, batched and merged accumulation agree bit for bit in any
sample order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from bitreg.quantize import QuantizedDataset, QuantizedSample, Ranges, quantize_dataset, quantize_second_copy


@dataclass
class MomentEstimates:
    sigma_hat: np.ndarray     # (d, d)
    sigma_xy_hat: np.ndarray  # (d,)
    n: int
    R: float
    L: float

    @property
    def d(self):
        return self.sigma_xy_hat.shape[0]

    @property
    def ranges(self):
        return Ranges.from_bounds(self.R, self.L)

    def to_dict(self):
        return {
            "n": self.n, "d": self.d, "R": self.R, "L": self.L,
            "sigma_hat": self.sigma_hat.tolist(),
            "sigma_xy_hat": self.sigma_xy_hat.tolist(),
        }

    @classmethod
    def from_dict(cls, obj):
        return cls(np.array(obj["sigma_hat"], dtype=float), np.array(obj["sigma_xy_hat"], dtype=float),
                   int(obj["n"]), float(obj["R"]), float(obj["L"]))


def _signs(bits):
    return 2.0 * np.asarray(bits, dtype=float) - 1.0


def _finalize(cross, sq, xy, n, R, L):
    if n < 1:
        raise ValueError("cannot estimate moments from an empty dataset")
    sigma = (R * R) * np.asarray(cross, dtype=float) / n
    np.fill_diagonal(sigma, (R * R) * np.asarray(sq, dtype=float) / n)
    sigma_xy = (R * L) * np.asarray(xy, dtype=float) / n
    return MomentEstimates(sigma, sigma_xy, n, R, L)


def estimate_moments(ds: QuantizedDataset) -> MomentEstimates:
    """Plug-in estimates of E[XX^T] and E[XY] with the diagonal correction.

    The diagonal is the mean of the quantized squares; off-diagonals and the
    cross moment come from products of the one-bit values.
    """
    if ds.n < 1:
        raise ValueError("cannot estimate moments from an empty dataset")
    s = _signs(ds.x_bits)
    # float64 products of +-1 are exact integers far below 2**53
    cross = s.T @ s
    cross = np.triu(cross) + np.triu(cross, 1).T
    sq = ds.xsq_bits.sum(axis=0, dtype=np.int64)
    xy = s.T @ _signs(ds.y_bits)
    return _finalize(cross, sq, xy, ds.n, ds.R, ds.L)


class MomentAccumulator:
    """Streaming form of :func:`estimate_moments`; merge is exact."""

    def __init__(self, d: int, R: float, L: float):
        self.d, self.R, self.L = d, float(R), float(L)
        self.n = 0
        self.cross = np.zeros((d, d), np.int64)
        self.sq = np.zeros(d, np.int64)
        self.xy = np.zeros(d, np.int64)

    def add(self, sample: QuantizedSample) -> "MomentAccumulator":
        xb = np.asarray(sample.x_bits, dtype=np.int64)
        if xb.shape != (self.d,) or np.shape(sample.xsq_bits) != (self.d,):
            raise ValueError(f"sample dimension {xb.shape} does not match d={self.d}")
        s = 2 * xb - 1
        self.cross += np.outer(s, s)
        self.sq += np.asarray(sample.xsq_bits, dtype=np.int64)
        self.xy += s * (2 * int(sample.y_bit) - 1)
        self.n += 1
        return self

    def add_dataset(self, ds: QuantizedDataset) -> "MomentAccumulator":
        if ds.d != self.d or (ds.R, ds.L) != (self.R, self.L):
            raise ValueError("dataset dimension or ranges do not match the accumulator")
        s = 2 * ds.x_bits.astype(np.int64) - 1
        self.cross += s.T @ s
        self.sq += ds.xsq_bits.sum(axis=0, dtype=np.int64)
        self.xy += s.T @ (2 * ds.y_bits.astype(np.int64) - 1)
        self.n += ds.n
        return self

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if (other.d, other.R, other.L) != (self.d, self.R, self.L):
            raise ValueError("cannot merge accumulators with different d or ranges")
        out = MomentAccumulator(self.d, self.R, self.L)
        out.n = self.n + other.n
        out.cross = self.cross + other.cross
        out.sq = self.sq + other.sq
        out.xy = self.xy + other.xy
        return out

    def finalize(self) -> MomentEstimates:
        return _finalize(self.cross, self.sq, self.xy, self.n, self.R, self.L)


# ---------------------------------------------------------------------------
# paired scheme: two independent quantizations of X instead of quantized squares

@dataclass
class PairedQuantizedDataset:
    first_bits: np.ndarray   # (n, d)
    second_bits: np.ndarray  # (n, d), independent dither stream
    y_bits: np.ndarray       # (n,)
    R: float
    L: float

    @property
    def n(self):
        return self.first_bits.shape[0]

    @property
    def d(self):
        return self.first_bits.shape[1]


def quantize_paired(X, y, ranges: Ranges, seed: int, clamp: bool = True) -> PairedQuantizedDataset:
    """Paired quantization sharing the X and Y dither streams of ``quantize_dataset``."""
    ds = quantize_dataset(X, y, ranges, seed, clamp=clamp)
    second = quantize_second_copy(X, ranges, seed, clamp=clamp)
    return PairedQuantizedDataset(ds.x_bits, second, ds.y_bits, ranges.R, ranges.L)


def estimate_moments_paired(ds: PairedQuantizedDataset, cross: str = "average") -> MomentEstimates:
    """Moment estimates whose diagonal is the mean of X~ * X~~.

    ``cross="average"`` estimates E[XY] from both quantized copies,
    ``(X~ + X~~) Y~ / 2``; ``cross="first"`` uses the first copy only.
    Off-diagonal entries always use the first copy.
    """
    if ds.n < 1:
        raise ValueError("cannot estimate moments from an empty dataset")
    s1, s2, sy = _signs(ds.first_bits), _signs(ds.second_bits), _signs(ds.y_bits)
    c = s1.T @ s1
    c = np.triu(c) + np.triu(c, 1).T
    diag = (s1 * s2).sum(axis=0)
    if cross == "average":
        xy = 0.5 * ((s1 + s2).T @ sy)
    elif cross == "first":
        xy = s1.T @ sy
    else:
        raise ValueError(f"cross must be 'average' or 'first', got {cross!r}")
    return _finalize(c, diag, xy, ds.n, ds.R, ds.L)
