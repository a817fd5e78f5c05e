"""Sketch-then-quantize: compress n rows to m random combinations, then quantize."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from bitreg import _rng
from bitreg.quantize import QuantizedDataset, RangePolicy, _check_data, quantize_dataset, resolve_ranges

KINDS = ("gaussian", "ternary", "identity")


@dataclass(frozen=True)
class SketchConfig:
    """Sketch of size ``m``.

    ``gaussian`` entries are N(0, 1/m); ``ternary`` entries take -1, 0, 1 with
    probabilities 1/6, 2/3, 1/6 scaled by sqrt(3/m). ``identity`` (m = n only)
    passes data through and exists for pipeline tests.

    ``method="gram"`` draws Gaussian sketch rows directly from their exact
    conditional law N(0, [X y]^T [X y] / n), at O(m d^2) instead of O(m n d).
    """

    m: int
    kind: str = "gaussian"
    seed: int = 0
    block_rows: int = 256
    method: str = "materialize"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("sketch size m must be >= 1")
        if self.kind not in KINDS:
            raise ValueError(f"unknown sketch kind {self.kind!r}")
        if self.method not in ("materialize", "gram"):
            raise ValueError(f"unknown sketch method {self.method!r}")
        if self.method == "gram" and self.kind != "gaussian":
            raise ValueError("method='gram' is only exact for gaussian sketches")


def sketch_block(cfg: SketchConfig, n: int, block: int) -> np.ndarray:
    """Rows ``block*block_rows ...`` of the m-by-n sketching matrix."""
    r0 = block * cfg.block_rows
    rows = min(cfg.block_rows, cfg.m - r0)
    g = _rng.generator(cfg.seed, _rng.SKETCH, KINDS.index(cfg.kind), cfg.m, n, block)
    if cfg.kind == "gaussian":
        return g.standard_normal((rows, n)) / math.sqrt(cfg.m)
    u = g.random((rows, n))
    s = np.zeros((rows, n))
    s[u < 1.0 / 6.0] = -1.0
    s[u >= 5.0 / 6.0] = 1.0
    return s * math.sqrt(3.0 / cfg.m)


def _gram_rows(Z, cfg: SketchConfig):
    n = Z.shape[0]
    w, v = np.linalg.eigh(Z.T @ Z / n)
    root = v * np.sqrt(np.clip(w, 0.0, None))
    g = _rng.generator(cfg.seed, _rng.SKETCH, 99, cfg.m, n)
    return g.standard_normal((cfg.m, Z.shape[1])) @ root.T


def sketch_data(X, y, cfg: SketchConfig):
    """Return ``(Xhat, yhat)`` = (n/m)^(-1/2) S [X, y] for an m-by-n sketch S."""
    X, y = _check_data(X, y)
    n, d = X.shape
    if cfg.m > n:
        raise ValueError(f"sketch size m={cfg.m} exceeds n={n}")
    if cfg.kind == "identity":
        if cfg.m != n:
            raise ValueError("identity sketch requires m == n")
        return X.copy(), y.copy()
    Z = np.column_stack([X, y])
    if cfg.method == "gram":
        out = _gram_rows(Z, cfg)
    else:
        scale = math.sqrt(cfg.m / n)
        nblocks = -(-cfg.m // cfg.block_rows)
        out = np.vstack([scale * (sketch_block(cfg, n, b) @ Z) for b in range(nblocks)])
    return out[:, :d], out[:, d]


def sketch_then_quantize(X, y, cfg: SketchConfig, policy: RangePolicy, seed: int | None = None,
                         clamp: bool = True) -> QuantizedDataset:
    """Sketch ``(X, y)`` down to ``cfg.m`` rows and quantize them.

    ``seed`` drives the dither streams and defaults to ``cfg.seed``.
    """
    Xh, yh = sketch_data(X, y, cfg)
    ranges = resolve_ranges(policy, max(cfg.m, 2), Xh.shape[1])
    return quantize_dataset(Xh, yh, ranges, cfg.seed if seed is None else seed, clamp=clamp)
