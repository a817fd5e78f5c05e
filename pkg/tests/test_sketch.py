import math

import numpy as np
import pytest

from bitreg.quantize import Fixed, quantize_dataset, resolve_ranges
from bitreg.sketch import SketchConfig, sketch_block, sketch_data, sketch_then_quantize
from conftest import linear_data


@pytest.mark.parametrize("kind", ["gaussian", "ternary"])
def test_sketch_entries_are_isotropic(kind):
    cfg = SketchConfig(200, kind=kind, seed=1, block_rows=64)
    S = np.vstack([sketch_block(cfg, 2000, b) for b in range(4)])
    assert S.shape == (200, 2000)
    assert abs(S.mean()) < 5 * math.sqrt(1 / 200) / math.sqrt(S.size)
    # E[S^T S] = I: mean squared entry is 1/m
    assert np.mean(S * S) * 200 == pytest.approx(1.0, rel=0.01)
    if kind == "ternary":
        assert set(np.unique(np.round(S * math.sqrt(200 / 3)))) == {-1.0, 0.0, 1.0}
        assert np.mean(S == 0) == pytest.approx(2 / 3, abs=0.01)


def test_block_size_does_not_change_gram_method_and_blocks_are_deterministic(rng):
    X, y = linear_data(rng, 400, [1.0, 2.0])
    a = sketch_data(X, y, SketchConfig(50, seed=3, block_rows=7))
    b = sketch_data(X, y, SketchConfig(50, seed=3, block_rows=7))
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    c = sketch_data(X, y, SketchConfig(50, seed=4, block_rows=7))
    assert not np.array_equal(a[0], c[0])


@pytest.mark.parametrize("method", ["materialize", "gram"])
def test_sketched_second_moments_are_preserved(rng, method):
    X, y = linear_data(rng, 3000, [1.0, -1.0, 0.5])
    Z = np.column_stack([X, y])
    target = Z.T @ Z / Z.shape[0]
    acc = np.zeros_like(target)
    reps = 40
    for s in range(reps):
        Xh, yh = sketch_data(X, y, SketchConfig(500, seed=s, method=method))
        Zh = np.column_stack([Xh, yh])
        acc += Zh.T @ Zh / 500
    np.testing.assert_allclose(acc / reps, target, atol=0.05 * np.abs(target).max())


def test_identity_sketch_reduces_to_plain_quantization(rng):
    X, y = linear_data(rng, 300, [0.5, 0.5])
    pol = Fixed(2.5, 3.0)
    a = sketch_then_quantize(X, y, SketchConfig(300, kind="identity", seed=6), pol)
    b = quantize_dataset(X, y, resolve_ranges(pol, 300, 2), seed=6)
    assert a == b


def test_config_validation(rng):
    X, y = linear_data(rng, 100, [1.0])
    with pytest.raises(ValueError):
        sketch_data(X, y, SketchConfig(101))
    with pytest.raises(ValueError):
        sketch_data(X, y, SketchConfig(50, kind="identity"))
    with pytest.raises(ValueError):
        SketchConfig(10, kind="ternary", method="gram")
    with pytest.raises(ValueError):
        SketchConfig(0)
    with pytest.raises(ValueError):
        SketchConfig(10, kind="hadamard")
