"""Quality metrics: PSNR, temporal coherence, changed-pixel maps."""

from __future__ import annotations

import math

import numpy as np
import pytest

from latentcut import (
    PooledFrameEmbedder,
    changed_fraction,
    changed_pixels,
    psnr,
    temporal_score,
)
from latentcut.errors import ShapeMismatchError


def test_psnr_identical_is_inf(rng):
    v = rng.random((2, 3, 4, 4))
    assert psnr(v, v) == math.inf


def test_psnr_uniform_error_exact():
    a = np.zeros((1, 1, 10, 10))
    b = np.full_like(a, 0.01)  # mse = 1e-4 -> 40 dB
    assert psnr(a, b) == pytest.approx(40.0, abs=1e-12)


def test_psnr_matches_scalar_oracle(rng):
    a = rng.random((2, 2, 3, 3))
    b = rng.random((2, 2, 3, 3))
    se = 0.0
    for x, y in zip(a.ravel(), b.ravel()):
        se += (x - y) ** 2
    expected = -10.0 * math.log10(se / a.size)
    assert psnr(a, b) == pytest.approx(expected, rel=1e-12)


def test_psnr_region_restricts(rng):
    a = np.zeros((1, 2, 2, 2))
    b = a.copy()
    b[0, :, 0, 0] = 1.0  # damage one pixel
    region = np.zeros((1, 1, 2, 2))
    region[0, 0, 1, 1] = 1.0  # look only at an untouched pixel
    assert psnr(a, b, region=region) == math.inf
    region_hit = np.zeros((1, 1, 2, 2))
    region_hit[0, 0, 0, 0] = 1.0
    assert psnr(a, b, region=region_hit) == pytest.approx(0.0, abs=1e-12)  # mse = 1


def test_psnr_region_mean_counts_channels(rng):
    a = rng.random((1, 3, 2, 2))
    b = rng.random((1, 3, 2, 2))
    region = np.ones((1, 1, 2, 2))
    assert psnr(a, b, region=region) == pytest.approx(psnr(a, b), rel=1e-12)


def test_psnr_empty_region_raises(rng):
    v = rng.random((1, 1, 2, 2))
    with pytest.raises(ValueError):
        psnr(v, v, region=np.zeros((1, 1, 2, 2)))


def test_psnr_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        psnr(np.zeros((1, 1, 2, 2)), np.zeros((1, 1, 2, 3)))
    with pytest.raises(ShapeMismatchError):
        psnr(np.zeros((1, 1, 2, 2)), np.zeros((1, 1, 2, 2)), region=np.zeros((1, 1, 3, 3)))


# ------------------------------------------------------------------ temporal

def test_temporal_identical_frames_is_one(rng):
    frame = rng.random((3, 16, 16))
    video = np.stack([frame] * 4)
    assert temporal_score(video) == pytest.approx(1.0, abs=1e-12)


def test_temporal_negated_frames_is_minus_one(rng):
    frame = rng.standard_normal((3, 16, 16))
    video = np.stack([frame, -frame, frame])
    assert temporal_score(video) == pytest.approx(-1.0, abs=1e-12)


def test_temporal_scale_invariance(rng):
    frame = rng.random((3, 16, 16)) + 0.1
    video = np.stack([frame, 2.0 * frame])
    assert temporal_score(video) == pytest.approx(1.0, abs=1e-12)


def test_temporal_small_shift_stays_high(rng):
    base = rng.random((3, 32, 32))
    shifted = np.roll(base, 1, axis=2)
    video = np.stack([base, shifted])
    assert temporal_score(video) > 0.9


def test_temporal_needs_two_frames(rng):
    with pytest.raises(ShapeMismatchError):
        temporal_score(rng.random((1, 3, 8, 8)))


def test_temporal_zero_frame_raises():
    video = np.zeros((2, 3, 8, 8))
    with pytest.raises(ValueError):
        temporal_score(video)


def test_pooled_embedder_is_linear(rng):
    emb = PooledFrameEmbedder()
    a = rng.random((3, 16, 16))
    b = rng.random((3, 16, 16))
    lhs = emb.embed_frame(2.0 * a + 0.5 * b)
    rhs = 2.0 * emb.embed_frame(a) + 0.5 * emb.embed_frame(b)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-14)


def test_pooled_embedder_constant_frame(rng):
    emb = PooledFrameEmbedder(pool_h=4, pool_w=4)
    vec = emb.embed_frame(np.full((2, 16, 16), 0.7))
    assert vec.shape == (4 * 4 * 2,)
    assert np.allclose(vec, 0.7, rtol=0.0, atol=1e-15)


def test_pooled_embedder_small_frames(rng):
    # Frames smaller than the pool grid degrade to per-pixel means.
    emb = PooledFrameEmbedder(pool_h=8, pool_w=8)
    vec = emb.embed_frame(rng.random((1, 4, 4)))
    assert vec.shape == (16,)


def test_pooled_embedder_rejects_video(rng):
    with pytest.raises(ShapeMismatchError):
        PooledFrameEmbedder().embed_frame(rng.random((2, 3, 4, 4)))


# ------------------------------------------------------------ changed pixels

def test_changed_pixels_map(rng):
    a = rng.random((2, 3, 4, 4))
    b = a.copy()
    b[0, 1, 2, 3] += 0.5
    b[1, 0, 0, 0] -= 0.5
    m = changed_pixels(a, b)
    assert m.shape == (2, 1, 4, 4)
    assert m.sum() == 2.0
    assert m[0, 0, 2, 3] == 1.0
    assert m[1, 0, 0, 0] == 1.0


def test_changed_pixels_tolerance():
    a = np.zeros((1, 1, 1, 2))
    b = a.copy()
    b[0, 0, 0, 0] = 1e-12
    b[0, 0, 0, 1] = 1e-3
    m = changed_pixels(a, b, tol=1e-9)
    assert m[0, 0, 0, 0] == 0.0
    assert m[0, 0, 0, 1] == 1.0


def test_changed_fraction(rng):
    a = np.zeros((1, 1, 2, 2))
    b = a.copy()
    b[0, 0, 0, 0] = 1.0
    assert changed_fraction(a, b) == pytest.approx(0.25)
    assert changed_fraction(a, a) == 0.0
