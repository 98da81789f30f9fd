"""Segmentation, dilation, and final-mask assembly.

The dilation oracle is an unoptimized quadruple loop computing, for every
pixel, the max over the clipped k x k window — no shared code with either
kernel backend.
"""

from __future__ import annotations

import numpy as np
import pytest

from latentcut import (
    ColorSegmenter,
    build_final_mask,
    dilate,
    mask_union,
    shrink_mask,
)
from latentcut.errors import ConfigError, ShapeMismatchError


def dilate_oracle(mask: np.ndarray, k: int) -> np.ndarray:
    f, _, h, w = mask.shape
    r = k // 2
    out = np.zeros_like(mask)
    for fi in range(f):
        for y in range(h):
            for x in range(w):
                best = 0.0
                for yy in range(max(0, y - r), min(h, y + r + 1)):
                    for xx in range(max(0, x - r), min(w, x + r + 1)):
                        best = max(best, mask[fi, 0, yy, xx])
                out[fi, 0, y, x] = best
    return out


def random_masks(count, frames=1, h=16, w=16, density=0.1, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield (rng.random((frames, 1, h, w)) < density).astype(np.float64)


def subset(a, b) -> bool:
    return bool((a <= b).all())


# ------------------------------------------------------------------ dilation

@pytest.mark.parametrize("k", [3, 5, 7])
def test_dilate_matches_brute_force(k):
    for mask in random_masks(25, frames=2, seed=k):
        assert np.array_equal(dilate(mask, k), dilate_oracle(mask, k))


def test_dilate_k1_is_copy():
    m = next(random_masks(1))
    out = dilate(m, 1)
    assert np.array_equal(out, m)
    assert out is not m


def test_dilate_single_point_becomes_block():
    m = np.zeros((1, 1, 9, 9))
    m[0, 0, 4, 4] = 1.0
    out = dilate(m, 3)
    expected = np.zeros_like(m)
    expected[0, 0, 3:6, 3:6] = 1.0
    assert np.array_equal(out, expected)


def test_dilate_zero_pads_at_border():
    m = np.zeros((1, 1, 5, 5))
    m[0, 0, 0, 0] = 1.0
    out = dilate(m, 3)
    expected = np.zeros_like(m)
    expected[0, 0, 0:2, 0:2] = 1.0
    assert np.array_equal(out, expected)


def test_dilate_does_not_leak_across_frames():
    m = np.zeros((2, 1, 5, 5))
    m[0, 0, 2, 2] = 1.0
    out = dilate(m, 5)
    assert out[1].sum() == 0.0


def test_dilate_is_extensive():
    for m in random_masks(10, seed=2):
        assert subset(m, dilate(m, 3))


def test_dilate_is_monotone():
    for m in random_masks(10, seed=3):
        smaller = m.copy()
        nz = np.argwhere(smaller == 1.0)
        if len(nz):
            smaller[tuple(nz[0])] = 0.0
        assert subset(dilate(smaller, 3), dilate(m, 3))


def test_dilate_distributes_over_union():
    masks = list(random_masks(2, seed=4))
    a, b = masks
    assert np.array_equal(
        dilate(mask_union(a, b), 3), mask_union(dilate(a, 3), dilate(b, 3))
    )


def test_dilate_composition_widens():
    for m in random_masks(5, seed=5):
        assert np.array_equal(dilate(dilate(m, 3), 3), dilate(m, 5))


def test_dilate_full_mask_fixed_point():
    m = np.ones((1, 1, 6, 6))
    assert np.array_equal(dilate(m, 5), m)


def test_dilate_width_validation():
    m = np.zeros((1, 1, 4, 4))
    for bad in (0, -3, 2, 4, 3.0, "3"):
        with pytest.raises(ConfigError):
            dilate(m, bad)


def test_dilate_rejects_soft_mask():
    with pytest.raises(ValueError):
        dilate(np.full((1, 1, 4, 4), 0.5), 3)


# -------------------------------------------------------------------- union

def test_mask_union_is_elementwise_or():
    a = np.zeros((1, 1, 2, 2))
    b = np.zeros((1, 1, 2, 2))
    a[0, 0, 0, 0] = 1.0
    b[0, 0, 1, 1] = 1.0
    out = mask_union(a, b)
    assert out[0, 0, 0, 0] == 1.0 and out[0, 0, 1, 1] == 1.0
    assert out.sum() == 2.0


def test_mask_union_commutes_and_idempotent():
    masks = list(random_masks(2, seed=6))
    a, b = masks
    assert np.array_equal(mask_union(a, b), mask_union(b, a))
    assert np.array_equal(mask_union(a, a), a)


def test_mask_union_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        mask_union(np.zeros((1, 1, 2, 2)), np.zeros((1, 1, 3, 3)))


# ------------------------------------------------------------- final mask

def test_build_final_mask_is_union_of_dilations():
    src, rough = list(random_masks(2, frames=2, seed=7))
    got = build_final_mask(src, rough, 3)
    expected = mask_union(dilate(src, 3), dilate(rough, 3))
    assert np.array_equal(got, expected)


def test_build_final_mask_covers_both_inputs():
    src, rough = list(random_masks(2, seed=8))
    out = build_final_mask(src, rough, 3)
    assert subset(src, out)
    assert subset(rough, out)


def test_build_final_mask_rough_width_override():
    src = np.zeros((1, 1, 11, 11))
    rough = np.zeros((1, 1, 11, 11))
    src[0, 0, 2, 2] = 1.0
    rough[0, 0, 8, 8] = 1.0
    out = build_final_mask(src, rough, 3, rough_k=5)
    assert np.array_equal(
        out, mask_union(dilate(src, 3), dilate(rough, 5))
    )


def test_build_final_mask_k1_disjoint():
    src = np.zeros((1, 1, 4, 4))
    rough = np.zeros((1, 1, 4, 4))
    src[0, 0, 0, 0] = 1.0
    rough[0, 0, 3, 3] = 1.0
    out = build_final_mask(src, rough, 1)
    assert out.sum() == 2.0


# ------------------------------------------------------------- segmentation

def test_color_segmenter_finds_exact_color():
    video = np.zeros((2, 3, 4, 4))
    video[0, :, 1, 2] = [0.8, 0.1, 0.1]
    seg = ColorSegmenter(tolerance=0.3)
    mask = seg.segment(video, {"color": [0.8, 0.1, 0.1]})
    assert mask[0, 0, 1, 2] == 1.0
    assert mask[0].sum() == 1.0
    # Frame 1 is all background, which is within 0.3 of nothing here.
    assert mask[1].sum() == 0.0


def test_color_segmenter_boundary_is_inclusive():
    video = np.zeros((1, 3, 1, 2))
    video[0, :, 0, 0] = [0.3, 0.0, 0.0]  # distance exactly 0.3 from black
    video[0, :, 0, 1] = [0.300001, 0.0, 0.0]
    seg = ColorSegmenter(tolerance=0.3)
    mask = seg.segment(video, {"color": [0.0, 0.0, 0.0]})
    assert mask[0, 0, 0, 0] == 1.0
    assert mask[0, 0, 0, 1] == 0.0


def test_color_segmenter_descriptor_tolerance_override():
    video = np.zeros((1, 3, 1, 1))
    video[0, :, 0, 0] = [0.5, 0.0, 0.0]
    seg = ColorSegmenter(tolerance=0.3)
    assert seg.segment(video, {"color": [0, 0, 0]})[0, 0, 0, 0] == 0.0
    assert seg.segment(video, {"color": [0, 0, 0], "tolerance": 0.6})[0, 0, 0, 0] == 1.0


def test_color_segmenter_mask_shape_and_binary():
    video = np.random.default_rng(0).random((3, 4, 5, 6))
    mask = ColorSegmenter().segment(video, {"color": [0.5, 0.5, 0.5, 0.5]})
    assert mask.shape == (3, 1, 5, 6)
    assert set(np.unique(mask)) <= {0.0, 1.0}


def test_color_segmenter_validation():
    video = np.zeros((1, 3, 2, 2))
    seg = ColorSegmenter()
    with pytest.raises(ConfigError):
        seg.segment(video, {"hue": 1})
    with pytest.raises(ConfigError):
        seg.segment(video, "red")
    with pytest.raises(ShapeMismatchError):
        seg.segment(video, {"color": [1.0, 0.0]})
    with pytest.raises(ConfigError):
        seg.segment(video, {"color": [0, 0, 0], "tolerance": -1.0})


# ---------------------------------------------------------------- shrinking

def test_shrink_mask_block_max():
    m = np.zeros((1, 1, 4, 4))
    m[0, 0, 0, 1] = 1.0  # top-left 2x2 block
    m[0, 0, 3, 3] = 1.0  # bottom-right 2x2 block
    out = shrink_mask(m, 2)
    assert out.shape == (1, 1, 2, 2)
    assert out[0, 0, 0, 0] == 1.0
    assert out[0, 0, 1, 1] == 1.0
    assert out.sum() == 2.0


def test_shrink_mask_scale_one_identity():
    m = next(random_masks(1, seed=9))
    assert np.array_equal(shrink_mask(m, 1), m)


def test_shrink_mask_preserves_any_coverage():
    for m in random_masks(5, h=8, w=8, seed=10):
        out = shrink_mask(m, 2)
        # Every editable pixel maps into an editable cell.
        ys, xs = np.nonzero(m[0, 0])
        for y, x in zip(ys, xs):
            assert out[0, 0, y // 2, x // 2] == 1.0


def test_shrink_mask_validation():
    with pytest.raises(ShapeMismatchError):
        shrink_mask(np.zeros((1, 1, 5, 4)), 2)
    with pytest.raises(ConfigError):
        shrink_mask(np.zeros((1, 1, 4, 4)), 0)
