"""Object segmentation, mask dilation, and final-mask assembly.

Masks mark editable pixels with 1.0.  Dilation grows support by a square
neighborhood max per frame (zero padded, so nothing wraps or leaks across
frames); the final editing mask is the union of the dilated source-object
mask and the dilated rough-edit object mask, so both what the edit removes
and what it adds stay inside the editable region.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from . import _kernels
from .errors import ConfigError, ShapeMismatchError
from .tensors import as_latent, as_mask

__all__ = [
    "ColorSegmenter",
    "Segmenter",
    "build_final_mask",
    "dilate",
    "mask_union",
    "shrink_mask",
]

DEFAULT_DILATION = 3


@runtime_checkable
class Segmenter(Protocol):
    """Locates the object a descriptor names in every frame of a video."""

    def segment(self, video: np.ndarray, descriptor) -> np.ndarray: ...


@dataclass(frozen=True)
class ColorSegmenter:
    """Marks pixels whose color sits within an L2 ball of a target color.

    The descriptor is a dict with "color" (length matching the channel
    count) and optionally "tolerance" overriding the segmenter default.
    Boundary pixels at exactly the tolerance distance are included.
    """

    tolerance: float = 0.3

    def segment(self, video, descriptor) -> np.ndarray:
        v = as_latent(video, name="video")
        if not isinstance(descriptor, dict) or "color" not in descriptor:
            raise ConfigError(f"color segmentation needs a {{'color': ...}} descriptor, got {descriptor!r}")
        color = np.asarray(descriptor["color"], dtype=np.float64)
        tol = float(descriptor.get("tolerance", self.tolerance))
        if color.ndim != 1 or len(color) != v.shape[1]:
            raise ShapeMismatchError(
                f"descriptor color has {color.shape} entries, video has {v.shape[1]} channels"
            )
        if tol < 0.0:
            raise ConfigError(f"tolerance must be >= 0, got {tol}")
        diff = v - color[None, :, None, None]
        dist2 = np.sum(diff * diff, axis=1, keepdims=True)
        return (dist2 <= tol * tol).astype(np.float64)


def _check_width(k: int) -> None:
    if not isinstance(k, int) or k < 1 or k % 2 == 0:
        raise ConfigError(f"dilation width must be an odd positive integer, got {k!r}")


def dilate(mask, k: int) -> np.ndarray:
    """Grow mask support by a k x k neighborhood max per frame."""
    m = as_mask(mask)
    _check_width(k)
    if k == 1:
        return m.copy()
    return _kernels.dilate(m, k)


def mask_union(a, b) -> np.ndarray:
    """Elementwise max of two binary masks."""
    ma = as_mask(a, name="mask a")
    mb = as_mask(b, name="mask b")
    if ma.shape != mb.shape:
        raise ShapeMismatchError(f"mask_union: {ma.shape} vs {mb.shape}")
    return np.maximum(ma, mb)


def build_final_mask(source_mask, rough_mask, k: int, rough_k: int | None = None) -> np.ndarray:
    """Union of the dilated source mask and the dilated rough-edit mask.

    rough_k overrides the dilation width for the rough-edit side (defaults
    to k); useful when the new object's shape differs strongly from the old.
    """
    return mask_union(dilate(source_mask, k), dilate(rough_mask, k if rough_k is None else rough_k))


def shrink_mask(mask, scale: int) -> np.ndarray:
    """Conservative mask downsampling by block max (for codecs with scale > 1).

    A latent cell is editable when any pixel it covers is editable.  Height
    and width must be divisible by scale.
    """
    m = as_mask(mask)
    if not isinstance(scale, int) or scale < 1:
        raise ConfigError(f"scale must be a positive integer, got {scale!r}")
    if scale == 1:
        return m
    frames, _, height, width = m.shape
    if height % scale or width % scale:
        raise ShapeMismatchError(
            f"mask {height}x{width} not divisible by codec scale {scale}"
        )
    blocks = m.reshape(frames, 1, height // scale, scale, width // scale, scale)
    return blocks.max(axis=(3, 5))
