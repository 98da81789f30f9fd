"""Dense 4-D video tensors, binary masks, and named noise streams.

Videos and latents are float64 arrays of shape (frames, channels, height,
width), row-major.  Masks are (frames, 1, height, width) arrays holding
exactly 0.0 or 1.0; the single mask channel broadcasts across the latent
channel axis wherever a mask meets a latent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ShapeMismatchError

__all__ = [
    "SeedStream",
    "as_latent",
    "as_mask",
    "blend",
    "gaussian",
    "l2_rel",
]


def as_latent(data, *, name: str = "latent") -> np.ndarray:
    """Validate and return a float64 (F, C, H, W) tensor."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 4:
        raise ShapeMismatchError(
            f"{name}: expected 4 axes (frames, channels, height, width), got shape {arr.shape}"
        )
    if min(arr.shape) < 1:
        raise ShapeMismatchError(f"{name}: empty axis in shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name}: contains NaN or Inf")
    return arr


def as_mask(data, *, name: str = "mask") -> np.ndarray:
    """Validate and return a float64 (F, 1, H, W) binary mask."""
    arr = as_latent(data, name=name)
    if arr.shape[1] != 1:
        raise ShapeMismatchError(f"{name}: masks carry one channel, got shape {arr.shape}")
    if not ((arr == 0.0) | (arr == 1.0)).all():
        raise ValueError(f"{name}: values must be exactly 0.0 or 1.0")
    return arr


@dataclass(frozen=True)
class SeedStream:
    """Names one deterministic noise stream.

    Draws are a pure function of (seed, label, element index): the same
    stream always yields the same numbers, independent of draw order,
    chunking, or anything previously sampled.
    """

    seed: int
    label: str

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ValueError(f"SeedStream: seed must be non-negative, got {self.seed}")

    def key(self) -> int:
        return _kernels.stream_key(self.seed, self.label)

    def child(self, suffix: str) -> "SeedStream":
        """A derived stream with an extended label."""
        return SeedStream(self.seed, f"{self.label}/{suffix}")


def gaussian(dims: tuple[int, ...], stream: SeedStream) -> np.ndarray:
    """Standard normal tensor of shape ``dims`` drawn from ``stream``."""
    if len(dims) == 0 or any(int(d) < 1 for d in dims):
        raise ShapeMismatchError(f"gaussian: dims must be positive, got {dims}")
    n = math.prod(int(d) for d in dims)
    return _kernels.normal_fill(stream.key(), 0, n).reshape(dims)


def blend(fg, bg, mask) -> np.ndarray:
    """Masked merge: fg where mask is 1, bg where mask is 0.

    With a binary mask every output element equals the corresponding
    element of one of the two inputs; nothing is interpolated.
    """
    f = as_latent(fg, name="fg")
    b = as_latent(bg, name="bg")
    m = as_mask(mask)
    if f.shape != b.shape:
        raise ShapeMismatchError(f"blend: fg {f.shape} vs bg {b.shape}")
    if m.shape[0] != f.shape[0] or m.shape[2:] != f.shape[2:]:
        raise ShapeMismatchError(f"blend: mask {m.shape} does not fit tensors {f.shape}")
    return _kernels.blend(f, b, m)


def l2_rel(reference, candidate) -> float:
    """Relative L2 distance ||reference - candidate|| / ||reference||.

    Zero reference: returns 0.0 if the candidate is zero too, else inf.
    """
    a = np.asarray(reference, dtype=np.float64)
    b = np.asarray(candidate, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"l2_rel: {a.shape} vs {b.shape}")
    num = float(np.linalg.norm((a - b).ravel()))
    den = float(np.linalg.norm(a.ravel()))
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den
