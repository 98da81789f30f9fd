"""Quality metrics for edited videos.

PSNR uses a fixed peak of 1.0 (videos live in [0, 1]) and returns +inf for
identical inputs.  The temporal score embeds every frame with a small LINEAR
map (block mean-pool, flatten) and averages the cosine similarity of
adjacent frames, so identical neighbors score 1 and negated neighbors -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatchError
from .tensors import as_latent, as_mask

__all__ = [
    "PooledFrameEmbedder",
    "changed_fraction",
    "changed_pixels",
    "psnr",
    "temporal_score",
]


def psnr(reference, candidate, region=None) -> float:
    """Peak-1.0 PSNR in dB, optionally restricted to a pixel region.

    region: (F, 1, H, W) binary mask; only pixels marked 1 contribute (all
    their channels).  An empty region is an error.  Returns math.inf when
    the selected pixels are identical.
    """
    a = as_latent(reference, name="reference")
    b = as_latent(candidate, name="candidate")
    if a.shape != b.shape:
        raise ShapeMismatchError(f"psnr: {a.shape} vs {b.shape}")
    diff2 = (a - b) ** 2
    if region is None:
        mse = float(diff2.mean())
    else:
        m = as_mask(region)
        if m.shape[0] != a.shape[0] or m.shape[2:] != a.shape[2:]:
            raise ShapeMismatchError(f"psnr: region {m.shape} does not fit {a.shape}")
        count = float(m.sum()) * a.shape[1]
        if count == 0.0:
            raise ValueError("psnr: empty region")
        mse = float((diff2 * m).sum()) / count
    if mse == 0.0:
        return math.inf
    return -10.0 * math.log10(mse)


@dataclass(frozen=True)
class PooledFrameEmbedder:
    """Linear frame embedding: block mean-pool each channel, then flatten."""

    pool_h: int = 8
    pool_w: int = 8

    def embed_frame(self, frame) -> np.ndarray:
        f = np.asarray(frame, dtype=np.float64)
        if f.ndim != 3:
            raise ShapeMismatchError(f"embed_frame: expected (C, H, W), got {f.shape}")
        _, height, width = f.shape
        rows = np.array_split(f, min(self.pool_h, height), axis=1)
        pooled = [
            [block.mean(axis=(1, 2)) for block in np.array_split(r, min(self.pool_w, width), axis=2)]
            for r in rows
        ]
        return np.array(pooled).ravel()


def temporal_score(frames, embedder=None) -> float:
    """Mean cosine similarity of adjacent frame embeddings (needs F >= 2)."""
    v = as_latent(frames, name="frames")
    if v.shape[0] < 2:
        raise ShapeMismatchError("temporal_score: need at least 2 frames")
    if embedder is None:
        embedder = PooledFrameEmbedder()
    vecs = [embedder.embed_frame(v[f]) for f in range(v.shape[0])]
    norms = [float(np.linalg.norm(e)) for e in vecs]
    if any(n == 0.0 for n in norms):
        raise ValueError("temporal_score: zero-norm frame embedding")
    sims = [
        float(np.dot(vecs[f], vecs[f + 1])) / (norms[f] * norms[f + 1])
        for f in range(len(vecs) - 1)
    ]
    return float(np.mean(sims))


def changed_pixels(reference, candidate, tol: float = 1e-9) -> np.ndarray:
    """(F, 1, H, W) 0/1 map of pixels where any channel differs by more than tol."""
    a = as_latent(reference, name="reference")
    b = as_latent(candidate, name="candidate")
    if a.shape != b.shape:
        raise ShapeMismatchError(f"changed_pixels: {a.shape} vs {b.shape}")
    worst = np.abs(a - b).max(axis=1, keepdims=True)
    return (worst > tol).astype(np.float64)


def changed_fraction(reference, candidate, tol: float = 1e-9) -> float:
    """Fraction of pixels that changed beyond tol."""
    return float(changed_pixels(reference, candidate, tol).mean())
