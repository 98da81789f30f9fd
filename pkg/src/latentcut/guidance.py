"""Condition embeddings and guided prediction mixing.

Embeddings are deterministic stand-ins for real image/text encoders: each
distinct descriptor owns a fixed unit-norm vector, and downstream components
look conditions up by the embedding's string key, never by vector distance.
The negative (unconditional) side of guidance is built from the embedding of
an all-zero reference image, scaled by the guidance strength gamma.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from . import _kernels
from .errors import ConfigError, ShapeMismatchError

__all__ = [
    "ZERO_IMAGE",
    "ConditionSet",
    "Embedding",
    "EmbeddingProvider",
    "HashEmbedder",
    "build_condition_set",
    "canonical_descriptor",
    "cfg_combine",
    "zero_image_guidance",
]

# Canonical descriptor of the all-zero reference image.
ZERO_IMAGE = {"kind": "zero_image"}

DEFAULT_GAMMA = 0.5
DEFAULT_GUIDANCE_WEIGHT = 6.0


def canonical_descriptor(descriptor) -> str:
    """Stable string form of a str or JSON-serializable descriptor."""
    if isinstance(descriptor, str):
        return descriptor
    try:
        return json.dumps(descriptor, sort_keys=True, separators=(",", ":"))
    except TypeError as exc:
        raise ConfigError(f"descriptor is not JSON-serializable: {descriptor!r}") from exc


@dataclass(frozen=True)
class Embedding:
    """An embedding vector plus the key naming what it encodes."""

    key: str
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or len(v) < 1:
            raise ShapeMismatchError(f"embedding {self.key!r}: values must be a 1-D vector")
        if not np.isfinite(v).all():
            raise ValueError(f"embedding {self.key!r}: contains NaN or Inf")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return len(self.values)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@runtime_checkable
class EmbeddingProvider(Protocol):
    """Maps image descriptors and text strings to embeddings."""

    @property
    def image_dim(self) -> int: ...

    @property
    def text_dim(self) -> int: ...

    def embed_image(self, descriptor) -> Embedding: ...

    def embed_text(self, text: str) -> Embedding: ...


@dataclass(frozen=True)
class HashEmbedder:
    """Deterministic stand-in encoder.

    Every distinct descriptor hashes to its own fixed unit-norm vector; no
    similarity structure is implied and none is needed, since consumers
    match embeddings by key.  In particular the all-zero reference image
    (ZERO_IMAGE) gets one reproducible vector per (dim, seed) pair.
    """

    dim: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError(f"embedder: dim must be positive, got {self.dim}")

    @property
    def image_dim(self) -> int:
        return self.dim

    @property
    def text_dim(self) -> int:
        return self.dim

    def _draw(self, label: str) -> np.ndarray:
        v = _kernels.normal_fill(_kernels.stream_key(self.seed, label), 0, self.dim)
        n = float(np.linalg.norm(v))
        if n == 0.0:  # can't happen with continuous draws; guard anyway
            raise ValueError(f"embedder: zero-norm draw for {label!r}")
        return v / n

    def embed_image(self, descriptor) -> Embedding:
        key = f"img:{canonical_descriptor(descriptor)}"
        return Embedding(key=key, values=self._draw(key))

    def embed_text(self, text: str) -> Embedding:
        key = f"txt:{text}"
        return Embedding(key=key, values=self._draw(key))


def zero_image_guidance(provider: EmbeddingProvider, gamma: float) -> Embedding:
    """Image-side negative guidance: gamma * embed(all-zero image).

    Interpolates linearly between the zero vector (gamma = 0) and the full
    zero-image embedding (gamma = 1); the norm is exactly gamma times the
    base embedding's norm.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ConfigError(f"gamma must lie in [0, 1], got {gamma}")
    base = provider.embed_image(ZERO_IMAGE)
    return Embedding(key=f"zero_img*{gamma!r}", values=gamma * base.values)


def cfg_combine(eps_pos: np.ndarray, eps_neg: np.ndarray, w: float) -> np.ndarray:
    """Guided prediction (1+w)*eps_pos - w*eps_neg."""
    p = np.asarray(eps_pos, dtype=np.float64)
    n = np.asarray(eps_neg, dtype=np.float64)
    if p.shape != n.shape:
        raise ShapeMismatchError(f"cfg_combine: {p.shape} vs {n.shape}")
    return _kernels.lincomb(1.0 + w, p, -w, n)


@dataclass(frozen=True)
class ConditionSet:
    """Positive and negative guidance embeddings plus the mixing weight."""

    pos_image: Embedding
    pos_text: Embedding
    neg_image: Embedding
    neg_text: Embedding
    w: float = DEFAULT_GUIDANCE_WEIGHT
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        if self.pos_image.dim != self.neg_image.dim:
            raise ShapeMismatchError(
                f"conditions: image dims differ, {self.pos_image.dim} vs {self.neg_image.dim}"
            )
        if self.pos_text.dim != self.neg_text.dim:
            raise ShapeMismatchError(
                f"conditions: text dims differ, {self.pos_text.dim} vs {self.neg_text.dim}"
            )
        if self.w < 0.0:
            raise ConfigError(f"conditions: w must be >= 0, got {self.w}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"conditions: gamma must lie in [0, 1], got {self.gamma}")

    @property
    def positive_key(self) -> tuple[str, str]:
        return (self.pos_image.key, self.pos_text.key)

    @property
    def negative_key(self) -> tuple[str, str]:
        return (self.neg_image.key, self.neg_text.key)


def build_condition_set(
    provider: EmbeddingProvider,
    ref_image,
    text: str,
    negative_text: str = "",
    *,
    gamma: float = DEFAULT_GAMMA,
    w: float = DEFAULT_GUIDANCE_WEIGHT,
    scale_negative_text: bool = False,
) -> ConditionSet:
    """Assemble the guidance conditions for an edit.

    The positive side carries the reference image and the edit text; the
    negative side carries the zero-image guidance embedding and the negative
    text.  scale_negative_text additionally multiplies the negative text
    embedding by gamma (off by default).
    """
    pos_image = provider.embed_image(ref_image)
    pos_text = provider.embed_text(text)
    neg_image = zero_image_guidance(provider, gamma)
    neg_text = provider.embed_text(negative_text)
    if scale_negative_text:
        neg_text = Embedding(
            key=f"txt*{gamma!r}:{negative_text}", values=gamma * neg_text.values
        )
    return ConditionSet(
        pos_image=pos_image,
        pos_text=pos_text,
        neg_image=neg_image,
        neg_text=neg_text,
        w=w,
        gamma=gamma,
    )
