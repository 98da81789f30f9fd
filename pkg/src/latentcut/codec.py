"""Pixel/latent codecs.

A codec maps pixel videos to the latent space the sampler works in and
back.  The built-ins keep spatial geometry (scale 1): IdentityCodec passes
tensors through bit-exactly, LinearCodec applies an invertible per-pixel
channel mixing.  Real encoders with spatial downsampling plug in through
the same interface; their scale feeds mask shrinking in the pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from . import _kernels
from .errors import ConfigError, ShapeMismatchError
from .tensors import as_latent

__all__ = ["Codec", "IdentityCodec", "LinearCodec"]


@runtime_checkable
class Codec(Protocol):
    """Invertible map between pixel videos and latent videos."""

    @property
    def scale(self) -> int: ...

    def encode(self, video: np.ndarray) -> np.ndarray: ...

    def decode(self, latent: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class IdentityCodec:
    """Latents are the pixels; round trips are bit-exact."""

    @property
    def scale(self) -> int:
        return 1

    def encode(self, video) -> np.ndarray:
        return as_latent(video, name="video")

    def decode(self, latent) -> np.ndarray:
        return as_latent(latent, name="latent")


class LinearCodec:
    """Seeded invertible channel mixing; spatial layout untouched.

    encode multiplies every pixel's channel vector by a fixed
    well-conditioned matrix, decode applies the exact inverse.  The mixing
    loop accumulates in a fixed order with no BLAS involvement, so outputs
    are bit-reproducible regardless of thread settings.
    """

    def __init__(self, channels: int = 3, seed: int = 0):
        if not isinstance(channels, int) or channels < 1:
            raise ConfigError(f"codec: channels must be a positive integer, got {channels!r}")
        draw = _kernels.normal_fill(
            _kernels.stream_key(seed, f"linear_codec/{channels}"), 0, channels * channels
        ).reshape(channels, channels)
        # Diagonally dominant by construction: comfortably invertible.
        matrix = np.eye(channels) + (0.35 / np.sqrt(channels)) * draw
        self._init_from(matrix)

    @classmethod
    def from_matrix(cls, matrix) -> "LinearCodec":
        """Build from an explicit mixing matrix (rejected when singular)."""
        obj = cls.__new__(cls)
        obj._init_from(np.asarray(matrix, dtype=np.float64))
        return obj

    def _init_from(self, matrix: np.ndarray) -> None:
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
            raise ConfigError(f"codec: mixing matrix must be square, got {matrix.shape}")
        if not np.isfinite(matrix).all():
            raise ConfigError("codec: mixing matrix contains NaN or Inf")
        try:
            inverse = np.linalg.inv(matrix)
        except np.linalg.LinAlgError as exc:
            raise ConfigError("codec: mixing matrix is not invertible") from exc
        residual = np.abs(matrix @ inverse - np.eye(len(matrix))).max()
        if not np.isfinite(residual) or residual > 1e-8:
            raise ConfigError(
                f"codec: mixing matrix is too ill-conditioned (residual {residual:.2e})"
            )
        self._forward = matrix
        self._inverse = inverse

    @property
    def scale(self) -> int:
        return 1

    @property
    def channels(self) -> int:
        return len(self._forward)

    @property
    def matrix(self) -> np.ndarray:
        return self._forward.copy()

    def _mix(self, x: np.ndarray, m: np.ndarray, name: str) -> np.ndarray:
        v = as_latent(x, name=name)
        if v.shape[1] != self.channels:
            raise ShapeMismatchError(
                f"codec: expected {self.channels} channels, got {v.shape[1]}"
            )
        out = np.empty_like(v)
        for c in range(self.channels):
            acc = m[c, 0] * v[:, 0]
            for j in range(1, self.channels):
                acc += m[c, j] * v[:, j]
            out[:, c] = acc
        return out

    def encode(self, video) -> np.ndarray:
        return self._mix(video, self._forward, "video")

    def decode(self, latent) -> np.ndarray:
        return self._mix(latent, self._inverse, "latent")
