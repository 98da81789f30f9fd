"""Reference numpy implementations of the hot kernels.

Every function here has a compiled twin in ``_core`` with bit-identical
output; parity is enforced by tests.  When editing either backend keep the
per-element operation order in sync, or the determinism guarantees break.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import maximum_filter
from scipy.special import ndtri

# SplitMix64 finalizer constants.
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

# (mantissa + 0.5) * 2**-53 maps a 53-bit integer into (0, 1) exclusive.
_U53_SCALE = 2.0**-53


def mix64(x: int) -> int:
    """SplitMix64 finalizer over 64-bit integers."""
    x &= _MASK64
    x ^= x >> 30
    x = (x * _MIX1) & _MASK64
    x ^= x >> 27
    x = (x * _MIX2) & _MASK64
    x ^= x >> 31
    return x


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def stream_key(seed: int, label: str) -> int:
    """Counter key for the (seed, label) noise stream."""
    return mix64((seed & _MASK64) ^ fnv1a64(label.encode("utf-8")))


def normal_fill(key: int, start: int, count: int) -> np.ndarray:
    """Standard normal draws for flat indices start .. start+count-1.

    A pure function of (key, index): filling a tensor in chunks yields
    exactly the same values as filling it in one call.
    """
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    x = np.uint64(key) + idx * np.uint64(_GAMMA)  # wraps mod 2**64
    x ^= x >> np.uint64(30)
    x *= np.uint64(_MIX1)
    x ^= x >> np.uint64(27)
    x *= np.uint64(_MIX2)
    x ^= x >> np.uint64(31)
    u = ((x >> np.uint64(11)).astype(np.float64) + 0.5) * _U53_SCALE
    return ndtri(u)


def blend(fg: np.ndarray, bg: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """fg*mask + bg*(1-mask); mask (F,1,H,W) broadcasts over channels."""
    return fg * mask + bg * (1.0 - mask)


def lincomb(a: float, x: np.ndarray, b: float, y: np.ndarray) -> np.ndarray:
    """a*x + b*y elementwise."""
    return a * x + b * y


def retime(x: np.ndarray, eps: np.ndarray, abar_from: float, abar_to: float) -> np.ndarray:
    """Move a latent between noise levels along a fixed noise direction.

    Solves x = sqrt(abar_from)*x0 + sqrt(1-abar_from)*eps for the clean
    estimate x0, then re-noises x0 to abar_to with the same eps.
    """
    sf = np.sqrt(abar_from)
    st = np.sqrt(abar_to)
    bf = np.sqrt(1.0 - abar_from)
    bt = np.sqrt(1.0 - abar_to)
    x0 = (x - bf * eps) / sf
    return st * x0 + bt * eps


def dilate(mask: np.ndarray, k: int) -> np.ndarray:
    """Binary dilation by a k x k window per frame, zero padded at borders."""
    out = np.empty_like(mask)
    for f in range(mask.shape[0]):
        maximum_filter(mask[f, 0], size=k, mode="constant", cval=0.0, output=out[f, 0])
    return out
