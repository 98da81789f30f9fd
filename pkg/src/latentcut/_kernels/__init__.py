"""Hot kernels: compiled core when built, numpy fallback otherwise.

The two backends are bit-identical by construction (same per-element
operation order, no FMA contraction, same inverse-normal-CDF routine);
tests/test_kernels.py enforces it.  Selection happens once at import and
never consults environment state.
"""

from . import fallback
from .fallback import fnv1a64, mix64, stream_key

try:
    from . import _core as _active

    BACKEND = "compiled"
except ImportError:  # extension not built; numpy path is equivalent
    _active = fallback
    BACKEND = "fallback"

blend = _active.blend
lincomb = _active.lincomb
retime = _active.retime
dilate = _active.dilate
normal_fill = _active.normal_fill

__all__ = [
    "BACKEND",
    "blend",
    "dilate",
    "fallback",
    "fnv1a64",
    "lincomb",
    "mix64",
    "normal_fill",
    "retime",
    "stream_key",
]
