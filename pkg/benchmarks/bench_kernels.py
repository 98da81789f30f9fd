"""Compare the compiled kernel core against the numpy fallback.

Usage:
    python benchmarks/bench_kernels.py [--frames 8] [--size 48] [--repeat 20]

Times each hot kernel on a video-shaped workload and prints both backends
side by side.  The two produce bit-identical outputs (enforced by the test
suite); this script only answers whether compiling buys any speed.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from latentcut._kernels import fallback

try:
    from latentcut._kernels import _core
except ImportError:
    _core = None


def bench(fn, args, repeat: int) -> float:
    fn(*args)  # warm up (allocations, cache)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--frames", type=int, default=8)
    parser.add_argument("--channels", type=int, default=3)
    parser.add_argument("--size", type=int, default=48)
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--normal-count", type=int, default=200_000)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    shape = (args.frames, args.channels, args.size, args.size)
    x = rng.standard_normal(shape)
    y = rng.standard_normal(shape)
    mask = (rng.random((args.frames, 1, args.size, args.size)) < 0.2).astype(np.float64)

    cases = [
        ("blend", (x, y, mask)),
        ("lincomb", (0.3, x, 0.7, y)),
        ("retime", (x, y, 0.9, 0.4)),
        ("dilate k=3", (mask, 3)),
        ("dilate k=7", (mask, 7)),
        ("normal_fill", (12345, 0, args.normal_count)),
    ]

    print(f"workload: {shape} latents, {args.normal_count} normal draws, best of {args.repeat}")
    header = f"{'kernel':<14} {'fallback':>12} {'compiled':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, call_args in cases:
        base = bench(getattr(fallback, name.split()[0]), call_args, args.repeat)
        if _core is None:
            print(f"{name:<14} {base * 1e6:>10.1f}us {'(not built)':>12} {'-':>9}")
            continue
        fast = bench(getattr(_core, name.split()[0]), call_args, args.repeat)
        print(f"{name:<14} {base * 1e6:>10.1f}us {fast * 1e6:>10.1f}us {base / fast:>8.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
