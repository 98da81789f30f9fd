"""On-disk tensor container (.vint) and PPM frame export.

Layout: 4 magic bytes "VINT", a little-endian uint32 header length, a JSON
header, then the raw little-endian row-major payload.  The header carries
{"dims": [F, C, H, W], "dtype": "f64"|"f32", "kind": "video"|"latent"|"mask",
"version": 1, "meta": {...}}; keys are sorted and the encoding has no
whitespace, so identical tensors and metadata produce identical bytes.
"""

from __future__ import annotations

import json
import math
import struct
from pathlib import Path

import numpy as np

from .errors import ConfigError, ContainerError
from .sampler import InversionTrajectory
from .schedule import TimestepPlan
from .tensors import as_latent, as_mask

__all__ = [
    "read_container",
    "read_trajectory",
    "write_container",
    "write_ppm_frames",
    "write_trajectory",
]

MAGIC = b"VINT"
FORMAT_VERSION = 1
KINDS = ("video", "latent", "mask")
DTYPES = {"f64": "<f8", "f32": "<f4"}


def _check_meta(meta: dict) -> dict:
    try:
        json.dumps(meta)
    except TypeError as exc:
        raise ConfigError(f"container meta is not JSON-serializable: {meta!r}") from exc
    return meta


def write_container(path, array, kind: str, *, dtype: str = "f64", meta: dict | None = None) -> None:
    """Write one 4-D tensor; f32 trades precision for half the bytes."""
    if kind not in KINDS:
        raise ConfigError(f"container kind must be one of {KINDS}, got {kind!r}")
    if dtype not in DTYPES:
        raise ConfigError(f"container dtype must be one of {tuple(DTYPES)}, got {dtype!r}")
    arr = as_mask(array) if kind == "mask" else as_latent(array)
    header = {
        "dims": list(arr.shape),
        "dtype": dtype,
        "kind": kind,
        "version": FORMAT_VERSION,
        "meta": _check_meta({} if meta is None else meta),
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = np.ascontiguousarray(arr, dtype=DTYPES[dtype]).tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(payload)


def read_container(path) -> tuple[np.ndarray, dict]:
    """Read a container; returns (float64 tensor, header dict)."""
    data = Path(path).read_bytes()
    if len(data) < 8 or data[:4] != MAGIC:
        raise ContainerError(f"{path}: not a VINT container")
    (hlen,) = struct.unpack_from("<I", data, 4)
    if len(data) < 8 + hlen:
        raise ContainerError(f"{path}: truncated header")
    try:
        header = json.loads(data[8 : 8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ContainerError(f"{path}: bad header JSON") from exc

    dims = header.get("dims")
    kind = header.get("kind")
    dtype = header.get("dtype")
    if kind not in KINDS or dtype not in DTYPES:
        raise ContainerError(f"{path}: unknown kind/dtype {kind!r}/{dtype!r}")
    if (
        not isinstance(dims, list)
        or len(dims) != 4
        or not all(isinstance(d, int) and d > 0 for d in dims)
    ):
        raise ContainerError(f"{path}: bad dims {dims!r}")

    npdtype = np.dtype(DTYPES[dtype])
    expected = math.prod(dims) * npdtype.itemsize
    payload = data[8 + hlen :]
    if len(payload) != expected:
        raise ContainerError(
            f"{path}: payload holds {len(payload)} bytes, header promises {expected}"
        )
    arr = np.frombuffer(payload, dtype=npdtype).reshape(dims).astype(np.float64)
    try:
        arr = as_mask(arr) if kind == "mask" else as_latent(arr)
    except ValueError as exc:
        raise ContainerError(f"{path}: payload violates kind {kind!r}: {exc}") from exc
    return arr, header


def write_trajectory(path, trajectory: InversionTrajectory, *, meta: dict | None = None) -> None:
    """Store a trajectory by stacking its latents along the frame axis."""
    lats = trajectory.latents
    stacked = np.concatenate(lats, axis=0)
    plan = trajectory.plan
    full_meta = {
        "trajectory": {
            "points": len(lats),
            "frames": int(lats[0].shape[0]),
            "tau": list(plan.tau),
            "rho": plan.rho,
            "total_steps": plan.total_steps,
        }
    }
    if meta:
        full_meta.update(_check_meta(meta))
    write_container(path, stacked, "latent", meta=full_meta)


def read_trajectory(path) -> tuple[InversionTrajectory, dict]:
    """Load a trajectory written by write_trajectory."""
    stacked, header = read_container(path)
    info = header.get("meta", {}).get("trajectory")
    if not isinstance(info, dict):
        raise ContainerError(f"{path}: container holds no trajectory metadata")
    try:
        points = int(info["points"])
        frames = int(info["frames"])
        plan = TimestepPlan(
            tau=tuple(int(t) for t in info["tau"]),
            rho=int(info["rho"]),
            total_steps=int(info["total_steps"]),
        )
    except (KeyError, TypeError, ValueError, ConfigError) as exc:
        raise ContainerError(f"{path}: bad trajectory metadata: {exc}") from exc
    if points < 1 or stacked.shape[0] != points * frames:
        raise ContainerError(
            f"{path}: stacked frame count {stacked.shape[0]} does not match "
            f"{points} points x {frames} frames"
        )
    latents = tuple(stacked[i * frames : (i + 1) * frames] for i in range(points))
    return InversionTrajectory(latents=latents, plan=plan), header


def write_ppm_frames(directory, video) -> list[Path]:
    """Export a 3-channel video as one binary PPM (P6) per frame.

    Values are clamped to [0, 1] and quantized to 8 bits.
    """
    v = as_latent(video, name="video")
    if v.shape[1] != 3:
        raise ConfigError(f"PPM export needs 3 channels, got {v.shape[1]}")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    _, _, height, width = v.shape
    u8 = np.rint(np.clip(v, 0.0, 1.0) * 255.0).astype(np.uint8)
    paths = []
    for f in range(v.shape[0]):
        p = directory / f"frame_{f:04d}.ppm"
        with open(p, "wb") as fh:
            fh.write(b"P6\n%d %d\n255\n" % (width, height))
            fh.write(u8[f].transpose(1, 2, 0).tobytes())
        paths.append(p)
    return paths
