"""Built-in acceptance checks, runnable via ``latentcut selftest``.

Each check returns (name, ok, detail).  The checks cover the package's
central guarantees: kernel-vs-oracle equivalence, exact invertibility,
refinement with denser grids, background preservation, edit efficacy,
start-level monotonicity, guidance-norm algebra, byte determinism, and
desk-scale runtime.  The test suite runs the same functions, so the CLI
and pytest can never disagree about what "passing" means.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from .denoise import ConstantDenoiser, GaussianComponent, GmmDenoiser
from .guidance import ZERO_IMAGE, HashEmbedder, build_condition_set, zero_image_guidance
from .codec import IdentityCodec
from .container import write_container
from .masking import ColorSegmenter, dilate, mask_union
from .metrics import changed_pixels, psnr
from .pipeline import EditConfig, EditDeps, condition_from_config, run_edit
from .sampler import ddim_invert_step, ddim_step, denoise_trajectory, invert_trajectory
from .scenario import (
    ObjectSpec,
    ScenarioSpec,
    assemble_run,
    canonical_run_spec,
    render_reference,
    scenario_denoiser,
    synth_video,
)
from .schedule import linear_schedule, make_plan
from .tensors import SeedStream, gaussian, l2_rel

__all__ = ["run_all", "ALL_CHECKS"]

CheckResult = tuple[str, bool, str]

_THREAD_VARS = ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS")


def _canonical_pieces():
    scenario, config, deps = assemble_run(canonical_run_spec())
    video, _ = synth_video(scenario)
    return scenario, config, deps, video


def _masked_distance(a, b, mask) -> float:
    diff = (a - b) * mask  # mask broadcasts over channels
    return float(np.linalg.norm(diff.ravel()))


def check_dilation_oracle() -> CheckResult:
    """Dilation matches a brute-force window max plus morphology algebra."""
    started = time.perf_counter()
    rng = np.random.default_rng(1)
    for trial in range(100):
        mask = (rng.random((1, 1, 16, 16)) < 0.12).astype(np.float64)
        for k in (3, 5, 7):
            r = k // 2
            got = dilate(mask, k)
            for y in range(16):
                for x in range(16):
                    window = mask[0, 0, max(0, y - r) : y + r + 1, max(0, x - r) : x + r + 1]
                    if got[0, 0, y, x] != window.max():
                        return (
                            "dilation oracle",
                            False,
                            f"mismatch at trial {trial}, k={k}, pixel ({y}, {x})",
                        )
            if not (mask <= got).all():
                return ("dilation oracle", False, f"not extensive at k={k}")
        other = (rng.random((1, 1, 16, 16)) < 0.12).astype(np.float64)
        union_first = dilate(mask_union(mask, other), 3)
        union_last = mask_union(dilate(mask, 3), dilate(other, 3))
        if not np.array_equal(union_first, union_last):
            return ("dilation oracle", False, "union distribution failed")
        shrunk = mask * other  # intersection: a sub-mask of mask
        if not (dilate(shrunk, 3) <= dilate(mask, 3)).all():
            return ("dilation oracle", False, "monotonicity failed")
        if not np.array_equal(dilate(dilate(mask, 3), 3), dilate(mask, 5)):
            return ("dilation oracle", False, "composition 3∘3 != 5 failed")
    elapsed = time.perf_counter() - started
    return ("dilation oracle", elapsed < 5.0, f"100 masks x k in (3,5,7), {elapsed:.2f}s")


def check_sampling_inverse() -> CheckResult:
    """Single moves invert exactly; so does a whole constant-prediction run."""
    started = time.perf_counter()
    rng = np.random.default_rng(2)
    n = 10_000
    z = rng.standard_normal(n)
    e = rng.standard_normal(n)
    ab_a = 0.004 + 0.995 * rng.random(n)
    ab_b = 0.004 + 0.995 * rng.random(n)
    worst = 0.0
    for i in range(n):
        zi = np.full((1, 1, 1, 1), z[i])
        ei = np.full((1, 1, 1, 1), e[i])
        up = ddim_invert_step(zi, ei, ab_b[i], ab_a[i])
        back = ddim_step(up, ei, ab_b[i], ab_a[i])
        err = abs(float(back[0, 0, 0, 0]) - z[i]) / max(1.0, abs(z[i]))
        worst = max(worst, err)
    if worst > 1e-12:
        return ("sampling inverse", False, f"scalar round trip error {worst:.3e} > 1e-12")

    schedule = linear_schedule()
    plan = make_plan(schedule, nu=50, rho=50)
    cond = build_condition_set(HashEmbedder(), ZERO_IMAGE, "", w=0.0)
    denoiser = ConstantDenoiser(0.25)
    z0 = gaussian((8, 4, 32, 32), SeedStream(3, "const/z0"))
    traj = invert_trajectory(z0, schedule, plan, denoiser, cond)
    back = denoise_trajectory(traj[50], 50, schedule, plan, denoiser, cond)
    traj_err = l2_rel(z0, back)
    elapsed = time.perf_counter() - started
    ok = traj_err <= 1e-9 and elapsed < 10.0
    return (
        "sampling inverse",
        ok,
        f"worst scalar {worst:.2e}, trajectory {traj_err:.2e}, {elapsed:.2f}s",
    )


def check_grid_refinement() -> CheckResult:
    """A denser grid reconstructs a single-Gaussian model more closely."""
    schedule = linear_schedule()
    cond = build_condition_set(HashEmbedder(), "ref", "text", w=0.0)
    mean = 0.5 * gaussian((4, 3, 24, 24), SeedStream(77, "refine/mean"))
    denoiser = GmmDenoiser({cond.positive_key: [GaussianComponent(mean=mean, var=0.5)]})
    z0 = mean + 0.3 * gaussian(mean.shape, SeedStream(77, "refine/z0"))

    errs = {}
    for nu in (50, 100):
        plan = make_plan(schedule, nu=nu, rho=nu)
        traj = invert_trajectory(z0, schedule, plan, denoiser, cond)
        errs[nu] = l2_rel(z0, denoise_trajectory(traj[nu], nu, schedule, plan, denoiser, cond))
    ok = errs[100] < errs[50]
    return (
        "grid refinement",
        ok,
        f"err(nu=50)={errs[50]:.6e}, err(nu=100)={errs[100]:.6e}",
    )


def check_background_preservation() -> CheckResult:
    """Pixels outside the final mask come back bit-for-bit."""
    _, config, deps, video = _canonical_pieces()
    result = run_edit(video, config, deps)
    off = result.final_mask == 0.0
    worst = float(np.abs(result.frames - video).max(axis=1, keepdims=True)[off].max())
    excluded = psnr(video, result.frames, region=1.0 - result.final_mask)
    ok = worst <= 1e-12 and math.isinf(excluded)
    return (
        "background preservation",
        ok,
        f"max |diff| off-mask {worst:.1e}, off-mask psnr {excluded}",
    )


def check_object_replacement() -> CheckResult:
    """The edit paints the target where the source object used to be."""
    scenario, config, deps, video = _canonical_pieces()
    result = run_edit(video, config, deps)
    reference = render_reference(scenario)
    bg = np.asarray(scenario.background)[None, :, None, None]
    target_region = changed_pixels(reference, np.broadcast_to(bg, reference.shape).copy())
    region = target_region.astype(bool)[:, 0]

    color_errs = []
    for c, want in enumerate(scenario.target.color):
        color_errs.append(abs(float(result.frames[:, c][region].mean()) - want))
    if max(color_errs) >= 0.05:
        return ("object replacement", False, f"mean color off by {max(color_errs):.4f}")

    changed = changed_pixels(video, result.frames)
    if not (changed <= result.final_mask).all():
        return ("object replacement", False, "changed pixels escaped the final mask")

    worst_px = 0.0
    for f in range(scenario.frames):
        ys, xs = np.nonzero(changed[f, 0])
        cx, cy = scenario.source.center(f)
        worst_px = max(worst_px, abs(xs.mean() - cx), abs(ys.mean() - cy))
    ok = worst_px < 2.0
    return (
        "object replacement",
        ok,
        f"max color err {max(color_errs):.4f}, max centroid drift {worst_px:.3f}px",
    )


def check_start_level_trend() -> CheckResult:
    """Starting from deeper noise can only move the masked region further."""
    scenario, _, _, video = _canonical_pieces()
    distances = []
    for rho1 in (5, 10, 20, 40):
        run = canonical_run_spec()
        run["edit"]["rho_stage1"] = rho1
        _, config, deps = assemble_run(run)
        result = run_edit(video, config, deps)
        distances.append(_masked_distance(result.frames, video, result.final_mask))
    ok = all(b >= a - 1e-9 for a, b in zip(distances, distances[1:]))
    pretty = ", ".join(f"{d:.6f}" for d in distances)
    return ("start-level trend", ok, f"masked L2 over rho1 in (5,10,20,40): {pretty}")


def check_guidance_norm() -> CheckResult:
    """The negative image embedding's norm scales exactly with gamma."""
    provider = HashEmbedder()
    base = provider.embed_image(ZERO_IMAGE).norm()
    worst = 0.0
    for gamma in (0.0, 0.25, 0.5, 1.0):
        got = zero_image_guidance(provider, gamma).norm()
        worst = max(worst, abs(got - gamma * base))
    return ("guidance norm", worst <= 1e-12, f"worst |norm - gamma*base| = {worst:.2e}")


def _run_edit_subprocess(workdir: Path, tag: str, threads: str) -> bytes:
    out = workdir / f"edited_{tag}.vint"
    env = dict(os.environ)
    for var in _THREAD_VARS:
        env[var] = threads
    cmd = [
        sys.executable,
        "-m",
        "latentcut.cli",
        "edit",
        "--config",
        str(workdir / "run.json"),
        "--source",
        str(workdir / "source.vint"),
        "--out",
        str(out),
    ]
    proc = subprocess.run(cmd, env=env, capture_output=True, text=True, timeout=300)
    if proc.returncode != 0:
        raise RuntimeError(f"edit subprocess failed: {proc.stderr.strip()}")
    return out.read_bytes()


def check_determinism() -> CheckResult:
    """Identical runs produce identical bytes, whatever the thread settings."""
    _, config, deps, video = _canonical_pieces()
    first = run_edit(video, config, deps)
    _, config2, deps2, _ = _canonical_pieces()
    second = run_edit(video, config2, deps2)
    if first.frames.tobytes() != second.frames.tobytes():
        return ("determinism", False, "two in-process runs differ")

    with tempfile.TemporaryDirectory(prefix="latentcut_det_") as tmp:
        workdir = Path(tmp)
        (workdir / "run.json").write_text(json.dumps(canonical_run_spec()))
        write_container(workdir / "source.vint", video, "video")
        blobs = [
            _run_edit_subprocess(workdir, "t1", "1"),
            _run_edit_subprocess(workdir, "t4", "4"),
        ]
    if blobs[0] != blobs[1]:
        return ("determinism", False, "outputs differ across thread counts")
    digest = hashlib.sha256(blobs[0]).hexdigest()[:16]
    return ("determinism", True, f"byte-identical (sha256 {digest}…)")


def check_runtime() -> CheckResult:
    """A 16-frame, 4-channel, 64x64 edit finishes fast on one core."""
    spec = ScenarioSpec(
        frames=16,
        height=64,
        width=64,
        channels=4,
        background=(0.15, 0.2, 0.3, 0.25),
        source=ObjectSpec(
            shape="square",
            color=(0.85, 0.15, 0.1, 0.9),
            size=6.0,
            start=(24.0, 32.0),
            velocity=(1.0, 0.0),
        ),
        target=ObjectSpec(shape="circle", color=(0.1, 0.75, 0.2, 0.9), size=8.0),
    )
    video, _ = synth_video(spec)
    provider = HashEmbedder()
    config = EditConfig(
        source_object={"color": list(spec.source.color)},
        target_object={"color": list(spec.target.color)},
        ref_image={"kind": "object", "shape": "circle", "color": list(spec.target.color)},
        text="replace the square with a circle",
    )
    cond = condition_from_config(config, provider)
    codec = IdentityCodec()
    deps = EditDeps(
        codec=codec,
        denoiser=scenario_denoiser(spec, codec, cond),
        provider=provider,
        segmenter=ColorSegmenter(tolerance=0.3),
    )
    started = time.perf_counter()
    run_edit(video, config, deps)
    elapsed = time.perf_counter() - started
    return ("desk-scale runtime", elapsed < 10.0, f"16x4x64x64, nu=50: {elapsed:.2f}s")


ALL_CHECKS = (
    check_dilation_oracle,
    check_sampling_inverse,
    check_grid_refinement,
    check_background_preservation,
    check_object_replacement,
    check_start_level_trend,
    check_guidance_norm,
    check_determinism,
    check_runtime,
)


def run_all(verbose: bool = False) -> list[CheckResult]:
    """Run every check; never raises, failures come back as results."""
    results: list[CheckResult] = []
    for i, check in enumerate(ALL_CHECKS, start=1):
        try:
            name, ok, detail = check()
        except Exception as exc:  # a crashed check is a failed check
            name, ok, detail = check.__name__, False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, ok, detail))
        if verbose:
            status = "PASS" if ok else "FAIL"
            print(f"[{i}/{len(ALL_CHECKS)}] {name}: {status} ({detail})")
    return results
