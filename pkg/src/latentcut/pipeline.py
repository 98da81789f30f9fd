"""Two-stage masked latent editing.

Stage 1 (rough edit): segment the source object, dilate its mask, invert the
source latents for background reference, then run guided sampling from a
partial-noise start, blending the background trajectory back outside the mask
after every move.  Decoded output has the source pixels pasted back outside
the mask.

Stage 2 (refinement): segment the object the rough edit produced, build the
union of both dilated masks, and run the same masked sampling from the rough
video's latents against the original background trajectory.  Everything
outside the final mask ends bit-exact to the source video.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .codec import Codec
from .denoise import Denoiser
from .errors import ConfigError, EmptyMaskError, ShapeMismatchError
from .guidance import (
    DEFAULT_GAMMA,
    DEFAULT_GUIDANCE_WEIGHT,
    ConditionSet,
    EmbeddingProvider,
    build_condition_set,
)
from .masking import DEFAULT_DILATION, Segmenter, build_final_mask, dilate, shrink_mask
from .sampler import InversionTrajectory, denoise_trajectory, invert_trajectory
from .schedule import (
    DEFAULT_BETA_END,
    DEFAULT_BETA_START,
    DEFAULT_STEPS,
    SQRT_LINEAR,
    NoiseSchedule,
    TimestepPlan,
    linear_schedule,
    make_plan,
    rho_start_latent,
)
from .tensors import SeedStream, as_latent, as_mask, blend

__all__ = [
    "EditConfig",
    "EditDeps",
    "EditResult",
    "StageResult",
    "condition_from_config",
    "paste_rough",
    "run_edit",
    "run_stage",
]


@dataclass(frozen=True)
class EditConfig:
    """Declarative knobs for one two-stage edit run."""

    source_object: Any = None       # descriptor for segmenting the source video
    target_object: Any = None       # descriptor for segmenting the rough edit
    ref_image: Any = None           # reference image descriptor (positive guidance)
    text: str = ""                  # edit text (positive guidance)
    negative_text: str = ""
    nu: int = 50                    # grid points of the reduced plan
    rho_stage1: int = 20            # start index of the rough stage
    rho_stage2: int = 20            # start index of the refinement stage
    k: int = DEFAULT_DILATION       # mask dilation width (odd)
    k_rough: int | None = None      # optional override for the rough-mask dilation
    gamma: float = DEFAULT_GAMMA
    w: float = DEFAULT_GUIDANCE_WEIGHT
    seed: int = 0
    steps: int = DEFAULT_STEPS      # full schedule length
    beta_start: float = DEFAULT_BETA_START
    beta_end: float = DEFAULT_BETA_END
    spacing: str = SQRT_LINEAR
    scale_negative_text: bool = False
    conditioned_inversion: bool = False

    def __post_init__(self):
        if not isinstance(self.nu, int) or self.nu < 1:
            raise ConfigError(f"edit: nu must be a positive integer, got {self.nu!r}")
        for name, rho in (("rho_stage1", self.rho_stage1), ("rho_stage2", self.rho_stage2)):
            if not isinstance(rho, int) or not 1 <= rho <= self.nu:
                raise ConfigError(f"edit: {name} must lie in 1..{self.nu}, got {rho!r}")
        for name, k in (("k", self.k), ("k_rough", self.k_rough)):
            if k is None:
                continue
            if not isinstance(k, int) or k < 1 or k % 2 == 0:
                raise ConfigError(f"edit: {name} must be an odd positive integer, got {k!r}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"edit: gamma must lie in [0, 1], got {self.gamma!r}")
        if self.w < 0.0:
            raise ConfigError(f"edit: w must be >= 0, got {self.w!r}")
        if self.nu > self.steps:
            raise ConfigError(f"edit: nu {self.nu} exceeds schedule length {self.steps}")

    def schedule(self) -> NoiseSchedule:
        return linear_schedule(self.steps, self.beta_start, self.beta_end, self.spacing)


@dataclass(frozen=True)
class EditDeps:
    """Pluggable components an edit runs with."""

    codec: Codec
    denoiser: Denoiser
    provider: EmbeddingProvider
    segmenter: Segmenter


@dataclass(frozen=True)
class StageResult:
    """Output of one masked sampling stage."""

    latent: np.ndarray                  # latent at grid index 0
    frames: np.ndarray                  # decoded pixels (before any paste-back)
    mask: np.ndarray                    # latent-space mask the stage blended with
    trajectory: InversionTrajectory     # background path consumed


@dataclass(frozen=True)
class EditResult:
    """Everything a two-stage run produces."""

    frames: np.ndarray          # final edited video
    rough_frames: np.ndarray    # stage-1 video after source paste-back
    stage1: StageResult
    stage2: StageResult
    source_mask: np.ndarray     # raw source segmentation
    rough_mask: np.ndarray      # raw rough-edit segmentation
    final_mask: np.ndarray      # union of dilated masks (pixel space)


def condition_from_config(config: EditConfig, provider: EmbeddingProvider) -> ConditionSet:
    """The guidance conditions an edit run will use (deterministic per config)."""
    return build_condition_set(
        provider,
        config.ref_image,
        config.text,
        config.negative_text,
        gamma=config.gamma,
        w=config.w,
        scale_negative_text=config.scale_negative_text,
    )


def paste_rough(rough_frames, source_frames, mask) -> np.ndarray:
    """Copy source pixels back everywhere the mask is zero."""
    return blend(rough_frames, source_frames, mask)


def run_stage(
    z0_init: np.ndarray,
    source_traj: InversionTrajectory,
    mask: np.ndarray,
    plan: TimestepPlan,
    schedule: NoiseSchedule,
    cond: ConditionSet,
    deps: EditDeps,
    stream: SeedStream,
) -> StageResult:
    """One masked sampling pass from the plan's start level down to clean.

    z0_init seeds the partial-noise start; source_traj supplies the
    background latents blended back after every move (so the final latent
    equals the background bit-exactly wherever the mask is zero).
    """
    z0 = as_latent(z0_init, name="z0_init")
    m = as_mask(mask)
    if source_traj.top_index < plan.rho:
        raise ConfigError(
            f"run_stage: trajectory covers 0..{source_traj.top_index}, plan starts at {plan.rho}"
        )
    if source_traj[0].shape != z0.shape:
        raise ShapeMismatchError(
            f"run_stage: trajectory latents {source_traj[0].shape} vs z0 {z0.shape}"
        )

    z_start = rho_start_latent(z0, schedule, plan, stream)

    def blend_back(i: int, z_fg: np.ndarray) -> np.ndarray:
        return blend(z_fg, source_traj[i], m)

    z_out = denoise_trajectory(
        z_start, plan.rho, schedule, plan, deps.denoiser, cond, per_step_blend=blend_back
    )
    return StageResult(
        latent=z_out, frames=deps.codec.decode(z_out), mask=m, trajectory=source_traj
    )


def _segment_or_raise(segmenter: Segmenter, video, descriptor, what: str) -> np.ndarray:
    mask = as_mask(segmenter.segment(video, descriptor), name=f"{what} mask")
    if mask.shape[0] != video.shape[0] or mask.shape[2:] != video.shape[2:]:
        raise ShapeMismatchError(
            f"{what} mask {mask.shape} does not match video {video.shape}"
        )
    if not mask.any():
        raise EmptyMaskError(f"segmentation found no {what} pixels")
    return mask


def run_edit(source_video, config: EditConfig, deps: EditDeps) -> EditResult:
    """Run the full two-stage edit on a source video."""
    video = as_latent(source_video, name="source_video")
    schedule = config.schedule()
    plan1 = make_plan(schedule, config.nu, config.rho_stage1)
    plan2 = make_plan(schedule, config.nu, config.rho_stage2)
    cond = condition_from_config(config, deps.provider)
    scale = deps.codec.scale

    source_mask = _segment_or_raise(deps.segmenter, video, config.source_object, "source object")
    stage1_mask = dilate(source_mask, config.k)

    z0 = deps.codec.encode(video)
    traj = invert_trajectory(
        z0, schedule, plan1, deps.denoiser, cond,
        up_to=config.nu, conditioned=config.conditioned_inversion,
    )
    stage1 = run_stage(
        z0, traj, shrink_mask(stage1_mask, scale), plan1, schedule, cond, deps,
        SeedStream(config.seed, "stage1/eta"),
    )
    rough = paste_rough(stage1.frames, video, stage1_mask)

    rough_mask = _segment_or_raise(deps.segmenter, rough, config.target_object, "edited object")
    final_mask = build_final_mask(source_mask, rough_mask, config.k, config.k_rough)

    # Both stages share one timestep grid, so the inversion of the source
    # latents above already is the stage-2 background trajectory.
    z0_rough = deps.codec.encode(rough)
    stage2 = run_stage(
        z0_rough, traj, shrink_mask(final_mask, scale), plan2, schedule, cond, deps,
        SeedStream(config.seed, "stage2/eta"),
    )

    return EditResult(
        frames=stage2.frames,
        rough_frames=rough,
        stage1=stage1,
        stage2=stage2,
        source_mask=source_mask,
        rough_mask=rough_mask,
        final_mask=final_mask,
    )
