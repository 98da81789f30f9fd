"""Deterministic reduced-grid sampling and inversion.

One step of deterministic sampling reconstructs the clean-latent estimate
from the noise prediction and re-noises it to the next (coarser) level along
the same direction; inversion runs the identical move upward, evaluating the
prediction at the already-known latent (first-order approximation).  Both
directions share one kernel, so step and invert_step are exact mutual
inverses up to floating-point rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .denoise import Denoiser, conditioned_eps
from .errors import ConfigError, ShapeMismatchError
from .guidance import ConditionSet
from .schedule import NoiseSchedule, TimestepPlan
from .tensors import SeedStream, as_latent, gaussian

__all__ = [
    "InversionTrajectory",
    "ddim_invert_step",
    "ddim_step",
    "denoise_trajectory",
    "forward_noise",
    "invert_trajectory",
]


def forward_noise(
    z0: np.ndarray, t: int, schedule: NoiseSchedule, stream: SeedStream
) -> np.ndarray:
    """Noise a clean latent to step t: sqrt(ab)*z0 + sqrt(1-ab)*eps."""
    z = as_latent(z0, name="z0")
    if not isinstance(t, int) or not 0 <= t <= schedule.steps:
        raise ConfigError(f"forward_noise: step {t!r} outside 0..{schedule.steps}")
    ab = float(schedule.alpha_bar[t])
    eps = gaussian(z.shape, stream)
    return _kernels.lincomb(math.sqrt(ab), z, math.sqrt(1.0 - ab), eps)


def _check_pair(z, eps_hat, abar_a: float, abar_b: float):
    z = as_latent(z, name="latent")
    e = as_latent(eps_hat, name="eps_hat")
    if z.shape != e.shape:
        raise ShapeMismatchError(f"sampler: latent {z.shape} vs eps_hat {e.shape}")
    for name, ab in (("from", abar_a), ("to", abar_b)):
        if not 0.0 < ab <= 1.0:
            raise ConfigError(f"sampler: alpha_bar ({name}) must lie in (0, 1], got {ab}")
    return z, e


def ddim_step(z_t, eps_hat, abar_t: float, abar_prev: float) -> np.ndarray:
    """One deterministic denoising move from level abar_t to abar_prev."""
    z, e = _check_pair(z_t, eps_hat, abar_t, abar_prev)
    return _kernels.retime(z, e, abar_t, abar_prev)


def ddim_invert_step(z_prev, eps_hat, abar_t: float, abar_prev: float) -> np.ndarray:
    """Inverse of ddim_step: move from level abar_prev back up to abar_t."""
    z, e = _check_pair(z_prev, eps_hat, abar_prev, abar_t)
    return _kernels.retime(z, e, abar_prev, abar_t)


@dataclass(frozen=True)
class InversionTrajectory:
    """Latents along a plan grid; latents[i] sits at grid index i.

    Index 0 holds the clean latent the inversion started from.
    """

    latents: tuple[np.ndarray, ...]
    plan: TimestepPlan

    def __post_init__(self):
        if len(self.latents) < 1 or len(self.latents) > self.plan.nu + 1:
            raise ConfigError(
                f"trajectory: {len(self.latents)} latents does not fit grid 0..{self.plan.nu}"
            )

    def __len__(self) -> int:
        return len(self.latents)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.latents[i]

    @property
    def top_index(self) -> int:
        """Highest grid index the trajectory covers."""
        return len(self.latents) - 1


def invert_trajectory(
    z0: np.ndarray,
    schedule: NoiseSchedule,
    plan: TimestepPlan,
    denoiser: Denoiser,
    cond: ConditionSet,
    up_to: int | None = None,
    *,
    conditioned: bool = False,
) -> InversionTrajectory:
    """Estimate the noising path of a clean latent along the plan grid.

    Each move evaluates the noise prediction at the already-known latent and
    at the move's destination step.  By default the positive condition is
    used without guidance mixing; conditioned=True applies the full
    guided combination instead.
    """
    z = as_latent(z0, name="z0")
    top = plan.nu if up_to is None else up_to
    if not isinstance(top, int) or not 0 <= top <= plan.nu:
        raise ConfigError(f"invert_trajectory: up_to {up_to!r} outside 0..{plan.nu}")
    latents = [z]
    for i in range(1, top + 1):
        t = plan.step_at(i)
        if conditioned:
            eps = conditioned_eps(denoiser, z, t, cond, schedule)
        else:
            eps = denoiser.predict_eps(z, t, cond.positive_key, schedule)
        z = _kernels.retime(
            z, eps, plan.level_at(schedule, i - 1), plan.level_at(schedule, i)
        )
        latents.append(z)
    return InversionTrajectory(latents=tuple(latents), plan=plan)


def denoise_trajectory(
    z_start: np.ndarray,
    start_index: int,
    schedule: NoiseSchedule,
    plan: TimestepPlan,
    denoiser: Denoiser,
    cond: ConditionSet,
    per_step_blend=None,
) -> np.ndarray:
    """Run guided sampling from grid index start_index down to clean.

    After every move the latent sits at grid index i (start_index-1 .. 0);
    when given, per_step_blend(i, z) post-processes it there, including the
    final move onto index 0.  Returns the latent at index 0.
    """
    z = as_latent(z_start, name="z_start")
    if not isinstance(start_index, int) or not 0 <= start_index <= plan.nu:
        raise ConfigError(
            f"denoise_trajectory: start_index {start_index!r} outside 0..{plan.nu}"
        )
    for i in range(start_index, 0, -1):
        t = plan.step_at(i)
        eps = conditioned_eps(denoiser, z, t, cond, schedule)
        z = _kernels.retime(
            z, eps, plan.level_at(schedule, i), plan.level_at(schedule, i - 1)
        )
        if per_step_blend is not None:
            z = as_latent(per_step_blend(i - 1, z), name="per_step_blend result")
    return z
