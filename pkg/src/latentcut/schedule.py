"""Noise schedules and reduced timestep plans.

A schedule of length T defines the signal retention curve alpha_bar, the
cumulative product of (1 - beta_t) with alpha_bar[0] = 1.  A plan picks nu
grid points tau_1 < ... < tau_nu out of 1..T (tau_nu = T) plus the grid
index rho where partial-noise sampling starts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError
from .tensors import SeedStream, as_latent, gaussian

__all__ = [
    "DEFAULT_BETA_END",
    "DEFAULT_BETA_START",
    "DEFAULT_STEPS",
    "LINEAR",
    "SQRT_LINEAR",
    "NoiseSchedule",
    "TimestepPlan",
    "linear_schedule",
    "make_plan",
    "rho_start_latent",
]

DEFAULT_STEPS = 1000
DEFAULT_BETA_START = 0.00085
DEFAULT_BETA_END = 0.012

SQRT_LINEAR = "sqrt_linear"
LINEAR = "linear"
SPACINGS = (SQRT_LINEAR, LINEAR)


@dataclass(frozen=True)
class NoiseSchedule:
    """Forward-noising schedule.

    betas[t-1] is the variance added at step t (1-based); alpha_bar[t] is
    the product of (1 - beta_s) for s <= t, so alpha_bar has length T+1 and
    alpha_bar[0] == 1.
    """

    betas: np.ndarray
    alpha_bar: np.ndarray
    spacing: str = "explicit"

    def __post_init__(self):
        b = self.betas
        ab = self.alpha_bar
        if b.ndim != 1 or len(b) < 1:
            raise ConfigError("schedule: betas must be a non-empty 1-D array")
        if len(ab) != len(b) + 1:
            raise ConfigError("schedule: alpha_bar must have length T+1")
        if ab[0] != 1.0:
            raise ConfigError("schedule: alpha_bar[0] must be exactly 1")
        if not ((b > 0.0) & (b < 1.0)).all():
            raise ConfigError("schedule: betas must lie strictly inside (0, 1)")
        if not ((ab[1:] > 0.0) & (ab[1:] < 1.0)).all():
            raise ConfigError("schedule: alpha_bar must stay strictly inside (0, 1)")
        if not (np.diff(ab) < 0.0).all():
            raise ConfigError("schedule: alpha_bar must strictly decrease")

    @property
    def steps(self) -> int:
        """The full schedule length T."""
        return len(self.betas)

    @classmethod
    def from_betas(cls, betas, spacing: str = "explicit") -> "NoiseSchedule":
        b = np.asarray(betas, dtype=np.float64).copy()
        ab = np.empty(len(b) + 1, dtype=np.float64)
        ab[0] = 1.0
        np.cumprod(1.0 - b, out=ab[1:])
        b.setflags(write=False)
        ab.setflags(write=False)
        return cls(betas=b, alpha_bar=ab, spacing=spacing)


def linear_schedule(
    steps: int = DEFAULT_STEPS,
    beta_start: float = DEFAULT_BETA_START,
    beta_end: float = DEFAULT_BETA_END,
    spacing: str = SQRT_LINEAR,
) -> NoiseSchedule:
    """Build a schedule with betas spaced linearly (optionally in sqrt space)."""
    if not isinstance(steps, int) or steps < 1:
        raise ConfigError(f"schedule: steps must be a positive integer, got {steps!r}")
    if not 0.0 < beta_start <= beta_end < 1.0:
        raise ConfigError(
            f"schedule: need 0 < beta_start <= beta_end < 1, got {beta_start}, {beta_end}"
        )
    if spacing == SQRT_LINEAR:
        betas = np.linspace(math.sqrt(beta_start), math.sqrt(beta_end), steps) ** 2
    elif spacing == LINEAR:
        betas = np.linspace(beta_start, beta_end, steps)
    else:
        raise ConfigError(f"schedule: unknown spacing {spacing!r}, expected one of {SPACINGS}")
    return NoiseSchedule.from_betas(betas, spacing=spacing)


@dataclass(frozen=True)
class TimestepPlan:
    """A reduced sampling grid over a full schedule.

    tau[i-1] holds the schedule step of grid index i (grid index 0 is the
    clean level, step 0).  rho is the grid index where partial-noise
    sampling starts.
    """

    tau: tuple[int, ...]
    rho: int
    total_steps: int

    def __post_init__(self):
        if len(self.tau) < 1:
            raise ConfigError("plan: tau must be non-empty")
        if any(t2 <= t1 for t1, t2 in zip(self.tau, self.tau[1:])):
            raise ConfigError(f"plan: tau must strictly increase, got {self.tau}")
        if self.tau[0] < 1 or self.tau[-1] != self.total_steps:
            raise ConfigError(
                f"plan: tau must lie in 1..{self.total_steps} and end at {self.total_steps}"
            )
        if not 1 <= self.rho <= len(self.tau):
            raise ConfigError(f"plan: rho must lie in 1..{len(self.tau)}, got {self.rho}")

    @property
    def nu(self) -> int:
        """Number of grid points (excluding the clean level)."""
        return len(self.tau)

    def step_at(self, i: int) -> int:
        """Schedule step of grid index i; index 0 is the clean level."""
        if not 0 <= i <= self.nu:
            raise ConfigError(f"plan: grid index {i} outside 0..{self.nu}")
        return 0 if i == 0 else self.tau[i - 1]

    def level_at(self, schedule: NoiseSchedule, i: int) -> float:
        """alpha_bar at grid index i."""
        return float(schedule.alpha_bar[self.step_at(i)])


def make_plan(schedule: NoiseSchedule, nu: int, rho: int) -> TimestepPlan:
    """Spread nu grid points evenly over the schedule: tau_i = round(i*T/nu).

    Rounding is half-up, computed in exact integer arithmetic; the result is
    strictly increasing for any nu <= T.
    """
    total = schedule.steps
    if not isinstance(nu, int) or not 1 <= nu <= total:
        raise ConfigError(f"plan: nu must lie in 1..{total}, got {nu!r}")
    if not isinstance(rho, int) or not 1 <= rho <= nu:
        raise ConfigError(f"plan: rho must lie in 1..{nu}, got {rho!r}")
    tau = tuple((2 * i * total + nu) // (2 * nu) for i in range(1, nu + 1))
    return TimestepPlan(tau=tau, rho=rho, total_steps=total)


def rho_start_latent(
    z0: np.ndarray,
    schedule: NoiseSchedule,
    plan: TimestepPlan,
    stream: SeedStream,
) -> np.ndarray:
    """Jump a clean latent to the plan's start level with fresh noise.

    Returns sqrt(ab)*z0 + sqrt(1-ab)*eta at ab = alpha_bar[tau_rho], with
    eta drawn from ``stream``.
    """
    z = as_latent(z0, name="z0")
    ab = plan.level_at(schedule, plan.rho)
    eta = gaussian(z.shape, stream)
    return _kernels.lincomb(math.sqrt(ab), z, math.sqrt(1.0 - ab), eta)
