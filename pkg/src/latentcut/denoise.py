"""Noise predictors: the pluggable interface plus analytic stand-ins.

A denoiser estimates the standard-normal noise component of a latent at a
given schedule step, optionally conditioned on a key from a ConditionSet.
The in-repo implementations are exact: ConstantDenoiser returns a fixed
fill, GmmDenoiser computes the closed-form posterior-mean prediction when
clean latents follow a per-key Gaussian mixture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence, runtime_checkable

import numpy as np

from .errors import (
    ConfigError,
    DegenerateScheduleError,
    ShapeMismatchError,
    UnknownConditionError,
)
from .guidance import ConditionSet, cfg_combine
from .schedule import NoiseSchedule
from .tensors import as_latent

__all__ = [
    "ConstantDenoiser",
    "Denoiser",
    "GaussianComponent",
    "GmmDenoiser",
    "conditioned_eps",
]

CondKey = tuple[str, str]


@runtime_checkable
class Denoiser(Protocol):
    """Predicts the noise component of a latent at a schedule step."""

    def predict_eps(
        self, z_t: np.ndarray, t: int, cond_key, schedule: NoiseSchedule
    ) -> np.ndarray: ...


def _check_step(t: int, schedule: NoiseSchedule) -> float:
    """Validate 0 <= t <= T, require noise to be present, return alpha_bar[t]."""
    if not isinstance(t, int) or not 0 <= t <= schedule.steps:
        raise ConfigError(f"denoiser: step {t!r} outside 0..{schedule.steps}")
    ab = float(schedule.alpha_bar[t])
    if ab >= 1.0:
        raise DegenerateScheduleError(
            f"denoiser: noise prediction is undefined at step {t} (no noise present)"
        )
    return ab


@dataclass(frozen=True)
class ConstantDenoiser:
    """Predicts the same value everywhere; ignores conditioning.

    Useful as an exactly invertible reference: sampling and inversion with a
    constant prediction are mutually inverse affine maps.
    """

    value: float = 0.0

    def predict_eps(self, z_t, t, cond_key, schedule) -> np.ndarray:
        z = as_latent(z_t, name="z_t")
        _check_step(t, schedule)
        return np.full_like(z, self.value)


@dataclass(frozen=True)
class GaussianComponent:
    """One isotropic Gaussian over clean latents."""

    mean: np.ndarray
    weight: float = 1.0
    var: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "mean", as_latent(self.mean, name="component mean"))
        if not self.weight > 0.0:
            raise ConfigError(f"component weight must be > 0, got {self.weight}")
        if self.var < 0.0:
            raise ConfigError(f"component variance must be >= 0, got {self.var}")


class GmmDenoiser:
    """Exact posterior-mean predictor for Gaussian-mixture clean latents.

    For each registered condition key the clean latent is modeled as a
    mixture of isotropic Gaussians.  Noising to level ab keeps the mixture
    Gaussian, so E[z0 | z_t] has a closed form; the prediction returned is
    (z_t - sqrt(ab) * E[z0 | z_t]) / sqrt(1 - ab).

    Keys match exactly; weights are normalized per key at construction.
    """

    def __init__(self, components: Mapping[CondKey, Sequence[GaussianComponent]]):
        if not components:
            raise ConfigError("GmmDenoiser: no condition keys registered")
        table: dict[CondKey, tuple[GaussianComponent, ...]] = {}
        shape = None
        for key, comps in components.items():
            comps = tuple(comps)
            if not comps:
                raise ConfigError(f"GmmDenoiser: key {key!r} has no components")
            total = sum(c.weight for c in comps)
            comps = tuple(
                GaussianComponent(mean=c.mean, weight=c.weight / total, var=c.var)
                for c in comps
            )
            for c in comps:
                if shape is None:
                    shape = c.mean.shape
                elif c.mean.shape != shape:
                    raise ShapeMismatchError(
                        f"GmmDenoiser: component means disagree, {c.mean.shape} vs {shape}"
                    )
            table[key] = comps
        self._components = table
        self._shape = shape

    def components_for(self, cond_key) -> tuple[GaussianComponent, ...]:
        try:
            return self._components[cond_key]
        except (KeyError, TypeError):
            raise UnknownConditionError(
                f"no mixture registered for condition key {cond_key!r}"
            ) from None

    def posterior(
        self, z_t, t: int, cond_key, schedule: NoiseSchedule
    ) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean of the clean latent and component responsibilities."""
        z = as_latent(z_t, name="z_t")
        ab = _check_step(t, schedule)
        if z.shape != self._shape:
            raise ShapeMismatchError(f"GmmDenoiser: latent {z.shape} vs means {self._shape}")
        comps = self.components_for(cond_key)
        sa = math.sqrt(ab)
        n = z.size

        log_resp = np.empty(len(comps))
        posts = []
        for i, comp in enumerate(comps):
            v = ab * comp.var + (1.0 - ab)  # marginal variance of z_t per element
            diff = z - sa * comp.mean
            posts.append(comp.mean + (sa * comp.var / v) * diff)
            log_resp[i] = (
                math.log(comp.weight)
                - float(np.sum(diff * diff)) / (2.0 * v)
                - 0.5 * n * math.log(v)
            )

        log_resp -= log_resp.max()
        resp = np.exp(log_resp)
        resp /= resp.sum()

        post = resp[0] * posts[0]
        for i in range(1, len(comps)):
            post += resp[i] * posts[i]
        return post, resp

    def predict_eps(self, z_t, t, cond_key, schedule) -> np.ndarray:
        z = as_latent(z_t, name="z_t")
        ab = _check_step(t, schedule)
        post, _ = self.posterior(z, t, cond_key, schedule)
        return (z - math.sqrt(ab) * post) / math.sqrt(1.0 - ab)


def conditioned_eps(
    denoiser: Denoiser,
    z_t: np.ndarray,
    t: int,
    cond: ConditionSet,
    schedule: NoiseSchedule,
) -> np.ndarray:
    """Guided prediction: positive/negative predictions mixed with weight w.

    w = 0 short-circuits to the positive prediction (bitwise identical to
    the full combination, and the negative key need not be registered).
    """
    pos = denoiser.predict_eps(z_t, t, cond.positive_key, schedule)
    if cond.w == 0.0:
        return pos
    neg = denoiser.predict_eps(z_t, t, cond.negative_key, schedule)
    return cfg_combine(pos, neg, cond.w)
