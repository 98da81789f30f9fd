"""Synthetic moving-object scenes and run assembly from declarative specs.

A scenario is a flat-colored background with one flat-colored object
(square or circle) moving on a linear path.  The canonical scene swaps a
moving square for a circle whose radius exceeds the dilated square mask on
the axes, so the refinement stage's mask union genuinely adds coverage.

This module also turns JSON-style dicts (the CLI config format) into the
concrete objects a run needs: scenario, edit config, codec, denoiser,
embedder, and segmenter.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .codec import Codec, IdentityCodec, LinearCodec
from .denoise import Denoiser, ConstantDenoiser, GaussianComponent, GmmDenoiser
from .errors import ConfigError
from .guidance import ConditionSet, EmbeddingProvider, HashEmbedder
from .masking import ColorSegmenter, Segmenter
from .pipeline import EditConfig, EditDeps, condition_from_config

__all__ = [
    "ObjectSpec",
    "ScenarioSpec",
    "assemble_run",
    "canonical_run_spec",
    "canonical_scenario",
    "render_reference",
    "scenario_denoiser",
    "scenario_from_dict",
    "synth_video",
]

ALLOWED_FRAMES = (8, 16)
SHAPES = ("square", "circle")

DEFAULT_SIGMA_POS = 0.2
DEFAULT_SIGMA_NEG = 100.0


@dataclass(frozen=True)
class ObjectSpec:
    """A flat-colored square or circle on a linear motion path.

    size is the half-width for squares and the radius for circles, in
    pixels; start is the (x, y) center at frame 0 and velocity the per-frame
    (dx, dy) increment.
    """

    shape: str
    color: tuple[float, ...]
    size: float
    start: tuple[float, float] = (0.0, 0.0)
    velocity: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "color", tuple(float(c) for c in self.color))
        object.__setattr__(self, "start", tuple(float(v) for v in self.start))
        object.__setattr__(self, "velocity", tuple(float(v) for v in self.velocity))
        if self.shape not in SHAPES:
            raise ConfigError(f"object shape must be one of {SHAPES}, got {self.shape!r}")
        if not self.size > 0.0:
            raise ConfigError(f"object size must be positive, got {self.size}")
        if len(self.start) != 2 or len(self.velocity) != 2:
            raise ConfigError("object start/velocity must be (x, y) pairs")
        if any(not 0.0 <= c <= 1.0 for c in self.color):
            raise ConfigError(f"object color channels must lie in [0, 1], got {self.color}")

    def center(self, frame: int) -> tuple[float, float]:
        return (
            self.start[0] + frame * self.velocity[0],
            self.start[1] + frame * self.velocity[1],
        )

    def support(self, frame: int, height: int, width: int) -> np.ndarray:
        """Boolean (H, W) map of pixels the object covers in this frame."""
        cx, cy = self.center(frame)
        ys = np.arange(height, dtype=np.float64)[:, None]
        xs = np.arange(width, dtype=np.float64)[None, :]
        if self.shape == "square":
            return (np.abs(xs - cx) <= self.size) & (np.abs(ys - cy) <= self.size)
        return (xs - cx) ** 2 + (ys - cy) ** 2 <= self.size**2


@dataclass(frozen=True)
class ScenarioSpec:
    """One synthetic scene: a moving source object and its replacement."""

    frames: int = 8
    height: int = 48
    width: int = 48
    channels: int = 3
    background: tuple[float, ...] = (0.15, 0.2, 0.3)
    source: ObjectSpec = field(
        default_factory=lambda: ObjectSpec(
            shape="square",
            color=(0.85, 0.15, 0.1),
            size=5.0,
            start=(20.0, 24.0),
            velocity=(1.0, 0.0),
        )
    )
    target: ObjectSpec = field(
        default_factory=lambda: ObjectSpec(shape="circle", color=(0.1, 0.75, 0.2), size=7.0)
    )

    def __post_init__(self):
        object.__setattr__(self, "background", tuple(float(c) for c in self.background))
        if self.frames not in ALLOWED_FRAMES:
            raise ConfigError(f"scenario frames must be one of {ALLOWED_FRAMES}, got {self.frames}")
        if self.height < 1 or self.width < 1 or self.channels < 1:
            raise ConfigError("scenario height/width/channels must be positive")
        if len(self.background) != self.channels:
            raise ConfigError(
                f"background has {len(self.background)} channels, scenario has {self.channels}"
            )
        if any(not 0.0 <= c <= 1.0 for c in self.background):
            raise ConfigError(f"background channels must lie in [0, 1], got {self.background}")
        for name, obj in (("source", self.source), ("target", self.target)):
            if len(obj.color) != self.channels:
                raise ConfigError(
                    f"{name} color has {len(obj.color)} channels, scenario has {self.channels}"
                )
        # The target is rendered along the source path; both must stay in frame.
        for frame in range(self.frames):
            cx, cy = self.source.center(frame)
            for name, size in (("source", self.source.size), ("target", self.target.size)):
                if (
                    cx - size < 0.0
                    or cx + size > self.width - 1
                    or cy - size < 0.0
                    or cy + size > self.height - 1
                ):
                    raise ConfigError(
                        f"{name} object leaves the frame at frame {frame} "
                        f"(center ({cx}, {cy}), size {size})"
                    )


def _render(spec: ScenarioSpec, obj: ObjectSpec) -> tuple[np.ndarray, np.ndarray]:
    video = np.empty((spec.frames, spec.channels, spec.height, spec.width), dtype=np.float64)
    video[:] = np.asarray(spec.background, dtype=np.float64)[None, :, None, None]
    mask = np.zeros((spec.frames, 1, spec.height, spec.width), dtype=np.float64)
    color = np.asarray(obj.color, dtype=np.float64)
    for f in range(spec.frames):
        inside = obj.support(f, spec.height, spec.width)
        mask[f, 0][inside] = 1.0
        for c in range(spec.channels):
            video[f, c][inside] = color[c]
    return video, mask


def synth_video(spec: ScenarioSpec) -> tuple[np.ndarray, np.ndarray]:
    """Render the scene; returns (video, exact source-object support mask)."""
    return _render(spec, spec.source)


def render_reference(spec: ScenarioSpec) -> np.ndarray:
    """The target object rendered along the source's motion path."""
    target_on_path = ObjectSpec(
        shape=spec.target.shape,
        color=spec.target.color,
        size=spec.target.size,
        start=spec.source.start,
        velocity=spec.source.velocity,
    )
    video, _ = _render(spec, target_on_path)
    return video


def canonical_scenario() -> ScenarioSpec:
    """The square-to-circle demo scene used by tests and docs."""
    return ScenarioSpec()


def scenario_denoiser(
    spec: ScenarioSpec,
    codec: Codec,
    cond: ConditionSet,
    sigma_pos: float = DEFAULT_SIGMA_POS,
    sigma_neg: float = DEFAULT_SIGMA_NEG,
) -> GmmDenoiser:
    """Analytic predictor for the scene, keyed to a condition set.

    The positive condition pulls toward the encoded reference render (tight
    component), the negative condition models the encoded source video with
    a broad component, so guided extrapolation stays near the reference.
    """
    source, _ = synth_video(spec)
    reference = render_reference(spec)
    return GmmDenoiser(
        {
            cond.positive_key: [
                GaussianComponent(mean=codec.encode(reference), var=sigma_pos)
            ],
            cond.negative_key: [
                GaussianComponent(mean=codec.encode(source), var=sigma_neg)
            ],
        }
    )


# ---------------------------------------------------------------------------
# Declarative run assembly (the CLI config format)
# ---------------------------------------------------------------------------


def _object_from_dict(d: dict, what: str) -> ObjectSpec:
    if not isinstance(d, dict):
        raise ConfigError(f"{what}: expected an object spec dict, got {d!r}")
    try:
        return ObjectSpec(
            shape=d["shape"],
            color=tuple(d["color"]),
            size=float(d["size"]),
            start=tuple(d.get("start", (0.0, 0.0))),
            velocity=tuple(d.get("velocity", (0.0, 0.0))),
        )
    except KeyError as exc:
        raise ConfigError(f"{what}: missing field {exc.args[0]!r}") from None


def scenario_from_dict(d: dict) -> ScenarioSpec:
    if not isinstance(d, dict):
        raise ConfigError(f"scenario: expected a dict, got {d!r}")
    known = {"frames", "height", "width", "channels", "background", "source", "target"}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"scenario: unknown fields {sorted(unknown)}")
    kwargs: dict[str, Any] = {}
    for name in ("frames", "height", "width", "channels"):
        if name in d:
            kwargs[name] = int(d[name])
    if "background" in d:
        kwargs["background"] = tuple(d["background"])
    if "source" in d:
        kwargs["source"] = _object_from_dict(d["source"], "scenario.source")
    if "target" in d:
        kwargs["target"] = _object_from_dict(d["target"], "scenario.target")
    return ScenarioSpec(**kwargs)


def _codec_from_dict(d: dict) -> Codec:
    kind = d.get("kind", "identity")
    if kind == "identity":
        return IdentityCodec()
    if kind == "linear":
        return LinearCodec(channels=int(d.get("channels", 3)), seed=int(d.get("seed", 0)))
    raise ConfigError(f"codec: unknown kind {kind!r}")


def _provider_from_dict(d: dict) -> EmbeddingProvider:
    kind = d.get("kind", "hash")
    if kind == "hash":
        return HashEmbedder(dim=int(d.get("dim", 64)), seed=int(d.get("seed", 0)))
    raise ConfigError(f"provider: unknown kind {kind!r}")


def _segmenter_from_dict(d: dict) -> Segmenter:
    kind = d.get("kind", "color")
    if kind == "color":
        return ColorSegmenter(tolerance=float(d.get("tolerance", 0.3)))
    raise ConfigError(f"segmenter: unknown kind {kind!r}")


def _denoiser_from_dict(
    d: dict, spec: ScenarioSpec | None, codec: Codec, cond: ConditionSet
) -> Denoiser:
    kind = d.get("kind", "scenario_gmm")
    if kind == "constant":
        return ConstantDenoiser(value=float(d.get("value", 0.0)))
    if kind == "scenario_gmm":
        if spec is None:
            raise ConfigError("denoiser: scenario_gmm needs a scenario section")
        return scenario_denoiser(
            spec,
            codec,
            cond,
            sigma_pos=float(d.get("sigma_pos", DEFAULT_SIGMA_POS)),
            sigma_neg=float(d.get("sigma_neg", DEFAULT_SIGMA_NEG)),
        )
    raise ConfigError(f"denoiser: unknown kind {kind!r}")


def _edit_config_from_dict(d: dict, spec: ScenarioSpec | None) -> EditConfig:
    if not isinstance(d, dict):
        raise ConfigError(f"edit: expected a dict, got {d!r}")
    allowed = {f.name for f in EditConfig.__dataclass_fields__.values()}
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"edit: unknown fields {sorted(unknown)}")
    kwargs = dict(d)
    if spec is not None:
        kwargs.setdefault("source_object", {"color": list(spec.source.color)})
        kwargs.setdefault("target_object", {"color": list(spec.target.color)})
        kwargs.setdefault(
            "ref_image",
            {
                "kind": "object",
                "shape": spec.target.shape,
                "color": list(spec.target.color),
                "size": spec.target.size,
            },
        )
    for name in ("source_object", "target_object", "ref_image"):
        if kwargs.get(name) is None:
            raise ConfigError(f"edit: {name} is required (directly or via a scenario)")
    if "k_rough" not in kwargs or kwargs["k_rough"] is None:
        kwargs["k_rough"] = None
    try:
        return EditConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"edit: {exc}") from None


def assemble_run(run_spec: dict) -> tuple[ScenarioSpec | None, EditConfig, EditDeps]:
    """Turn a run-spec dict (the CLI config format) into runnable objects.

    Top-level sections: "edit" (EditConfig fields), optional "scenario",
    and optional "codec" / "denoiser" / "provider" / "segmenter" selections.
    """
    if not isinstance(run_spec, dict):
        raise ConfigError(f"run spec: expected a dict, got {run_spec!r}")
    known = {"edit", "scenario", "codec", "denoiser", "provider", "segmenter"}
    unknown = set(run_spec) - known
    if unknown:
        raise ConfigError(f"run spec: unknown sections {sorted(unknown)}")
    spec = scenario_from_dict(run_spec["scenario"]) if "scenario" in run_spec else None
    config = _edit_config_from_dict(run_spec.get("edit", {}), spec)
    provider = _provider_from_dict(run_spec.get("provider", {}))
    codec = _codec_from_dict(run_spec.get("codec", {}))
    cond = condition_from_config(config, provider)
    denoiser = _denoiser_from_dict(run_spec.get("denoiser", {}), spec, codec, cond)
    segmenter = _segmenter_from_dict(run_spec.get("segmenter", {}))
    deps = EditDeps(codec=codec, denoiser=denoiser, provider=provider, segmenter=segmenter)
    return spec, config, deps


def canonical_run_spec() -> dict:
    """The full square-to-circle run spec (JSON-serializable)."""
    spec = canonical_scenario()
    return {
        "scenario": {
            "frames": spec.frames,
            "height": spec.height,
            "width": spec.width,
            "channels": spec.channels,
            "background": list(spec.background),
            "source": _object_dict(spec.source),
            "target": _object_dict(spec.target),
        },
        "edit": {
            "text": "replace the moving square with a circle",
            "negative_text": "",
            "nu": 50,
            "rho_stage1": 20,
            "rho_stage2": 20,
            "k": 3,
            "gamma": 0.5,
            "w": 6.0,
            "seed": 1234,
        },
        "codec": {"kind": "identity"},
        "denoiser": {
            "kind": "scenario_gmm",
            "sigma_pos": DEFAULT_SIGMA_POS,
            "sigma_neg": DEFAULT_SIGMA_NEG,
        },
        "provider": {"kind": "hash", "dim": 64, "seed": 0},
        "segmenter": {"kind": "color", "tolerance": 0.3},
    }


def _object_dict(obj: ObjectSpec) -> dict:
    d = asdict(obj)
    d["color"] = list(obj.color)
    d["start"] = list(obj.start)
    d["velocity"] = list(obj.velocity)
    return d
