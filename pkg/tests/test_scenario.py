"""Synthetic scene rendering and declarative run assembly."""

from __future__ import annotations

import hashlib

import numpy as np
import pytest

from latentcut import (
    ColorSegmenter,
    GmmDenoiser,
    HashEmbedder,
    build_condition_set,
    IdentityCodec,
    LinearCodec,
    ObjectSpec,
    ScenarioSpec,
    assemble_run,
    canonical_run_spec,
    canonical_scenario,
    render_reference,
    scenario_denoiser,
    scenario_from_dict,
    synth_video,
)
from latentcut.errors import ConfigError
from latentcut.pipeline import condition_from_config

# Frozen fingerprints of the canonical scene (float64 buffer hashes).
CANONICAL_VIDEO_SHA = "6b80a8bb7a202983b13f613cc51a7e2053e6e1852596e1067ed74ee6b8472bd0"
CANONICAL_MASK_SHA = "ddb3a5791a409642e961650861c6980585897bf08b2c81ae0d481a58c67c9d36"


def sha(arr: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(arr).tobytes()).hexdigest()


def test_canonical_video_pinned():
    video, mask = synth_video(canonical_scenario())
    assert video.shape == (8, 3, 48, 48)
    assert mask.shape == (8, 1, 48, 48)
    assert sha(video) == CANONICAL_VIDEO_SHA
    assert sha(mask) == CANONICAL_MASK_SHA


def test_static_object_renders_identical_frames():
    spec = ScenarioSpec(
        source=ObjectSpec(shape="square", color=(0.8, 0.1, 0.1), size=4.0, start=(24, 24)),
    )
    video, mask = synth_video(spec)
    for f in range(1, spec.frames):
        assert np.array_equal(video[f], video[0])
        assert np.array_equal(mask[f], mask[0])


def test_moving_object_advances_one_pixel_per_frame():
    spec = canonical_scenario()
    video, mask = synth_video(spec)
    for f in range(spec.frames):
        ys, xs = np.nonzero(mask[f, 0])
        cx, cy = spec.source.center(f)
        assert xs.mean() == pytest.approx(cx, abs=1e-9)
        assert ys.mean() == pytest.approx(cy, abs=1e-9)
    # Frame f+1 is frame f shifted right by one pixel.
    assert np.array_equal(np.roll(mask[0, 0], 1, axis=1), mask[1, 0])


def test_mask_is_exact_square_support():
    spec = canonical_scenario()
    video, mask = synth_video(spec)
    f = 3
    cx, cy = spec.source.center(f)
    for y in range(spec.height):
        for x in range(0, spec.width, 3):
            inside = abs(x - cx) <= 5.0 and abs(y - cy) <= 5.0
            assert mask[f, 0, y, x] == (1.0 if inside else 0.0)


def test_video_colors_partition():
    spec = canonical_scenario()
    video, mask = synth_video(spec)
    on = mask.astype(bool)[:, 0]
    for c, (obj_c, bg_c) in enumerate(zip(spec.source.color, spec.background)):
        chan = video[:, c]
        assert (chan[on] == obj_c).all()
        assert (chan[~on] == bg_c).all()


def test_circle_support_within_radius():
    obj = ObjectSpec(shape="circle", color=(0.1, 0.75, 0.2), size=7.0, start=(24, 24))
    sup = obj.support(0, 48, 48)
    ys, xs = np.nonzero(sup)
    r2 = (xs - 24.0) ** 2 + (ys - 24.0) ** 2
    assert (r2 <= 49.0).all()
    assert sup[24, 24] and sup[24, 31] and not sup[24, 32]
    # 149 pixels in a radius-7 disc on the integer grid.
    assert sup.sum() == 149


def test_reference_uses_source_motion_path():
    spec = canonical_scenario()
    ref = render_reference(spec)
    # The circle must track the square's path, not the target's own start.
    for f in range(spec.frames):
        cx, cy = spec.source.center(f)
        on = np.argwhere(ref[f, 1] == spec.target.color[1])
        assert on[:, 1].mean() == pytest.approx(cx, abs=1e-9)
        assert on[:, 0].mean() == pytest.approx(cy, abs=1e-9)


def test_object_leaving_frame_rejected():
    with pytest.raises(ConfigError):
        ScenarioSpec(
            source=ObjectSpec(
                shape="square", color=(1, 0, 0), size=5.0, start=(44, 24), velocity=(1, 0)
            )
        )


def test_target_too_large_for_path_rejected():
    with pytest.raises(ConfigError):
        ScenarioSpec(
            source=ObjectSpec(shape="square", color=(1, 0, 0), size=3.0, start=(5, 24)),
            target=ObjectSpec(shape="circle", color=(0, 1, 0), size=6.0),
        )


def test_four_channel_scenario():
    spec = ScenarioSpec(
        channels=4,
        background=(0.1, 0.2, 0.3, 0.4),
        source=ObjectSpec(shape="square", color=(1, 0, 0, 1), size=4.0, start=(24, 24)),
        target=ObjectSpec(shape="circle", color=(0, 1, 0, 1), size=5.0),
    )
    video, mask = synth_video(spec)
    assert video.shape == (8, 4, 48, 48)
    assert render_reference(spec).shape == (8, 4, 48, 48)


def test_scenario_validation():
    with pytest.raises(ConfigError):
        ScenarioSpec(frames=7)
    with pytest.raises(ConfigError):
        ScenarioSpec(background=(0.1, 0.2))  # wrong channel count
    with pytest.raises(ConfigError):
        ScenarioSpec(background=(0.1, 0.2, 1.5))
    with pytest.raises(ConfigError):
        ObjectSpec(shape="triangle", color=(1, 0, 0), size=3.0)
    with pytest.raises(ConfigError):
        ObjectSpec(shape="square", color=(1, 0, 0), size=0.0)


def test_scenario_denoiser_keys_match_conditions():
    spec = canonical_scenario()
    enc = HashEmbedder()
    cond = build_condition_set(enc, {"kind": "ref"}, "text")
    d = scenario_denoiser(spec, IdentityCodec(), cond)
    assert isinstance(d, GmmDenoiser)
    pos = d.components_for(cond.positive_key)
    neg = d.components_for(cond.negative_key)
    ref = render_reference(spec)
    video, _ = synth_video(spec)
    assert np.array_equal(pos[0].mean, ref)
    assert np.array_equal(neg[0].mean, video)
    assert pos[0].var == 0.2
    assert neg[0].var == 100.0


# ------------------------------------------------------------- run assembly

def test_assemble_canonical_run():
    spec, config, deps = assemble_run(canonical_run_spec())
    assert spec == canonical_scenario()
    assert config.nu == 50
    assert config.rho_stage1 == 20
    assert config.seed == 1234
    assert isinstance(deps.codec, IdentityCodec)
    assert isinstance(deps.denoiser, GmmDenoiser)
    assert isinstance(deps.provider, HashEmbedder)
    assert isinstance(deps.segmenter, ColorSegmenter)
    # Denoiser keys line up with the config-derived conditions.
    cond = condition_from_config(config, deps.provider)
    deps.denoiser.components_for(cond.positive_key)
    deps.denoiser.components_for(cond.negative_key)


def test_canonical_run_spec_is_json_round_trippable():
    import json

    spec = canonical_run_spec()
    assert json.loads(json.dumps(spec)) == spec


def test_assemble_run_defaults_descriptors_from_scenario():
    run = canonical_run_spec()
    _, config, _ = assemble_run(run)
    assert config.source_object == {"color": [0.85, 0.15, 0.1]}
    assert config.target_object == {"color": [0.1, 0.75, 0.2]}
    assert config.ref_image["shape"] == "circle"


def test_assemble_run_rejects_unknown_sections():
    run = canonical_run_spec()
    run["mystery"] = {}
    with pytest.raises(ConfigError):
        assemble_run(run)


def test_assemble_run_rejects_unknown_edit_fields():
    run = canonical_run_spec()
    run["edit"]["strength"] = 2.0
    with pytest.raises(ConfigError):
        assemble_run(run)


def test_assemble_run_without_scenario_needs_descriptors():
    run = {"edit": {"text": "x"}, "denoiser": {"kind": "constant"}}
    with pytest.raises(ConfigError):
        assemble_run(run)


def test_assemble_run_constant_denoiser_without_scenario():
    run = {
        "edit": {
            "text": "x",
            "source_object": {"color": [1, 0, 0]},
            "target_object": {"color": [0, 1, 0]},
            "ref_image": "ref",
        },
        "denoiser": {"kind": "constant", "value": 0.5},
    }
    spec, config, deps = assemble_run(run)
    assert spec is None
    assert deps.denoiser.value == 0.5


def test_assemble_run_scenario_gmm_requires_scenario():
    run = {
        "edit": {
            "text": "x",
            "source_object": {"color": [1, 0, 0]},
            "target_object": {"color": [0, 1, 0]},
            "ref_image": "ref",
        },
    }
    with pytest.raises(ConfigError):
        assemble_run(run)


def test_assemble_run_linear_codec():
    run = canonical_run_spec()
    run["codec"] = {"kind": "linear", "channels": 3, "seed": 2}
    _, _, deps = assemble_run(run)
    assert isinstance(deps.codec, LinearCodec)
    with pytest.raises(ConfigError):
        assemble_run({**canonical_run_spec(), "codec": {"kind": "wavelet"}})


def test_scenario_from_dict_roundtrip():
    spec = canonical_scenario()
    d = canonical_run_spec()["scenario"]
    assert scenario_from_dict(d) == spec
    with pytest.raises(ConfigError):
        scenario_from_dict({"framez": 8})
    with pytest.raises(ConfigError):
        scenario_from_dict({"source": {"shape": "square"}})
