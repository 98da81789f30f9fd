"""Command-line interface.

Subcommands: synth (render a scenario), edit (two-stage edit), invert
(latent inversion trajectory), metrics (compare two videos), init-config
(write the canonical run spec), selftest (run the built-in checks).

Exit codes: 0 success, 2 configuration/usage errors, 3 runtime failures.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .container import (
    read_container,
    write_container,
    write_ppm_frames,
    write_trajectory,
)
from .codec import IdentityCodec
from .denoise import ConstantDenoiser
from .errors import ConfigError, LatentcutError
from .guidance import ZERO_IMAGE, HashEmbedder, build_condition_set
from .metrics import changed_fraction, psnr, temporal_score
from .pipeline import condition_from_config, run_edit
from .sampler import invert_trajectory
from .scenario import assemble_run, canonical_run_spec, scenario_from_dict, synth_video
from .schedule import linear_schedule, make_plan
from .tensors import as_mask

__all__ = ["main"]


def _load_json(path, what: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {what} {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{what} {path}: top level must be a JSON object")
    return data


def _scenario_section(data: dict) -> dict:
    # Accept either a bare scenario dict or a full run spec holding one.
    if "scenario" in data and isinstance(data["scenario"], dict):
        return data["scenario"]
    return data


def _cmd_synth(args) -> int:
    spec = scenario_from_dict(_scenario_section(_load_json(args.spec, "scenario spec")))
    video, mask = synth_video(spec)
    meta = {"scenario": _scenario_section(_load_json(args.spec, "scenario spec"))}
    write_container(args.out_video, video, "video", meta=meta)
    write_container(args.out_mask, mask, "mask", meta=meta)
    print(f"wrote {args.out_video}")
    print(f"wrote {args.out_mask}")
    return 0


def _cmd_edit(args) -> int:
    run_spec = _load_json(args.config, "run config")
    _, config, deps = assemble_run(run_spec)
    video, _ = read_container(args.source)
    result = run_edit(video, config, deps)

    meta = {"run_spec": run_spec}
    write_container(args.out, result.frames, "video", meta=meta)
    print(f"wrote {args.out}")
    if args.dump_rough:
        write_container(args.dump_rough, result.rough_frames, "video", meta=meta)
        print(f"wrote {args.dump_rough}")
    if args.dump_masks:
        out_dir = Path(args.dump_masks)
        out_dir.mkdir(parents=True, exist_ok=True)
        from .masking import dilate  # local import keeps the module list tidy

        masks = {
            "source_mask": result.source_mask,
            "source_mask_dilated": dilate(result.source_mask, config.k),
            "rough_mask": result.rough_mask,
            "rough_mask_dilated": dilate(
                result.rough_mask, config.k if config.k_rough is None else config.k_rough
            ),
            "final_mask": result.final_mask,
        }
        for name, m in masks.items():
            p = out_dir / f"{name}.vint"
            write_container(p, m, "mask", meta=meta)
            print(f"wrote {p}")
    if args.frames_ppm:
        paths = write_ppm_frames(args.frames_ppm, result.frames)
        print(f"wrote {len(paths)} frames to {args.frames_ppm}")
    return 0


def _cmd_invert(args) -> int:
    video, _ = read_container(args.source)
    if args.config:
        run_spec = _load_json(args.config, "run config")
        _, config, deps = assemble_run(run_spec)
        nu = args.nu if args.nu is not None else config.nu
        schedule = config.schedule()
        cond = condition_from_config(config, deps.provider)
        codec = deps.codec
        denoiser = deps.denoiser
    else:
        nu = args.nu if args.nu is not None else 50
        schedule = linear_schedule()
        provider = HashEmbedder()
        cond = build_condition_set(provider, ZERO_IMAGE, "", "", w=0.0)
        codec = IdentityCodec()
        denoiser = ConstantDenoiser(0.0)
    plan = make_plan(schedule, nu, nu)
    traj = invert_trajectory(
        codec.encode(video), schedule, plan, denoiser, cond,
        up_to=nu, conditioned=args.conditioned,
    )
    write_trajectory(args.out, traj)
    print(f"wrote {args.out}")
    return 0


def _metric_payload(args) -> dict:
    candidate, _ = read_container(args.candidate)
    reference, _ = read_container(args.reference)
    region = None
    if args.region:
        region, _ = read_container(args.region)
        region = as_mask(region)
        if args.invert_region:
            region = 1.0 - region
    return {
        "psnr": psnr(reference, candidate, region=region),
        "temporal": temporal_score(candidate),
        "changed_fraction": changed_fraction(reference, candidate),
    }


def _cmd_metrics(args) -> int:
    payload = _metric_payload(args)
    if args.json:
        encodable = {
            k: ("inf" if isinstance(v, float) and math.isinf(v) else v)
            for k, v in payload.items()
        }
        print(json.dumps(encodable, sort_keys=True))
    else:
        print(f"psnr: {payload['psnr']:.4f} dB")
        print(f"temporal: {payload['temporal']:.6f}")
        print(f"changed_fraction: {payload['changed_fraction']:.6f}")
    return 0


def _cmd_init_config(args) -> int:
    spec = canonical_run_spec()
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(spec, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.out}")
    return 0


def _cmd_selftest(args) -> int:
    from .selfcheck import run_all

    results = run_all(verbose=True)
    return 0 if all(ok for _, ok, _ in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latentcut",
        description="Training-free object replacement in synthetic videos.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="render a scenario to video and mask containers")
    p.add_argument("--spec", required=True, help="scenario JSON (or run config holding one)")
    p.add_argument("--out-video", required=True)
    p.add_argument("--out-mask", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("edit", help="run the two-stage edit")
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--source", required=True, help="source video container")
    p.add_argument("--out", required=True, help="edited video container")
    p.add_argument("--dump-rough", help="also write the stage-1 video")
    p.add_argument("--dump-masks", help="directory for all intermediate masks")
    p.add_argument("--frames-ppm", help="directory for 8-bit PPM frames of the result")
    p.set_defaults(func=_cmd_edit)

    p = sub.add_parser("invert", help="compute a latent inversion trajectory")
    p.add_argument("--source", required=True, help="source video container")
    p.add_argument("--out", required=True, help="trajectory container")
    p.add_argument("--config", help="run config JSON (defaults: identity codec, zero predictor)")
    p.add_argument("--nu", type=int, help="grid points (default: config nu, else 50)")
    p.add_argument("--conditioned", action="store_true", help="apply guidance during inversion")
    p.set_defaults(func=_cmd_invert)

    p = sub.add_parser("metrics", help="compare an edited video against a reference")
    p.add_argument("--candidate", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--region", help="binary mask container restricting the PSNR region")
    p.add_argument("--invert-region", action="store_true", help="measure outside the region")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("init-config", help="write the canonical run spec")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_init_config)

    p = sub.add_parser("selftest", help="run the built-in acceptance checks")
    p.set_defaults(func=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LatentcutError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
