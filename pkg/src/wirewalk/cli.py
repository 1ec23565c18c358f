"""Command line interface: segment, evaluate, synth, serve.

Exit codes (segment): 0 success, 10 unreadable image, 11 fewer than two
usable seeds, 12 no walk closed between any seed pair, 13 invalid config.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .core import Point2, load_image, save_image_png, save_mask_png
from .evaluate import format_report_table, report_to_dict
from .graph import save_graph_json
from .superpixel import boundary_overlay, save_label_png
from .pipeline import (
    PipelineConfig,
    SeedError,
    config_to_dict,
    evaluate_dataset,
    load_config,
    render_result_overlay,
    segment_image,
)
from .walker import walk_to_dict

EXIT_OK = 0
EXIT_BAD_IMAGE = 10
EXIT_BAD_SEEDS = 11
EXIT_NO_WALK = 12
EXIT_BAD_CONFIG = 13

_CONFIG_FLAGS = {
    "superpixels": "superpixels",
    "compactness": "compactness",
    "bins": "histogram_bins",
    "order": "graph_order",
    "vm_m": "von_mises_m",
    "c_visual": "c_visual",
    "c_distance": "c_distance",
    "radius": "termination_radius_px",
    "max_steps": "max_steps",
    "min_step_likelihood": "min_step_likelihood",
    "thickness_strategy": "thickness_strategy",
}


def add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--superpixels", type=int, help="target superpixel count K")
    parser.add_argument("--compactness", type=float)
    parser.add_argument("--bins", type=int, help="histogram bins per channel")
    parser.add_argument("--order", type=int, help="graph neighborhood order d")
    parser.add_argument("--vm-m", dest="vm_m", type=float, help="von Mises m")
    parser.add_argument("--c-visual", dest="c_visual", type=float)
    parser.add_argument("--c-distance", dest="c_distance", type=float)
    parser.add_argument("--radius", type=float, help="walk closing radius in px")
    parser.add_argument("--max-steps", dest="max_steps", type=int)
    parser.add_argument(
        "--min-step-likelihood", dest="min_step_likelihood", type=float
    )
    parser.add_argument("--thickness-strategy", dest="thickness_strategy")


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    if getattr(args, "config", None):
        config = load_config(args.config)
    else:
        config = PipelineConfig()
    overrides = {}
    for flag, field in _CONFIG_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field] = value
    return replace(config, **overrides) if overrides else config


def parse_seed_arg(text: str) -> Point2:
    try:
        x, y = text.split(",")
        return Point2(float(x), float(y))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"seed must look like 'x,y', got {text!r}"
        ) from exc


def collect_seeds(args: argparse.Namespace) -> list[Point2]:
    seeds: list[Point2] = list(args.seed or [])
    if args.seeds:
        doc = json.loads(Path(args.seeds).read_text())
        if doc.get("version") != 1:
            raise ValueError(f"unsupported seeds file version {doc.get('version')}")
        seeds.extend(Point2(float(s["x"]), float(s["y"])) for s in doc["seeds"])
    return seeds


def cmd_segment(args: argparse.Namespace) -> int:
    try:
        config = resolve_config(args)
    except (ValueError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG

    try:
        image = load_image(args.image)
    except (OSError, ValueError) as exc:
        print(f"error: cannot read image {args.image}: {exc}", file=sys.stderr)
        return EXIT_BAD_IMAGE

    try:
        seeds = collect_seeds(args)
    except (ValueError, OSError) as exc:
        print(f"error: bad seeds: {exc}", file=sys.stderr)
        return EXIT_BAD_SEEDS
    if len(seeds) < 2:
        print(f"error: need at least 2 seeds, got {len(seeds)}", file=sys.stderr)
        return EXIT_BAD_SEEDS

    try:
        output = segment_image(image, seeds, config, record_steps=args.verbose)
    except SeedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_SEEDS

    if not output.walks:
        diag = output.run.diagnostics
        print(
            "error: no walk closed between any seed pair "
            f"(started {diag.walks_started}, aborted {diag.walks_aborted}, "
            f"hit step cap {diag.walks_max_steps})",
            file=sys.stderr,
        )
        return EXIT_NO_WALK

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_segmentation_outputs(out, image, output, config, verbose=args.verbose)
    if args.verbose:
        print(f"stage timings (ms): {output.timings_ms}")
        save_graph_json(output.graph, out / "graph.json")
        save_label_png(output.spmap, out / "labels.png")
        save_image_png(boundary_overlay(output.spmap), out / "superpixels.png")
    print(f"wrote {len(output.walks)} object(s) to {out}")
    return EXIT_OK


def write_segmentation_outputs(
    out: Path, image, output, config: PipelineConfig, verbose: bool = False
) -> None:
    """Write the artifact set shared by the CLI and the accept endpoint."""
    from .model import spline_to_dict

    seg = output.segmentation
    save_mask_png(seg.union_mask, out / "mask_union.png")
    for k, mask in enumerate(seg.object_masks):
        save_mask_png(mask, out / f"mask_{k}.png")
    for k, model in enumerate(seg.models):
        (out / f"spline_{k}.json").write_text(
            json.dumps(spline_to_dict(model, config.spline_max_gap_px))
        )
    walks_doc = {
        "version": 1,
        "walks": [
            walk_to_dict(w, output.graph, verbose=verbose) for w in output.walks
        ],
        "diagnostics": {
            "walks_started": output.run.diagnostics.walks_started,
            "walks_closed": output.run.diagnostics.walks_closed,
            "walks_aborted": output.run.diagnostics.walks_aborted,
            "walks_max_steps": output.run.diagnostics.walks_max_steps,
            "extension_steps": output.run.diagnostics.extension_steps,
            "unpaired_seed_ids": output.run.diagnostics.unpaired_seed_ids,
        },
    }
    (out / "walks.json").write_text(json.dumps(walks_doc))
    save_image_png(render_result_overlay(image, output), out / "overlay.png")
    (out / "config.json").write_text(json.dumps(config_to_dict(config), indent=2))


def cmd_evaluate(args: argparse.Namespace) -> int:
    try:
        config = resolve_config(args)
    except (ValueError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    try:
        report = evaluate_dataset(args.dataset, config)
    except (ValueError, OSError) as exc:
        print(f"error: cannot evaluate {args.dataset}: {exc}", file=sys.stderr)
        return EXIT_BAD_IMAGE
    print(format_report_table(report))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(report_to_dict(report), indent=2))
        print(f"report written to {out / 'report.json'}")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    from .evaluate import save_scene
    from .synth import (
        crossing_scene_spec,
        generate_scene,
        homogeneous_scene_spec,
        self_crossing_scene_spec,
    )

    builders = {
        "homogeneous": homogeneous_scene_spec,
        "crossing": crossing_scene_spec,
        "self-crossing": self_crossing_scene_spec,
    }
    builder = builders[args.kind]
    out = Path(args.out)
    for i in range(args.scenes):
        spec = builder(args.seed_base + i, dims=(args.width, args.height))
        image, truth, _ = generate_scene(spec)
        save_scene(out / f"scene_{i:03d}", image, truth)
    print(f"wrote {args.scenes} {args.kind} scene(s) to {out}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    try:
        config = resolve_config(args)
    except (ValueError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    from .server import serve_forever

    serve_forever(args.host, args.port, config, Path(args.workdir))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wirewalk",
        description="Deformable linear object segmentation on superpixel graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment one image given seed endpoints")
    p.add_argument("image", type=Path)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument(
        "--seed",
        action="append",
        type=parse_seed_arg,
        help="seed point 'x,y' (repeatable)",
    )
    p.add_argument("--seeds", type=Path, help="seeds JSON file")
    p.add_argument("--verbose", action="store_true")
    add_config_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("evaluate", help="run the IoU protocol over a dataset")
    p.add_argument("dataset", type=Path)
    p.add_argument("--out", type=Path, help="directory for report.json")
    p.add_argument("--verbose", action="store_true")
    add_config_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--scenes", type=int, default=10)
    p.add_argument(
        "--kind",
        choices=["homogeneous", "crossing", "self-crossing"],
        default="homogeneous",
    )
    p.add_argument("--seed-base", dest="seed_base", type=int, default=0)
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=480)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the labeling HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8642)
    p.add_argument("--workdir", default="wirewalk_sessions")
    p.add_argument("--verbose", action="store_true")
    add_config_flags(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
