#!/usr/bin/env python3
"""Generate a synthetic suite, run the full pipeline over it, and print the
evaluation table. Handy for eyeballing parameter changes.

    python scripts/run_synthetic_eval.py --scenes 20 --kind homogeneous
"""

import argparse
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from wirewalk.evaluate import format_report_table, save_scene
from wirewalk.pipeline import PipelineConfig, evaluate_dataset
from wirewalk.synth import (
    crossing_scene_spec,
    generate_scene,
    homogeneous_scene_spec,
    self_crossing_scene_spec,
)

BUILDERS = {
    "homogeneous": homogeneous_scene_spec,
    "crossing": crossing_scene_spec,
    "self-crossing": self_crossing_scene_spec,
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenes", type=int, default=20)
    ap.add_argument("--kind", choices=sorted(BUILDERS), default="homogeneous")
    ap.add_argument("--seed-base", type=int, default=0)
    ap.add_argument("--superpixels", type=int, default=2000)
    ap.add_argument("--keep", type=Path, help="write the dataset here instead of a tempdir")
    args = ap.parse_args()

    config = PipelineConfig(superpixels=args.superpixels)
    builder = BUILDERS[args.kind]

    workdir = args.keep or Path(tempfile.mkdtemp(prefix="wirewalk_eval_"))
    for i in range(args.scenes):
        spec = builder(args.seed_base + i)
        image, truth, _ = generate_scene(spec)
        save_scene(workdir / f"scene_{i:03d}", image, truth)

    report = evaluate_dataset(workdir, config)
    print(format_report_table(report))
    print(f"dataset: {workdir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
