#!/usr/bin/env python3
"""Per-stage wall-clock breakdown of one segmentation, for performance work.

    python scripts/profile_stages.py [--seed 1] [--superpixels 2000]
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from wirewalk.evaluate import iou
from wirewalk.pipeline import PipelineConfig, segment_image
from wirewalk.synth import generate_scene, homogeneous_scene_spec


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--cables", type=int, default=2)
    ap.add_argument("--superpixels", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    spec = homogeneous_scene_spec(seed=args.seed, cable_count=args.cables)
    image, truth, endpoints = generate_scene(spec)
    seeds = [p for pair in endpoints for p in pair]
    config = PipelineConfig(superpixels=args.superpixels)

    segment_image(image, seeds, config)  # warm-up
    for run in range(args.repeat):
        t0 = time.perf_counter()
        out = segment_image(image, seeds, config)
        total = time.perf_counter() - t0
        stages = "  ".join(f"{k} {v:7.1f}ms" for k, v in out.timings_ms.items())
        print(f"run {run}: total {total * 1000:7.1f}ms  {stages}")
        print(
            f"       steps {out.run.diagnostics.extension_steps}"
            f"  mean step {out.mean_step_ms:.4f}ms"
            f"  IoU {iou(out.segmentation.union_mask, truth.union_mask):.3f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
