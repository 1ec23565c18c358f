"""Evaluation harness: IoU metrics, dataset layout and timing reports.

A dataset directory holds one sub-directory per scene:

    <scene>/image.png        8-bit RGB input
    <scene>/mask_union.png   union of all object masks
    <scene>/mask_<k>.png     per-object ground-truth masks, k = 0, 1, ...
    <scene>/spline_<k>.json  per-object centerline discretization

Object endpoints (walk seeds) are recovered from the first and last points
of each spline discretization.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Image, Point2, load_image, load_mask_png, save_image_png, save_mask_png

SCHEMA_VERSION = 1

_MASK_RE = re.compile(r"mask_(\d+)\.png$")


@dataclass
class GroundTruth:
    cable_masks: list[np.ndarray]
    union_mask: np.ndarray
    cable_points: list[list[Point2]]  # per-cable centerline discretization

    @property
    def cable_count(self) -> int:
        return len(self.cable_masks)

    def endpoints(self) -> list[tuple[Point2, Point2]]:
        return [(pts[0], pts[-1]) for pts in self.cable_points]


@dataclass
class ImageEval:
    name: str
    cable_count: int
    union_iou: float
    per_cable_iou: list[float] = field(default_factory=list)
    runtime_ms: float = 0.0


@dataclass
class EvalReport:
    per_image: list[ImageEval]
    weighted_iou: float
    stage_timings_ms: dict[str, float] = field(default_factory=dict)
    iteration_count: int = 0
    mean_iteration_ms: float = 0.0


def iou(prediction: np.ndarray, truth: np.ndarray) -> float:
    """Intersection over union of two binary masks; empty vs empty is 1."""
    p = np.asarray(prediction, dtype=bool)
    t = np.asarray(truth, dtype=bool)
    if p.shape != t.shape:
        raise ValueError(f"mask dimensions differ: {p.shape} vs {t.shape}")
    union = np.logical_or(p, t).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(p, t).sum() / union)


def weighted_iou(per_image: list[tuple[int, float]]) -> float:
    """Cable-count-weighted mean of per-image IoU values."""
    if not per_image:
        raise ValueError("weighted_iou needs at least one image")
    if any(c < 1 for c, _ in per_image):
        raise ValueError("cable counts must be >= 1")
    total = sum(c for c, _ in per_image)
    return sum(c * v for c, v in per_image) / total


def evaluate_run(results, truths, names=None, runtimes_ms=None) -> EvalReport:
    """Union-mask IoU per image plus the weighted aggregate.

    `results` may be SegmentationResult objects or plain union masks.
    Per-cable IoUs are reported as diagnostics: each ground-truth cable is
    matched to its best-overlapping predicted object mask.
    """
    if len(results) != len(truths):
        raise ValueError("results and truths must align")
    names = names or [f"image_{i}" for i in range(len(results))]
    runtimes_ms = runtimes_ms or [0.0] * len(results)

    per_image = []
    for result, truth, name, ms in zip(results, truths, names, runtimes_ms):
        union = result if isinstance(result, np.ndarray) else result.union_mask
        objects = [] if isinstance(result, np.ndarray) else result.object_masks
        per_cable = [
            max((iou(om, cm) for om in objects), default=0.0)
            for cm in truth.cable_masks
        ]
        per_image.append(
            ImageEval(
                name=name,
                cable_count=truth.cable_count,
                union_iou=iou(union, truth.union_mask),
                per_cable_iou=per_cable,
                runtime_ms=ms,
            )
        )

    agg = weighted_iou([(e.cable_count, e.union_iou) for e in per_image])
    return EvalReport(per_image=per_image, weighted_iou=agg)


# ---------------------------------------------------------------------------
# Dataset IO
# ---------------------------------------------------------------------------


def save_scene(
    directory: str | Path,
    image: Image,
    truth: GroundTruth,
) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    save_image_png(image, d / "image.png")
    save_mask_png(truth.union_mask, d / "mask_union.png")
    for k, mask in enumerate(truth.cable_masks):
        save_mask_png(mask, d / f"mask_{k}.png")
    for k, pts in enumerate(truth.cable_points):
        doc = {"version": SCHEMA_VERSION, "points": [[p.x, p.y] for p in pts]}
        (d / f"spline_{k}.json").write_text(json.dumps(doc))


def load_scene(directory: str | Path) -> tuple[Image, GroundTruth]:
    d = Path(directory)
    image = load_image(d / "image.png")
    union = load_mask_png(d / "mask_union.png")
    ks = sorted(
        int(m.group(1)) for p in d.iterdir() if (m := _MASK_RE.search(p.name))
    )
    masks = [load_mask_png(d / f"mask_{k}.png") for k in ks]
    points = []
    for k in ks:
        doc = json.loads((d / f"spline_{k}.json").read_text())
        points.append([Point2(x, y) for x, y in doc["points"]])
    return image, GroundTruth(cable_masks=masks, union_mask=union, cable_points=points)


def list_scenes(dataset_dir: str | Path) -> list[Path]:
    root = Path(dataset_dir)
    return sorted(p for p in root.iterdir() if (p / "image.png").is_file())


# ---------------------------------------------------------------------------
# Report output
# ---------------------------------------------------------------------------


def report_to_dict(report: EvalReport) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "weighted_iou": report.weighted_iou,
        "stage_timings_ms": report.stage_timings_ms,
        "iteration_count": report.iteration_count,
        "mean_iteration_ms": report.mean_iteration_ms,
        "per_image": [
            {
                "name": e.name,
                "cable_count": e.cable_count,
                "union_iou": e.union_iou,
                "per_cable_iou": e.per_cable_iou,
                "runtime_ms": e.runtime_ms,
            }
            for e in report.per_image
        ],
    }


def format_report_table(report: EvalReport) -> str:
    lines = [
        f"{'image':<24} {'cables':>6} {'IoU':>8} {'ms':>9}",
        "-" * 50,
    ]
    for e in report.per_image:
        lines.append(
            f"{e.name:<24} {e.cable_count:>6} {e.union_iou:>8.4f} {e.runtime_ms:>9.1f}"
        )
    lines.append("-" * 50)
    lines.append(f"{'weighted IoU':<24} {'':>6} {report.weighted_iou:>8.4f}")
    if report.mean_iteration_ms:
        lines.append(
            f"mean step {report.mean_iteration_ms:.3f} ms over "
            f"{report.iteration_count} steps"
        )
    return "\n".join(lines)
