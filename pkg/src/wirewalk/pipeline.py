"""End-to-end orchestration: image -> superpixels -> graph -> walks -> models.

The single PipelineConfig document aggregates every stage's parameters and
round-trips through JSON unchanged.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import Image, Point2
from .evaluate import EvalReport, evaluate_run, list_scenes, load_scene
from .graph import RegionGraph, build_graph
from .model import (
    THICKNESS_AREA_OVER_LENGTH,
    THICKNESS_SQRT_AREA,
    SegmentationResult,
    SplineModel,
    build_segmentation,
    estimate_thickness,
    fit_spline,
    sample_spline,
)
from .superpixel import SlicParams, SuperpixelMap, slic_segment
from .walker import Seed, Walk, WalkerParams, WalkRunResult, run_walks

SCHEMA_VERSION = 1

DEFAULT_PIXELS_PER_SUPERPIXEL = 300


@dataclass(frozen=True)
class PipelineConfig:
    superpixels: Optional[int] = None  # target K; None picks pixels/300
    compactness: float = 10.0
    slic_iterations: int = 10
    min_region_fraction: float = 0.25
    histogram_bins: int = 8
    graph_order: int = 3
    c_visual: float = 10.0
    c_distance: float = 2.0
    von_mises_m: float = 4.0
    max_steps: int = 200
    termination_radius_px: Optional[float] = None  # None: 2 x mean spacing
    min_step_likelihood: float = 1e-6
    backtrack_window: int = 2
    spline_max_gap_px: float = 1.0
    thickness_strategy: str = "area_over_length"

    def __post_init__(self):
        positive = {
            "compactness": self.compactness,
            "c_visual": self.c_visual,
            "c_distance": self.c_distance,
            "von_mises_m": self.von_mises_m,
            "min_step_likelihood": self.min_step_likelihood,
            "min_region_fraction": self.min_region_fraction,
            "spline_max_gap_px": self.spline_max_gap_px,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive")
        at_least_one = {
            "slic_iterations": self.slic_iterations,
            "graph_order": self.graph_order,
            "max_steps": self.max_steps,
            "backtrack_window": self.backtrack_window,
        }
        for name, value in at_least_one.items():
            if value < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.histogram_bins < 2:
            raise ValueError("histogram_bins must be >= 2")
        if self.superpixels is not None and self.superpixels < 2:
            raise ValueError("superpixels must be >= 2")
        if self.termination_radius_px is not None and self.termination_radius_px <= 0:
            raise ValueError("termination_radius_px must be positive")
        if self.thickness_strategy not in (
            THICKNESS_SQRT_AREA,
            THICKNESS_AREA_OVER_LENGTH,
        ):
            raise ValueError(f"unknown thickness_strategy {self.thickness_strategy!r}")

    def region_count_for(self, image: Image) -> int:
        if self.superpixels is not None:
            return self.superpixels
        return max(2, (image.width * image.height) // DEFAULT_PIXELS_PER_SUPERPIXEL)

    def slic_params(self, image: Image) -> SlicParams:
        return SlicParams(
            region_count=self.region_count_for(image),
            compactness=self.compactness,
            max_iterations=self.slic_iterations,
            min_region_fraction=self.min_region_fraction,
        )

    def walker_params(self) -> WalkerParams:
        return WalkerParams(
            c_visual=self.c_visual,
            c_distance=self.c_distance,
            von_mises_m=self.von_mises_m,
            graph_order=self.graph_order,
            max_steps=self.max_steps,
            termination_radius_px=self.termination_radius_px,
            min_step_likelihood=self.min_step_likelihood,
            backtrack_window=self.backtrack_window,
        )


def config_to_dict(config: PipelineConfig) -> dict:
    doc = {"version": SCHEMA_VERSION}
    doc.update(asdict(config))
    return doc


def config_from_dict(doc: dict) -> PipelineConfig:
    if doc.get("version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported config version {doc.get('version')}")
    fields = {k: v for k, v in doc.items() if k != "version"}
    unknown = set(fields) - set(PipelineConfig.__dataclass_fields__)
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    return PipelineConfig(**fields)


def load_config(path: str | Path) -> PipelineConfig:
    return config_from_dict(json.loads(Path(path).read_text()))


def save_config(config: PipelineConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(config), indent=2))


# ---------------------------------------------------------------------------
# Segmentation pipeline
# ---------------------------------------------------------------------------


class SeedError(ValueError):
    """Raised for missing or out-of-bounds seed points."""


@dataclass
class PipelineOutput:
    segmentation: SegmentationResult
    walks: list[Walk]
    run: WalkRunResult
    seeds: list[Seed]
    spmap: SuperpixelMap
    graph: RegionGraph
    timings_ms: dict[str, float] = field(default_factory=dict)

    @property
    def mean_step_ms(self) -> float:
        steps = self.run.diagnostics.extension_steps
        return self.timings_ms.get("walking", 0.0) / steps if steps else 0.0


def seeds_from_points(spmap: SuperpixelMap, points: Sequence[Point2]) -> list[Seed]:
    seeds = []
    for i, p in enumerate(points):
        if not spmap.image.contains(p):
            raise SeedError(f"seed ({p.x}, {p.y}) outside image bounds")
        vertex = int(spmap.labels[int(p.y), int(p.x)])
        seeds.append(Seed(id=i, vertex_id=vertex, source_point=Point2(p.x, p.y)))
    return seeds


def _distinct_centroids(walk: Walk, graph: RegionGraph) -> list[Point2]:
    pts = [graph.centroid(v) for v in walk.vertices]
    out = [pts[0]]
    for p in pts[1:]:
        if p != out[-1]:
            out.append(p)
    return out


def _densify(points: list[Point2], minimum: int) -> list[Point2]:
    """Insert midpoints on the longest segments until `minimum` points."""
    pts = list(points)
    while 2 <= len(pts) < minimum:
        gaps = [
            (pts[i + 1].x - pts[i].x) ** 2 + (pts[i + 1].y - pts[i].y) ** 2
            for i in range(len(pts) - 1)
        ]
        i = int(np.argmax(gaps))
        mid = Point2((pts[i].x + pts[i + 1].x) / 2.0, (pts[i].y + pts[i + 1].y) / 2.0)
        pts.insert(i + 1, mid)
    return pts


def _split_to_spacing(points: list[Point2], spacing: float) -> list[Point2]:
    """Subdivide the polyline so consecutive points are at most `spacing`
    apart. Centroid sequences are nearly noise-free, so feeding the fit a
    denser polyline buys interior knots (and a closer fit) without chasing
    noise."""
    out: list[Point2] = [points[0]]
    for a, b in zip(points, points[1:]):
        gap = np.hypot(b.x - a.x, b.y - a.y)
        pieces = max(1, int(np.ceil(gap / spacing)))
        for j in range(1, pieces + 1):
            t = j / pieces
            out.append(Point2(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)))
    return out


def walk_color(walk: Walk, spmap: SuperpixelMap) -> tuple[float, float, float]:
    """Area-weighted mean RGB over the walk's distinct superpixels."""
    regions = [spmap.regions[v] for v in sorted(set(walk.vertices))]
    total = sum(r.area for r in regions)
    mixed = [
        sum(r.mean_rgb[c] * r.area for r in regions) / total for c in range(3)
    ]
    return (mixed[0], mixed[1], mixed[2])


def model_from_walk(
    walk: Walk,
    spmap: SuperpixelMap,
    graph: RegionGraph,
    config: PipelineConfig,
    seeds: Optional[Sequence[Seed]] = None,
) -> Optional[SplineModel]:
    pts = _distinct_centroids(walk, graph)
    if len(pts) < 2:
        return None
    # Anchor the curve at the true endpoint clicks: the first/last region
    # centroids sit half a superpixel inside the object's tips.
    if seeds is not None:
        by_id = {s.id: s for s in seeds}
        start = by_id.get(walk.seed_start)
        end = by_id.get(walk.seed_end) if walk.seed_end is not None else None
        if start is not None and start.source_point != pts[0]:
            pts.insert(0, start.source_point)
        if end is not None and end.source_point != pts[-1]:
            pts.append(end.source_point)
    pts = _split_to_spacing(pts, max(2.0, spmap.grid_interval / 4.0))
    pts = _densify(pts, 4)
    thickness = estimate_thickness(walk, graph, config.thickness_strategy)
    return fit_spline(
        pts, degree=3, thickness_px=thickness, color=walk_color(walk, spmap)
    )


def assemble_output(
    spmap: SuperpixelMap,
    graph: RegionGraph,
    seeds: list[Seed],
    run: WalkRunResult,
    config: PipelineConfig,
) -> PipelineOutput:
    """Fit models for the surviving walks and bundle the segmentation."""
    models = []
    walks = []
    for walk in run.walks:
        model = model_from_walk(walk, spmap, graph, config, seeds=seeds)
        if model is not None:
            models.append(model)
            walks.append(walk)
    segmentation = build_segmentation(
        models, (spmap.image.height, spmap.image.width)
    )
    return PipelineOutput(
        segmentation=segmentation,
        walks=walks,
        run=run,
        seeds=seeds,
        spmap=spmap,
        graph=graph,
    )


def segment_image(
    image: Image,
    seed_points: Sequence[Point2],
    config: PipelineConfig,
    record_steps: bool = False,
) -> PipelineOutput:
    """Run the full pipeline. Raises SeedError for bad seeds; walks that
    never close are reported in diagnostics rather than raised."""
    if len(seed_points) < 2:
        raise SeedError(f"need at least 2 seeds, got {len(seed_points)}")

    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    spmap = slic_segment(image, config.slic_params(image))
    timings["superpixel"] = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    graph = build_graph(spmap, config.histogram_bins, config.graph_order)
    timings["graph"] = (time.perf_counter() - t0) * 1000.0

    seeds = seeds_from_points(spmap, seed_points)
    for s in seeds:
        graph.seed_flags[s.vertex_id] = True

    t0 = time.perf_counter()
    run = run_walks(graph, seeds, config.walker_params(), record_steps=record_steps)
    timings["walking"] = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    output = assemble_output(spmap, graph, seeds, run, config)
    timings["spline"] = (time.perf_counter() - t0) * 1000.0
    output.timings_ms = timings
    return output


def render_result_overlay(
    image: Image, output: PipelineOutput, alpha: float = 0.45
) -> Image:
    """Blend object masks over the image, then draw each model's curve and
    the seed markers."""
    canvas = image.pixels.astype(np.float64)
    for mask, model in zip(
        output.segmentation.object_masks, output.segmentation.models
    ):
        color = np.asarray(model.color)
        canvas[mask] = (1 - alpha) * canvas[mask] + alpha * color
    out = np.clip(canvas, 0, 255).astype(np.uint8)

    h, w = out.shape[:2]
    for model in output.segmentation.models:
        for p in sample_spline(model, 1.0):
            x, y = int(round(p.x)), int(round(p.y))
            if 0 <= x < w and 0 <= y < h:
                out[y, x] = (255, 255, 255)
    for seed in output.seeds:
        x, y = int(seed.source_point.x), int(seed.source_point.y)
        x0, x1 = max(0, x - 2), min(w, x + 3)
        y0, y1 = max(0, y - 2), min(h, y + 3)
        out[y0:y1, x0:x1] = (255, 255, 0)
    return Image(out)


# ---------------------------------------------------------------------------
# Dataset evaluation
# ---------------------------------------------------------------------------


def evaluate_dataset(
    dataset_dir: str | Path, config: PipelineConfig
) -> EvalReport:
    """Segment every scene using ground-truth endpoints as seeds and score
    union IoU per image plus the cable-weighted aggregate."""
    scenes = list_scenes(dataset_dir)
    if not scenes:
        raise ValueError(f"no scenes found under {dataset_dir}")

    results = []
    truths = []
    names = []
    runtimes = []
    total_steps = 0
    total_walk_ms = 0.0
    stage_totals: dict[str, float] = {}
    for scene_dir in scenes:
        image, truth = load_scene(scene_dir)
        seed_points = [p for pair in truth.endpoints() for p in pair]
        t0 = time.perf_counter()
        output = segment_image(image, seed_points, config)
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        results.append(output.segmentation)
        truths.append(truth)
        names.append(scene_dir.name)
        runtimes.append(elapsed_ms)
        total_steps += output.run.diagnostics.extension_steps
        total_walk_ms += output.timings_ms["walking"]
        for k, v in output.timings_ms.items():
            stage_totals[k] = stage_totals.get(k, 0.0) + v

    report = evaluate_run(results, truths, names=names, runtimes_ms=runtimes)
    report.stage_timings_ms = stage_totals
    report.iteration_count = total_steps
    report.mean_iteration_ms = total_walk_ms / total_steps if total_steps else 0.0
    return report
