"""Per-object curve models and mask rendering.

Each surviving walk is summarized as a clamped cubic least-squares B-spline
over its centroid sequence (chord-length parameterization, uniform interior
knots), an estimated stroke thickness, and a rasterized mask obtained by
inflating the densely sampled curve.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Point2
from .graph import RegionGraph
from .walker import Walk

SCHEMA_VERSION = 1

THICKNESS_SQRT_AREA = "sqrt_area"
THICKNESS_AREA_OVER_LENGTH = "area_over_length"


@dataclass(frozen=True)
class SplineModel:
    degree: int
    knots: np.ndarray = field(repr=False)
    control_points: np.ndarray = field(repr=False)  # (n, 2)
    thickness_px: float = 1.0
    color: tuple[float, float, float] = (255.0, 255.0, 255.0)

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=np.float64)
        ctrl = np.asarray(self.control_points, dtype=np.float64)
        if ctrl.ndim != 2 or ctrl.shape[1] != 2:
            raise ValueError("control_points must be (n, 2)")
        if len(knots) != len(ctrl) + self.degree + 1:
            raise ValueError("knot count must equal control count + degree + 1")
        if (np.diff(knots) < 0).any():
            raise ValueError("knot vector must be non-decreasing")
        if self.thickness_px <= 0:
            raise ValueError("thickness must be positive")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "control_points", ctrl)


@dataclass
class SegmentationResult:
    """Per-object binary masks plus the union; background is mask value 0."""

    object_masks: list[np.ndarray]
    union_mask: np.ndarray
    models: list[SplineModel]

    def __post_init__(self):
        for m in self.object_masks:
            if m.shape != self.union_mask.shape:
                raise ValueError("all masks must share the image dimensions")


# ---------------------------------------------------------------------------
# B-spline machinery
# ---------------------------------------------------------------------------


def find_span(knots: np.ndarray, degree: int, u: float) -> int:
    """Index k with knots[k] <= u < knots[k+1]; the final parameter maps to
    the last non-empty span so evaluation is total on [0, 1]."""
    n = len(knots) - degree - 2  # last control index
    if u >= knots[n + 1]:
        return n
    lo, hi = degree, n + 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if u < knots[mid]:
            hi = mid
        else:
            lo = mid
    return lo


def basis_functions(knots: np.ndarray, degree: int, span: int, u: float) -> np.ndarray:
    """The degree+1 non-vanishing basis values at u (Cox-de Boor recursion)."""
    out = np.zeros(degree + 1)
    left = np.zeros(degree + 1)
    right = np.zeros(degree + 1)
    out[0] = 1.0
    for j in range(1, degree + 1):
        left[j] = u - knots[span + 1 - j]
        right[j] = knots[span + j] - u
        saved = 0.0
        for r in range(j):
            tmp = out[r] / (right[r + 1] + left[j - r])
            out[r] = saved + right[r + 1] * tmp
            saved = left[j - r] * tmp
        out[j] = saved
    return out


def de_boor_point(model: SplineModel, u: float) -> Point2:
    """Evaluate the curve at parameter u via de Boor's algorithm."""
    p = model.degree
    t = model.knots
    k = find_span(t, p, u)
    d = [model.control_points[j + k - p].copy() for j in range(p + 1)]
    for r in range(1, p + 1):
        for j in range(p, r - 1, -1):
            denom = t[j + 1 + k - r] - t[j + k - p]
            alpha = 0.0 if denom == 0.0 else (u - t[j + k - p]) / denom
            d[j] = (1.0 - alpha) * d[j - 1] + alpha * d[j]
    return Point2(float(d[p][0]), float(d[p][1]))


def chord_length_parameters(points: np.ndarray) -> np.ndarray:
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total == 0.0:
        raise ValueError("degenerate input: all points coincident")
    u = cum / total
    u[-1] = 1.0
    return u


def clamped_knot_vector(n_interior: int, degree: int) -> np.ndarray:
    interior = np.arange(1, n_interior + 1) / (n_interior + 1)
    return np.concatenate(
        [np.zeros(degree + 1), interior, np.ones(degree + 1)]
    )


def fit_spline(
    centroids: Sequence[Point2] | np.ndarray,
    degree: int = 3,
    thickness_px: float = 1.0,
    color: tuple[float, float, float] = (255.0, 255.0, 255.0),
) -> SplineModel:
    """Least-squares clamped B-spline through ordered centroids.

    Chord-length parameterization, floor(sqrt(n)) uniformly spaced interior
    knots (capped so the system stays overdetermined), and both endpoints
    interpolated exactly. A tiny ridge is added only if the normal equations
    come out singular.
    """
    pts = np.asarray([[p[0], p[1]] for p in centroids], dtype=np.float64)
    n = len(pts)
    if n < degree + 1:
        raise ValueError(f"need at least {degree + 1} points, got {n}")
    if (np.linalg.norm(np.diff(pts, axis=0), axis=1) == 0).any():
        raise ValueError("consecutive points must be distinct")

    u = chord_length_parameters(pts)
    n_interior = min(int(math.isqrt(n)), n - degree - 1)
    knots = clamped_knot_vector(n_interior, degree)
    n_ctrl = n_interior + degree + 1

    basis = np.zeros((n, n_ctrl))
    for r, ur in enumerate(u):
        span = find_span(knots, degree, ur)
        basis[r, span - degree : span + 1] = basis_functions(knots, degree, span, ur)

    # Clamp the end control points to the end data points, solve for the rest.
    p_first, p_last = pts[0], pts[-1]
    inner = basis[:, 1:-1]
    rhs = pts - np.outer(basis[:, 0], p_first) - np.outer(basis[:, -1], p_last)
    gram = inner.T @ inner
    moment = inner.T @ rhs
    try:
        solution = np.linalg.solve(gram, moment)
        if not np.isfinite(solution).all():
            raise np.linalg.LinAlgError("non-finite solve")
    except np.linalg.LinAlgError:
        ridge = gram + 1e-9 * np.eye(len(gram))
        solution = np.linalg.solve(ridge, moment)

    ctrl = np.vstack([p_first, solution, p_last])
    return SplineModel(
        degree=degree,
        knots=knots,
        control_points=ctrl,
        thickness_px=thickness_px,
        color=color,
    )


def sample_spline(model: SplineModel, max_gap_px: float = 1.0) -> list[Point2]:
    """Sample the curve densely enough that consecutive points are at most
    max_gap_px apart; both endpoints are always included."""
    if max_gap_px <= 0:
        raise ValueError("max_gap_px must be positive")
    n0 = max(16, 4 * len(model.control_points))
    params = list(np.linspace(0.0, 1.0, n0))
    points = [de_boor_point(model, t) for t in params]

    for _ in range(32):
        gaps = [
            math.hypot(points[i + 1].x - points[i].x, points[i + 1].y - points[i].y)
            for i in range(len(points) - 1)
        ]
        if all(g <= max_gap_px for g in gaps):
            break
        refined_params: list[float] = []
        refined_points: list[Point2] = []
        for i, g in enumerate(gaps):
            refined_params.append(params[i])
            refined_points.append(points[i])
            if g > max_gap_px:
                mid = 0.5 * (params[i] + params[i + 1])
                refined_params.append(mid)
                refined_points.append(de_boor_point(model, mid))
        refined_params.append(params[-1])
        refined_points.append(points[-1])
        params, points = refined_params, refined_points
    return points


def spline_arc_length(model: SplineModel, max_gap_px: float = 0.5) -> float:
    pts = sample_spline(model, max_gap_px)
    return float(
        sum(
            math.hypot(pts[i + 1].x - pts[i].x, pts[i + 1].y - pts[i].y)
            for i in range(len(pts) - 1)
        )
    )


# ---------------------------------------------------------------------------
# Thickness and rasterization
# ---------------------------------------------------------------------------


def estimate_thickness(
    walk: Walk, graph: RegionGraph, strategy: str = THICKNESS_SQRT_AREA
) -> float:
    """Stroke width from the walk's superpixels, never below 1 px.

    sqrt_area: mean equivalent side length over the visit sequence.
    area_over_length: total covered region area divided by the centroid
    polyline length (better calibrated when superpixels straddle the
    object boundary).
    """
    if not walk.vertices:
        raise ValueError("empty walk")
    if strategy == THICKNESS_SQRT_AREA:
        sides = [math.sqrt(graph.vertices[v].area) for v in walk.vertices]
        return max(1.0, float(np.mean(sides)))
    if strategy == THICKNESS_AREA_OVER_LENGTH:
        area = sum(graph.vertices[v].area for v in set(walk.vertices))
        length = 0.0
        for a, b in zip(walk.vertices, walk.vertices[1:]):
            pa, pb = graph.centroid(a), graph.centroid(b)
            length += math.hypot(pb.x - pa.x, pb.y - pa.y)
        if length == 0.0:
            return max(1.0, math.sqrt(area))
        return max(1.0, area / length)
    raise ValueError(f"unknown thickness strategy {strategy!r}")


def stroke_polyline_mask(
    points: Sequence[Point2], thickness_px: float, dims: tuple[int, int]
) -> np.ndarray:
    """Binary mask of pixels whose centers lie within thickness/2 of the
    polyline (round caps and joins come for free from the distance rule)."""
    height, width = dims
    mask = np.zeros((height, width), dtype=bool)
    if len(points) == 0:
        return mask
    r = thickness_px / 2.0

    pts = np.asarray([[p.x, p.y] for p in points])
    segments = list(zip(pts[:-1], pts[1:])) if len(pts) > 1 else [(pts[0], pts[0])]
    for a, b in segments:
        x0 = max(0, int(math.floor(min(a[0], b[0]) - r)))
        x1 = min(width - 1, int(math.ceil(max(a[0], b[0]) + r)))
        y0 = max(0, int(math.floor(min(a[1], b[1]) - r)))
        y1 = min(height - 1, int(math.ceil(max(a[1], b[1]) + r)))
        if x0 > x1 or y0 > y1:
            continue
        xs = np.arange(x0, x1 + 1, dtype=np.float64)
        ys = np.arange(y0, y1 + 1, dtype=np.float64)
        px = xs[None, :] - a[0]
        py = ys[:, None] - a[1]
        d = b - a
        seg_len2 = d[0] * d[0] + d[1] * d[1]
        if seg_len2 == 0.0:
            dist2 = px**2 + py**2
        else:
            t = np.clip((px * d[0] + py * d[1]) / seg_len2, 0.0, 1.0)
            dist2 = (px - t * d[0]) ** 2 + (py - t * d[1]) ** 2
        mask[y0 : y1 + 1, x0 : x1 + 1] |= dist2 <= r * r
    return mask


def render_mask(
    model: SplineModel, dims: tuple[int, int], max_gap_px: float = 1.0
) -> np.ndarray:
    """Rasterize the model's stroked curve into an image-sized binary mask."""
    if dims[0] <= 0 or dims[1] <= 0:
        raise ValueError("mask dimensions must be positive")
    gap = min(max_gap_px, max(model.thickness_px / 4.0, 0.25))
    points = sample_spline(model, gap)
    return stroke_polyline_mask(points, model.thickness_px, dims)


def build_segmentation(
    models: Sequence[SplineModel], dims: tuple[int, int]
) -> SegmentationResult:
    masks = [render_mask(m, dims) for m in models]
    union = np.zeros(dims, dtype=bool)
    for m in masks:
        union |= m
    return SegmentationResult(
        object_masks=list(masks), union_mask=union, models=list(models)
    )


# ---------------------------------------------------------------------------
# JSON export: model parameters plus a dense 2D point discretization
# ---------------------------------------------------------------------------


def spline_to_dict(model: SplineModel, max_gap_px: float = 1.0) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "degree": model.degree,
        "knots": model.knots.tolist(),
        "control_points": model.control_points.tolist(),
        "thickness_px": model.thickness_px,
        "color": list(model.color),
        "points": [[p.x, p.y] for p in sample_spline(model, max_gap_px)],
    }


def spline_from_dict(doc: dict) -> SplineModel:
    if doc.get("version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported spline schema version {doc.get('version')}")
    return SplineModel(
        degree=doc["degree"],
        knots=np.asarray(doc["knots"]),
        control_points=np.asarray(doc["control_points"]),
        thickness_px=doc["thickness_px"],
        color=tuple(doc["color"]),
    )


def save_spline_json(model: SplineModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(spline_to_dict(model)))


def load_spline_json(path: str | Path) -> SplineModel:
    return spline_from_dict(json.loads(Path(path).read_text()))
