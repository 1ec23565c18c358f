"""Synthetic cable scene generator with exact ground truth.

Cables are G1 chains of cubic Bezier segments built from bounded-turn
waypoint walks (headings move in 22.5-degree steps, at most two steps per
segment), so positive fixtures respect the smooth-curvature assumption the
walker relies on. All randomness is integer draws from a seeded generator;
curve evaluation is plain deterministic float arithmetic, so a given spec
reproduces byte-identical scenes everywhere.

Ground-truth masks are rasterized by the same polyline-stroking routine the
model stage uses for its output masks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Image, Point2
from .evaluate import GroundTruth
from .model import stroke_polyline_mask

TURN_STEP_DEG = 22.5
MAX_TURN_STEPS = 2  # per-segment heading change <= 45 degrees

# Saturated palette kept clearly distinct from the background colors below.
CABLE_PALETTE = (
    (200, 30, 30),
    (30, 110, 200),
    (30, 160, 60),
    (210, 160, 20),
    (150, 40, 170),
    (20, 170, 170),
)

BACKGROUND_UNIFORM = "uniform"
BACKGROUND_CHECKERBOARD = "checkerboard"
BACKGROUND_NOISE = "noise"


@dataclass(frozen=True)
class BackgroundSpec:
    kind: str = BACKGROUND_UNIFORM
    color: tuple[int, int, int] = (235, 235, 235)
    color2: tuple[int, int, int] = (210, 210, 210)
    cell: int = 32


@dataclass(frozen=True)
class CableSpec:
    """One cable: a chain of cubic Bezier control quads plus stroke style."""

    segments: tuple[tuple[tuple[float, float], ...], ...]
    width_px: int
    color: tuple[int, int, int]

    def __post_init__(self):
        if self.width_px < 3:
            raise ValueError("cable width must be >= 3 px")
        for quad in self.segments:
            if len(quad) != 4:
                raise ValueError("each Bezier segment needs 4 control points")


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    cables: tuple[CableSpec, ...]
    background: BackgroundSpec = BackgroundSpec()
    rng_seed: int = 0


def _bezier_points(quad, n: int) -> np.ndarray:
    p0, p1, p2, p3 = (np.asarray(p, dtype=np.float64) for p in quad)
    t = np.linspace(0.0, 1.0, n)[:, None]
    s = 1.0 - t
    return s**3 * p0 + 3 * s**2 * t * p1 + 3 * s * t**2 * p2 + t**3 * p3


def cable_polyline(cable: CableSpec) -> list[Point2]:
    """Dense centerline; fixed per-segment sampling keyed to chord length."""
    points: list[Point2] = []
    for quad in cable.segments:
        chord = math.dist(quad[0], quad[3])
        n = max(16, int(math.ceil(chord / 0.5)) + 1)
        seg = _bezier_points(quad, n)
        start = 1 if points else 0  # joints are shared between segments
        points.extend(Point2(float(x), float(y)) for x, y in seg[start:])
    return points


def _render_background(spec: SceneSpec, rng: np.random.Generator) -> np.ndarray:
    h, w = spec.height, spec.width
    bg = spec.background
    img = np.empty((h, w, 3), dtype=np.uint8)
    if bg.kind == BACKGROUND_UNIFORM:
        img[:] = bg.color
    elif bg.kind == BACKGROUND_CHECKERBOARD:
        yy, xx = np.mgrid[0:h, 0:w]
        odd = ((yy // bg.cell) + (xx // bg.cell)) % 2 == 1
        img[:] = bg.color
        img[odd] = bg.color2
    elif bg.kind == BACKGROUND_NOISE:
        cells_y = h // bg.cell + 1
        cells_x = w // bg.cell + 1
        lo = np.minimum(bg.color, bg.color2)
        hi = np.maximum(bg.color, bg.color2)
        blocks = rng.integers(lo, hi + 1, size=(cells_y, cells_x, 3), dtype=np.int64)
        img[:] = np.repeat(np.repeat(blocks, bg.cell, 0), bg.cell, 1)[:h, :w].astype(
            np.uint8
        )
    else:
        raise ValueError(f"unknown background kind {bg.kind!r}")
    return img


def generate_scene(
    spec: SceneSpec,
) -> tuple[Image, GroundTruth, list[tuple[Point2, Point2]]]:
    """Render the scene; returns the image, full ground truth, and the true
    endpoint pair of every cable (walk seed sources)."""
    rng = np.random.default_rng(spec.rng_seed)
    pixels = _render_background(spec, rng)
    dims = (spec.height, spec.width)

    masks = []
    polylines = []
    for cable in spec.cables:
        line = cable_polyline(cable)
        r = cable.width_px / 2.0
        for p in line:
            if not (r <= p.x <= spec.width - 1 - r and r <= p.y <= spec.height - 1 - r):
                raise ValueError(
                    f"cable stroke leaves the image bounds at ({p.x:.1f}, {p.y:.1f})"
                )
        mask = stroke_polyline_mask(line, cable.width_px, dims)
        pixels[mask] = cable.color
        masks.append(mask)
        polylines.append(line)

    union = np.zeros(dims, dtype=bool)
    for m in masks:
        union |= m
    truth = GroundTruth(cable_masks=masks, union_mask=union, cable_points=polylines)
    endpoints = [(line[0], line[-1]) for line in polylines]
    return Image(pixels), truth, endpoints


# ---------------------------------------------------------------------------
# Randomized spec builders (bounded-turn waypoint walks)
# ---------------------------------------------------------------------------


def _heading_vec(steps: int) -> tuple[float, float]:
    a = math.radians(steps * TURN_STEP_DEG)
    return math.cos(a), math.sin(a)


def _chain_from_waypoints(
    waypoints: list[tuple[float, float]], headings: list[int]
) -> tuple[tuple[tuple[float, float], ...], ...]:
    """G1 cubic chain: tangents at each waypoint follow its heading."""
    segments = []
    for i in range(len(waypoints) - 1):
        p0 = waypoints[i]
        p3 = waypoints[i + 1]
        length = math.dist(p0, p3)
        u0 = _heading_vec(headings[i])
        u1 = _heading_vec(headings[i + 1])
        p1 = (p0[0] + u0[0] * length / 3.0, p0[1] + u0[1] * length / 3.0)
        p2 = (p3[0] - u1[0] * length / 3.0, p3[1] - u1[1] * length / 3.0)
        segments.append((p0, p1, p2, p3))
    return tuple(segments)


def _walk_waypoints(
    rng: np.random.Generator,
    start: tuple[float, float],
    heading_steps: int,
    n_segments: int,
    seg_len_range: tuple[int, int],
    heading_limits: Optional[tuple[int, int]] = None,
) -> tuple[list[tuple[float, float]], list[int]]:
    waypoints = [start]
    headings = [heading_steps]
    x, y = start
    h = heading_steps
    for _ in range(n_segments):
        turn = int(rng.integers(-MAX_TURN_STEPS, MAX_TURN_STEPS + 1))
        h2 = h + turn
        if heading_limits is not None:
            h2 = max(heading_limits[0], min(heading_limits[1], h2))
        length = int(rng.integers(seg_len_range[0], seg_len_range[1] + 1))
        ux, uy = _heading_vec(h2)
        x, y = x + ux * length, y + uy * length
        waypoints.append((x, y))
        headings.append(h2)
        h = h2
    return waypoints, headings


def _inside(
    points,
    margin: float,
    width: int,
    height: int,
    band: Optional[tuple[float, float]] = None,
) -> bool:
    for x, y in points:
        if not (margin <= x <= width - 1 - margin and margin <= y <= height - 1 - margin):
            return False
        if band is not None and not (band[0] <= y <= band[1]):
            return False
    return True


def _cable_fits(
    cable: CableSpec,
    width: int,
    height: int,
    band: Optional[tuple[float, float]] = None,
) -> bool:
    """Validate the actual sampled stroke, not just the waypoints: Bezier
    segments can overshoot their control polygon between joints."""
    margin = cable.width_px / 2.0 + 2.0
    line = [(p.x, p.y) for p in cable_polyline(cable)]
    return _inside(line, margin, width, height, band)


def homogeneous_scene_spec(
    seed: int,
    dims: tuple[int, int] = (640, 480),
    cable_count: Optional[int] = None,
    width_range: tuple[int, int] = (8, 15),
    background: BackgroundSpec = BackgroundSpec(),
) -> SceneSpec:
    """1-3 non-crossing cables in disjoint horizontal bands."""
    w, h = dims
    rng = np.random.default_rng(seed)
    if cable_count is None:
        cable_count = int(rng.integers(1, 4))
    band_h = h / cable_count

    colors = [CABLE_PALETTE[int(i)] for i in rng.permutation(len(CABLE_PALETTE))]
    cables = []
    for k in range(cable_count):
        width_px = int(rng.integers(width_range[0], width_range[1] + 1))
        margin = width_px / 2.0 + 4.0
        band = (k * band_h + margin, (k + 1) * band_h - margin)
        for _ in range(400):
            x0 = int(rng.integers(20, 60))
            y0 = int(rng.integers(int(band[0]) + 10, int(band[1]) - 10))
            n_seg = int(rng.integers(5, 9))
            seg_len = (int((w - 120) / n_seg) - 10, int((w - 80) / n_seg))
            waypoints, headings = _walk_waypoints(
                rng, (float(x0), float(y0)), 0, n_seg, seg_len, heading_limits=(-2, 2)
            )
            candidate = CableSpec(
                segments=_chain_from_waypoints(waypoints, headings),
                width_px=width_px,
                color=colors[k],
            )
            if _inside(waypoints, margin, w, h, band) and _cable_fits(
                candidate, w, h, band
            ):
                cables.append(candidate)
                break
        else:
            raise RuntimeError(f"could not place cable {k} for seed {seed}")
    return SceneSpec(
        width=w, height=h, cables=tuple(cables), background=background, rng_seed=seed
    )


def crossing_scene_spec(
    seed: int,
    dims: tuple[int, int] = (640, 480),
    width_range: tuple[int, int] = (8, 15),
    background: BackgroundSpec = BackgroundSpec(),
) -> SceneSpec:
    """Two distinctly colored cables, one mostly horizontal and one mostly
    vertical, guaranteed to cross near the image center."""
    w, h = dims
    rng = np.random.default_rng(seed)
    color_a, color_b = (
        CABLE_PALETTE[int(i)] for i in rng.choice(len(CABLE_PALETTE), 2, replace=False)
    )

    cables = []
    for orient, color in ((0, color_a), (4, color_b)):  # 0: +x, 4: +y (90 deg)
        width_px = int(rng.integers(width_range[0], width_range[1] + 1))
        margin = width_px / 2.0 + 4.0
        extent = w if orient == 0 else h
        lateral = h if orient == 0 else w
        for _ in range(400):
            a0 = int(rng.integers(20, 60))
            lat0 = int(rng.integers(int(lateral * 0.35), int(lateral * 0.65)))
            n_seg = int(rng.integers(5, 8))
            seg_len = (int((extent - 120) / n_seg) - 8, int((extent - 80) / n_seg))
            start = (float(a0), float(lat0)) if orient == 0 else (float(lat0), float(a0))
            waypoints, headings = _walk_waypoints(
                rng, start, orient, n_seg, seg_len,
                heading_limits=(orient - 1, orient + 1),
            )
            candidate = CableSpec(
                segments=_chain_from_waypoints(waypoints, headings),
                width_px=width_px,
                color=color,
            )
            if _inside(waypoints, margin, w, h) and _cable_fits(candidate, w, h):
                cables.append(candidate)
                break
        else:
            raise RuntimeError(f"could not place crossing cable for seed {seed}")
    return SceneSpec(
        width=w, height=h, cables=tuple(cables), background=background, rng_seed=seed
    )


def self_crossing_scene_spec(
    seed: int,
    dims: tuple[int, int] = (640, 480),
    width_range: tuple[int, int] = (8, 14),
    background: BackgroundSpec = BackgroundSpec(),
) -> SceneSpec:
    """One cable that crosses itself: a rightward entry tail, a 270-degree
    loop curling up and over (six 45-degree turns), then a descending exit
    that cuts back down through the horizontal entry tail."""
    w, h = dims
    rng = np.random.default_rng(seed)
    width_px = int(rng.integers(width_range[0], width_range[1] + 1))
    color = CABLE_PALETTE[int(rng.integers(0, len(CABLE_PALETTE)))]
    margin = width_px / 2.0 + 4.0

    for _ in range(400):
        loop_len = int(rng.integers(55, 85))
        tail_len = int(rng.integers(80, 130))
        # The exit descends at x = entry_end - 1.707 * loop_len; keep that
        # strictly inside the entry tail so the crossing is transversal.
        if 2 * tail_len <= 1.8 * loop_len:
            continue
        x0 = float(rng.integers(40, 120))
        y0 = float(rng.integers(int(h * 0.45), int(h * 0.62)))

        headings = [0, 0, 0]
        lengths = [tail_len, tail_len]
        hdg = 0
        for _ in range(6):
            hdg -= MAX_TURN_STEPS  # curl upward, over, and back down
            headings.append(hdg)
            lengths.append(loop_len)
        headings.append(hdg)  # heading -270 deg: straight down on screen
        lengths.append(tail_len)

        waypoints = [(x0, y0)]
        x, y = x0, y0
        for hh, ll in zip(headings[1:], lengths):
            ux, uy = _heading_vec(hh)
            x, y = x + ux * ll, y + uy * ll
            waypoints.append((x, y))
        cable = CableSpec(
            segments=_chain_from_waypoints(waypoints, headings),
            width_px=width_px,
            color=color,
        )
        if _inside(waypoints, margin, w, h) and _cable_fits(cable, w, h):
            return SceneSpec(
                width=w,
                height=h,
                cables=(cable,),
                background=background,
                rng_seed=seed,
            )
    raise RuntimeError(f"could not place self-crossing cable for seed {seed}")
