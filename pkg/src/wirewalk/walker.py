"""Greedy likelihood-guided walks over the region adjacency graph.

A walk grows from a seed vertex one step at a time, always appending the
candidate that maximizes the product of three likelihood densities:

  visual     Bradford density of the color-histogram dissimilarity between
             the walk's last vertex and the candidate,
  curvature  von Mises density of half the change in edge orientation, so
             smoothly bending sequences are preferred,
  distance   Bradford density of the candidate's centroid distance,
             normalized by the farthest candidate this step.

Candidates come from a bounded-hop neighborhood of the current vertex, so
a walk can jump over an occluding region at an intersection. Walks close
when they come within a radius of another seed; per seed pair the closed
walk with the best selection score (per-step smoothness anchored by
appearance consistency with the seed region) survives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .core import Point2, euclidean_distance
from .graph import RegionGraph, neighborhood

TWO_PI = 2.0 * math.pi

WALK_ACTIVE = "active"
WALK_CLOSED = "closed"
WALK_ABORTED = "aborted"


@dataclass(frozen=True)
class WalkerParams:
    c_visual: float = 10.0
    c_distance: float = 2.0
    von_mises_m: float = 4.0
    graph_order: int = 3
    max_steps: int = 200
    termination_radius_px: Optional[float] = None  # None: 2 x mean spacing
    min_step_likelihood: float = 1e-6
    backtrack_window: int = 2

    def __post_init__(self):
        for name in (
            "c_visual",
            "c_distance",
            "von_mises_m",
            "graph_order",
            "max_steps",
            "min_step_likelihood",
            "backtrack_window",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.termination_radius_px is not None and self.termination_radius_px <= 0:
            raise ValueError("termination_radius_px must be positive")


@dataclass(frozen=True)
class Seed:
    id: int
    vertex_id: int
    source_point: Point2


class StepScore(NamedTuple):
    candidate: int
    p_visual: float
    p_curvature: float
    p_distance: float
    p_total: float


@dataclass
class Walk:
    """Ordered vertex sequence with cached geometry and likelihood state.

    Repeated vertices are allowed (self-crossing objects revisit regions);
    only the trailing backtrack window is off limits per step.
    """

    vertices: list[int]
    seed_start: int
    seed_end: Optional[int] = None
    status: str = WALK_ACTIVE
    edge_angles: list[float] = field(default_factory=list)
    log_curvature_score: float = 0.0
    seed_appearance_score: float = 0.0
    steps: Optional[list[StepScore]] = None

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def angle_term_count(self) -> int:
        return max(0, len(self.edge_angles) - 1)

    @property
    def mean_log_curvature(self) -> float:
        n = self.angle_term_count
        return self.log_curvature_score / n if n > 0 else 0.0

    @property
    def selection_score(self) -> float:
        """Smoothness per step plus appearance consistency with the walk's
        own seed region. Curvature alone cannot tell an on-object walk from
        a straight shortcut across a featureless background; anchoring the
        score to the seed's histogram can."""
        return self.mean_log_curvature + self.seed_appearance_score


# ---------------------------------------------------------------------------
# Likelihood primitives
# ---------------------------------------------------------------------------


def bradford_likelihood(x: float, c: float) -> float:
    """Decreasing density c / (ln(1+c) * (1 + c*x)) on [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x={x} outside [0, 1]")
    if c <= 0:
        raise ValueError("shape parameter c must be positive")
    return c / (math.log1p(c) * (1.0 + c * x))


def bessel_i0(z: float) -> float:
    """Modified Bessel function of order zero by its power series.

    Terms are accumulated until they stop contributing at double precision,
    comfortably below 1e-12 relative error for the concentrations in use.
    """
    zz = z * z / 4.0
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= zz / (k * k)
        total += term
        if term < total * 1e-17:
            return total


def von_mises(theta: float, m: float) -> float:
    """Circular density exp(m cos(theta)) / (2 pi I0(m)); even, peaked at 0."""
    if m <= 0:
        raise ValueError("concentration m must be positive")
    return math.exp(m * math.cos(theta)) / (TWO_PI * bessel_i0(m))


def wrap_angle(theta: float) -> float:
    """Wrap into (-pi, pi]."""
    w = (theta + math.pi) % TWO_PI - math.pi
    if w == -math.pi:
        w = math.pi
    return w


def edge_angle(p_from: Point2, p_to: Point2) -> float:
    """Orientation in (-pi, pi] of the segment joining two centroids."""
    dx = p_to.x - p_from.x
    dy = p_to.y - p_from.y
    if dx == 0.0 and dy == 0.0:
        raise ValueError("edge angle undefined for coincident points")
    return math.atan2(dy, dx)


# ---------------------------------------------------------------------------
# Per-candidate likelihood terms (contract-level operations)
# ---------------------------------------------------------------------------


def visual_likelihood(
    walk: Walk, candidate: int, graph: RegionGraph, params: WalkerParams
) -> float:
    from .graph import histogram_similarity

    sim = histogram_similarity(
        graph.vertices[walk.vertices[-1]].histogram,
        graph.vertices[candidate].histogram,
    )
    # Intersection can drift a hair above 1 through float round-off.
    return bradford_likelihood(min(max(1.0 - sim, 0.0), 1.0), params.c_visual)


def curvature_likelihood(
    walk: Walk, candidate: int, graph: RegionGraph, params: WalkerParams
) -> float:
    """Ranking term for the candidate: the single von Mises factor of the
    angle difference introduced by the new edge.

    Extended walks shorter than 3 vertices carry no curvature information
    and score the neutral value 1. Terms shared by every candidate (the
    walk's existing angle differences) cancel in the argmax and are tracked
    incrementally in log space instead.
    """
    if len(walk.vertices) < 2:
        return 1.0
    new_angle = edge_angle(
        graph.centroid(walk.vertices[-1]), graph.centroid(candidate)
    )
    prev_angle = walk.edge_angles[-1]
    half_diff = wrap_angle(prev_angle - new_angle) / 2.0
    return von_mises(half_diff, params.von_mises_m)


def distance_likelihood(
    walk: Walk,
    candidate: int,
    candidate_set: Sequence[int],
    graph: RegionGraph,
    params: WalkerParams,
) -> float:
    """Bradford density of the candidate distance over the farthest candidate,
    so nearer vertices always score at least as high."""
    if len(candidate_set) == 0:
        raise ValueError("empty candidate set")
    p_last = graph.centroid(walk.vertices[-1])
    d_max = max(euclidean_distance(p_last, graph.centroid(c)) for c in candidate_set)
    if d_max == 0.0:
        x = 1.0
    else:
        x = euclidean_distance(p_last, graph.centroid(candidate)) / d_max
    return bradford_likelihood(x, params.c_distance)


def score_candidates(
    walk: Walk, graph: RegionGraph, params: WalkerParams
) -> list[StepScore]:
    """Score every admissible next vertex; empty result means the walk must
    abort. Candidates and scores come back in (hop_order, vertex_id) order."""
    if walk.status != WALK_ACTIVE:
        raise ValueError(f"cannot score a walk with status {walk.status!r}")
    excluded = walk.vertices[-params.backtrack_window :]
    entries = neighborhood(
        graph, walk.vertices[-1], params.graph_order, excluded=excluded
    )
    candidates = [e.vertex_id for e in entries]
    scores = []
    for cand in candidates:
        pv = visual_likelihood(walk, cand, graph, params)
        pc = curvature_likelihood(walk, cand, graph, params)
        pd = distance_likelihood(walk, cand, candidates, graph, params)
        scores.append(StepScore(cand, pv, pc, pd, pv * pc * pd))
    return scores


def select_best(scores: Sequence[StepScore]) -> StepScore:
    """Highest p_total; exact ties broken by the lower vertex id."""
    best = max(s.p_total for s in scores)
    return min((s for s in scores if s.p_total == best), key=lambda s: s.candidate)


def extend_walk(walk: Walk, graph: RegionGraph, params: WalkerParams) -> Walk:
    """Append the argmax candidate in place; abort on an empty candidate set
    or when even the best step falls below the likelihood floor."""
    scores = score_candidates(walk, graph, params)
    if not scores:
        walk.status = WALK_ABORTED
        return walk
    best = select_best(scores)
    if best.p_total < params.min_step_likelihood:
        walk.status = WALK_ABORTED
        return walk
    _append_vertex(walk, best, graph, params)
    return walk


def _append_vertex(
    walk: Walk, chosen: StepScore, graph: RegionGraph, params: WalkerParams
) -> None:
    p_last = graph.centroid(walk.vertices[-1])
    p_new = graph.centroid(chosen.candidate)
    if p_last == p_new:
        # Distinct regions can share a centroid in degenerate maps; treat the
        # hop as continuing straight rather than failing the whole walk.
        angle = walk.edge_angles[-1] if walk.edge_angles else 0.0
    else:
        angle = edge_angle(p_last, p_new)
    if walk.edge_angles:
        half_diff = wrap_angle(walk.edge_angles[-1] - angle) / 2.0
        walk.log_curvature_score += math.log(von_mises(half_diff, params.von_mises_m))
    walk.vertices.append(chosen.candidate)
    walk.edge_angles.append(angle)
    if walk.steps is not None:
        walk.steps.append(chosen)


# ---------------------------------------------------------------------------
# Fast engine: per-vertex candidate tables precomputed once per graph
# ---------------------------------------------------------------------------


class _VertexRow(NamedTuple):
    ids: np.ndarray        # candidate vertex ids, (hop, id)-ordered
    angles: np.ndarray     # edge orientation from the vertex to each candidate
    dists: np.ndarray      # centroid distance to each candidate
    p_visual: np.ndarray   # Bradford visual term (static per pair)


class WalkEngine:
    """Vectorized stepper sharing immutable per-vertex tables across walks."""

    def __init__(self, graph: RegionGraph, params: WalkerParams):
        if params.graph_order > graph.order:
            raise ValueError(
                f"graph_order {params.graph_order} exceeds graph order {graph.order}"
            )
        self.graph = graph
        self.params = params
        self.step_count = 0
        self._rows: dict[int, _VertexRow] = {}
        self._hist = np.stack(
            [v.histogram.bins.ravel() for v in graph.vertices]
        ) if graph.vertices else np.zeros((0, 0))
        self._cx = np.array([v.centroid.x for v in graph.vertices])
        self._cy = np.array([v.centroid.y for v in graph.vertices])
        self._vm_norm = TWO_PI * bessel_i0(params.von_mises_m)
        self._log_bradford_c = math.log1p(params.c_visual)

    def row(self, vertex: int) -> _VertexRow:
        cached = self._rows.get(vertex)
        if cached is not None:
            return cached
        entries = neighborhood(self.graph, vertex, self.params.graph_order)
        ids = np.array([e.vertex_id for e in entries], dtype=np.int64)
        if ids.size:
            dx = self._cx[ids] - self._cx[vertex]
            dy = self._cy[ids] - self._cy[vertex]
            angles = np.arctan2(dy, dx)
            dists = np.hypot(dx, dy)
            sims = np.minimum(self._hist[ids], self._hist[vertex]).sum(axis=1)
            x = np.clip(1.0 - sims, 0.0, 1.0)
            c = self.params.c_visual
            p_visual = c / (self._log_bradford_c * (1.0 + c * x))
        else:
            angles = dists = p_visual = np.zeros(0)
        row = _VertexRow(ids, angles, dists, p_visual)
        self._rows[vertex] = row
        return row

    def seed_appearance(self, walk: Walk, seed_vertex: int) -> float:
        """Mean log Bradford visual likelihood of every visited vertex
        against the seed region's histogram (the seed itself excluded)."""
        verts = walk.vertices[1:]
        if not verts:
            return 0.0
        ids = np.asarray(verts, dtype=np.int64)
        sims = np.minimum(self._hist[ids], self._hist[seed_vertex]).sum(axis=1)
        x = np.clip(1.0 - sims, 0.0, 1.0)
        c = self.params.c_visual
        pv = c / (self._log_bradford_c * (1.0 + c * x))
        return float(np.mean(np.log(pv)))

    def step(self, walk: Walk) -> Optional[StepScore]:
        """One greedy extension; returns the chosen score or None on abort."""
        params = self.params
        self.step_count += 1
        row = self.row(walk.vertices[-1])
        ids, angles, dists, pv = row
        excluded = walk.vertices[-params.backtrack_window :]
        if excluded:
            keep = ids != excluded[0]
            for e in excluded[1:]:
                keep &= ids != e
            if not keep.all():
                ids = ids[keep]
                angles = angles[keep]
                dists = dists[keep]
                pv = pv[keep]
        if ids.size == 0:
            walk.status = WALK_ABORTED
            return None

        d_max = dists.max()
        c = params.c_distance
        x = dists / d_max if d_max > 0 else np.ones_like(dists)
        pd = c / (math.log1p(c) * (1.0 + c * x))

        if walk.edge_angles:
            half = _wrap_array(walk.edge_angles[-1] - angles) * 0.5
            pc = np.exp(params.von_mises_m * np.cos(half)) / self._vm_norm
            total = pv * pc * pd
        else:
            pc = None
            total = pv * pd

        pick = int(np.argmax(total))
        best_val = total[pick]
        if best_val < params.min_step_likelihood:
            walk.status = WALK_ABORTED
            return None
        # Exact ties break toward the lower vertex id; candidates are sorted
        # by (hop, id), so only resolve when a tie actually occurs.
        if np.count_nonzero(total == best_val) > 1:
            tied = np.flatnonzero(total == best_val)
            pick = int(tied[np.argmin(ids[tied])])
        chosen = StepScore(
            int(ids[pick]),
            float(pv[pick]),
            1.0 if pc is None else float(pc[pick]),
            float(pd[pick]),
            float(total[pick]),
        )
        _append_vertex(walk, chosen, self.graph, params)
        return chosen


def _wrap_array(theta: np.ndarray) -> np.ndarray:
    w = np.remainder(theta + math.pi, TWO_PI) - math.pi  # [-pi, pi)
    return np.where(w == -math.pi, math.pi, w)


# ---------------------------------------------------------------------------
# Walk lifecycle
# ---------------------------------------------------------------------------


@dataclass
class RunDiagnostics:
    walks_started: int = 0
    walks_closed: int = 0
    walks_aborted: int = 0
    walks_max_steps: int = 0
    extension_steps: int = 0
    unpaired_seed_ids: list[int] = field(default_factory=list)


@dataclass
class WalkRunResult:
    walks: list[Walk]
    diagnostics: RunDiagnostics


def default_termination_radius(graph: RegionGraph) -> float:
    """Twice the mean superpixel spacing sqrt(total area / vertex count)."""
    total = sum(v.area for v in graph.vertices)
    return 2.0 * math.sqrt(total / max(1, graph.vertex_count))


def run_walks(
    graph: RegionGraph,
    seeds: Sequence[Seed],
    params: WalkerParams,
    record_steps: bool = False,
) -> WalkRunResult:
    """Start one walk per bounded-hop neighbor of every seed, extend each
    greedily until it closes near another seed, aborts, or exhausts its step
    budget; keep the best-scoring closed walk per connected seed pair."""
    if len(seeds) < 2:
        raise ValueError("need at least 2 seeds to run walks")
    if len({s.id for s in seeds}) != len(seeds):
        raise ValueError("seed ids must be unique")

    engine = WalkEngine(graph, params)
    radius = (
        params.termination_radius_px
        if params.termination_radius_px is not None
        else default_termination_radius(graph)
    )
    diag = RunDiagnostics()
    closed_by_seed: dict[int, list[Walk]] = {s.id: [] for s in seeds}

    for seed in seeds:
        directions = neighborhood(graph, seed.vertex_id, params.graph_order)
        for entry in directions:
            walk = Walk(
                vertices=[seed.vertex_id],
                seed_start=seed.id,
                steps=[] if record_steps else None,
            )
            first = StepScore(entry.vertex_id, 1.0, 1.0, 1.0, 1.0)
            _append_vertex(walk, first, graph, params)
            diag.walks_started += 1
            hit_cap = _run_single(walk, engine, seeds, radius, params)
            if walk.status == WALK_CLOSED:
                diag.walks_closed += 1
                walk.seed_appearance_score = engine.seed_appearance(
                    walk, seed.vertex_id
                )
                closed_by_seed[seed.id].append(walk)
            elif hit_cap:
                diag.walks_max_steps += 1
            else:
                diag.walks_aborted += 1

    # Per seed keep the closed walk with the best selection score (per-step
    # smoothness anchored by seed appearance), then collapse duplicate
    # coverage of the same seed pair.
    best_by_pair: dict[tuple[int, int], Walk] = {}
    for seed in seeds:
        walks = closed_by_seed[seed.id]
        if not walks:
            diag.unpaired_seed_ids.append(seed.id)
            continue
        best = max(
            walks, key=lambda w: (w.selection_score, -len(w.vertices), -w.vertices[1])
        )
        pair = (min(best.seed_start, best.seed_end), max(best.seed_start, best.seed_end))
        incumbent = best_by_pair.get(pair)
        if incumbent is None or best.selection_score > incumbent.selection_score:
            best_by_pair[pair] = best

    diag.extension_steps = engine.step_count
    survivors = [best_by_pair[p] for p in sorted(best_by_pair)]
    return WalkRunResult(walks=survivors, diagnostics=diag)


def _run_single(
    walk: Walk,
    engine: WalkEngine,
    seeds: Sequence[Seed],
    radius: float,
    params: WalkerParams,
) -> bool:
    """Drive one walk to completion; True when it ran into the step cap."""
    graph = engine.graph
    steps = 0
    while True:
        p_last = graph.centroid(walk.vertices[-1])
        hit = _closing_seed(p_last, walk.seed_start, seeds, radius)
        if hit is not None:
            walk.status = WALK_CLOSED
            walk.seed_end = hit
            return False
        if steps >= params.max_steps:
            walk.status = WALK_ABORTED
            return True
        if engine.step(walk) is None:
            return False
        steps += 1


def _closing_seed(
    p: Point2, own_seed: int, seeds: Sequence[Seed], radius: float
) -> Optional[int]:
    """Nearest other seed within the closing radius (ties to the lower id)."""
    in_range = [
        (euclidean_distance(p, s.source_point), s.id)
        for s in seeds
        if s.id != own_seed
    ]
    in_range = [(d, sid) for d, sid in in_range if d <= radius]
    if not in_range:
        return None
    return min(in_range)[1]


# ---------------------------------------------------------------------------
# JSON export
# ---------------------------------------------------------------------------


def walk_to_dict(walk: Walk, graph: RegionGraph, verbose: bool = False) -> dict:
    doc = {
        "version": 1,
        "vertices": list(walk.vertices),
        "polyline": [
            [graph.centroid(v).x, graph.centroid(v).y] for v in walk.vertices
        ],
        "seed_start": walk.seed_start,
        "seed_end": walk.seed_end,
        "status": walk.status,
        "log_curvature_score": walk.log_curvature_score,
        "mean_log_curvature": walk.mean_log_curvature,
        "seed_appearance_score": walk.seed_appearance_score,
        "selection_score": walk.selection_score,
    }
    if verbose and walk.steps is not None:
        doc["steps"] = [
            {
                "candidate": s.candidate,
                "p_visual": s.p_visual,
                "p_curvature": s.p_curvature,
                "p_distance": s.p_distance,
                "p_total": s.p_total,
            }
            for s in walk.steps
        ]
    return doc
