"""Region adjacency graph over superpixels.

One vertex per region carrying its centroid, area and a normalized 3D HSV
color histogram; undirected edges between 4-adjacent regions; breadth-first
neighborhood queries up to a configurable hop order so walks can jump over
occluding regions.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .core import Point2, rgb_array_to_hsv
from .superpixel import SuperpixelMap, region_adjacency_pairs

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ColorHistogram:
    """Cubic HSV histogram, bins_per_channel^3 cells, optionally normalized."""

    bins: np.ndarray = field(repr=False)
    normalized: bool = True

    def __post_init__(self):
        b = np.asarray(self.bins, dtype=np.float64)
        if b.ndim != 3 or len(set(b.shape)) != 1:
            raise ValueError(f"expected cubic (B, B, B) histogram, got {b.shape}")
        if (b < 0).any():
            raise ValueError("histogram bins must be non-negative")
        object.__setattr__(self, "bins", b)

    @property
    def bins_per_channel(self) -> int:
        return self.bins.shape[0]


class NeighborhoodEntry(NamedTuple):
    vertex_id: int
    hop_order: int


@dataclass(frozen=True)
class VertexRecord:
    id: int
    centroid: Point2
    area: int
    histogram: ColorHistogram


@dataclass
class RegionGraph:
    """Undirected region adjacency graph; structure immutable after build.

    `seed_flags` is per-run annotation (which vertices host walk seeds) and
    the only field callers are expected to write.
    """

    vertices: list[VertexRecord]
    adjacency: list[list[int]]
    order: int
    seed_flags: np.ndarray = field(repr=False)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    def centroid(self, vertex_id: int) -> Point2:
        return self.vertices[vertex_id].centroid

    def edge_list(self) -> list[tuple[int, int]]:
        return sorted(
            (u, v) for u, nbrs in enumerate(self.adjacency) for v in nbrs if u < v
        )


def hsv_bin_index(hsv: np.ndarray, bins_per_channel: int) -> np.ndarray:
    """Flattened bin index per pixel; values at an upper edge land in the
    last bin so binning is total."""
    b = bins_per_channel
    hi = np.minimum((hsv[..., 0] / 360.0 * b).astype(np.int64), b - 1)
    si = np.minimum((hsv[..., 1] * b).astype(np.int64), b - 1)
    vi = np.minimum((hsv[..., 2] * b).astype(np.int64), b - 1)
    return (hi * b + si) * b + vi


def build_graph(
    spmap: SuperpixelMap, histogram_bins: int = 8, order: int = 3
) -> RegionGraph:
    """Build the adjacency graph with per-region normalized HSV histograms."""
    if histogram_bins < 2:
        raise ValueError("histogram_bins must be >= 2")
    if order < 1:
        raise ValueError("order must be >= 1")

    n = spmap.region_count
    hsv = rgb_array_to_hsv(spmap.image.pixels)
    flat_bin = hsv_bin_index(hsv, histogram_bins).ravel()
    flat_label = spmap.labels.ravel().astype(np.int64)

    # One bincount over joint (region, bin) codes gives every histogram.
    cells = histogram_bins**3
    joint = flat_label * cells + flat_bin
    counts = np.bincount(joint, minlength=n * cells).reshape(n, cells)

    vertices = []
    for region in spmap.regions:
        h = counts[region.id].astype(np.float64) / region.area
        vertices.append(
            VertexRecord(
                id=region.id,
                centroid=region.centroid,
                area=region.area,
                histogram=ColorHistogram(
                    h.reshape(histogram_bins, histogram_bins, histogram_bins)
                ),
            )
        )

    adjacency: list[list[int]] = [[] for _ in range(n)]
    for u, v in region_adjacency_pairs(spmap):
        adjacency[u].append(v)
        adjacency[v].append(u)
    for nbrs in adjacency:
        nbrs.sort()

    return RegionGraph(
        vertices=vertices,
        adjacency=adjacency,
        order=order,
        seed_flags=np.zeros(n, dtype=bool),
    )


def neighborhood(
    graph: RegionGraph,
    vertex: int,
    max_order: int,
    excluded: Iterable[int] = (),
) -> list[NeighborhoodEntry]:
    """BFS shell of vertices within `max_order` hops of `vertex`.

    The query vertex and `excluded` never appear in the result; excluded
    vertices still conduct (they are skipped as candidates, not removed from
    the graph). Entries come back sorted by (hop_order, vertex_id).
    """
    if not 0 <= vertex < graph.vertex_count:
        raise KeyError(f"unknown vertex id {vertex}")
    if max_order > graph.order:
        raise ValueError(f"max_order {max_order} exceeds graph order {graph.order}")

    skip = set(excluded)
    hops = {vertex: 0}
    queue = deque([vertex])
    result = []
    while queue:
        u = queue.popleft()
        if hops[u] == max_order:
            continue
        for v in graph.adjacency[u]:
            if v in hops:
                continue
            hops[v] = hops[u] + 1
            queue.append(v)
            if v != vertex and v not in skip:
                result.append(NeighborhoodEntry(v, hops[v]))
    result.sort(key=lambda e: (e.hop_order, e.vertex_id))
    return result


def histogram_similarity(a: ColorHistogram, b: ColorHistogram) -> float:
    """Histogram intersection sum(min(a, b)); 1 iff identical, 0 if disjoint."""
    if a.bins.shape != b.bins.shape:
        raise ValueError(f"histogram shape mismatch: {a.bins.shape} vs {b.bins.shape}")
    for h in (a, b):
        if not h.normalized or abs(h.bins.sum() - 1.0) > 1e-9:
            raise ValueError("histogram_similarity requires normalized histograms")
    return float(np.minimum(a.bins, b.bins).sum())


# ---------------------------------------------------------------------------
# JSON dump/load (debugging and the UI overlay endpoint)
# ---------------------------------------------------------------------------


def graph_to_dict(graph: RegionGraph) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "order": graph.order,
        "bins_per_channel": graph.vertices[0].histogram.bins_per_channel
        if graph.vertices
        else 0,
        "vertices": [
            {
                "id": v.id,
                "centroid": [v.centroid.x, v.centroid.y],
                "area": v.area,
                "histogram": v.histogram.bins.ravel().tolist(),
            }
            for v in graph.vertices
        ],
        "edges": [[u, v] for u, v in graph.edge_list()],
        "seed_flags": graph.seed_flags.astype(int).tolist(),
    }


def graph_from_dict(doc: dict) -> RegionGraph:
    if doc.get("version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported graph schema version {doc.get('version')}")
    b = doc["bins_per_channel"]
    vertices = [
        VertexRecord(
            id=v["id"],
            centroid=Point2(*v["centroid"]),
            area=v["area"],
            histogram=ColorHistogram(np.asarray(v["histogram"]).reshape(b, b, b)),
        )
        for v in doc["vertices"]
    ]
    adjacency: list[list[int]] = [[] for _ in vertices]
    for u, v in doc["edges"]:
        adjacency[u].append(v)
        adjacency[v].append(u)
    for nbrs in adjacency:
        nbrs.sort()
    return RegionGraph(
        vertices=vertices,
        adjacency=adjacency,
        order=doc["order"],
        seed_flags=np.asarray(doc["seed_flags"], dtype=bool),
    )


def save_graph_json(graph: RegionGraph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(graph)))


def load_graph_json(path: str | Path) -> RegionGraph:
    return graph_from_dict(json.loads(Path(path).read_text()))
