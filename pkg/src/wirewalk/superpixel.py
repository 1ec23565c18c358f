"""SLIC over-segmentation into compactness-controlled superpixels.

Localized k-means over 5D (l, a, b, x, y) vectors: cluster centers start on
a regular grid, each assignment sweep only looks at pixels within a 2S x 2S
window around a center, and a post-processing pass enforces 4-connectivity
of every region.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from PIL import Image as PILImage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .core import Image, LabPixel, Point2, rgb_array_to_lab


@dataclass(frozen=True)
class SlicParams:
    region_count: int
    compactness: float = 10.0
    max_iterations: int = 10
    min_region_fraction: float = 0.25

    def __post_init__(self):
        if self.region_count < 2:
            raise ValueError("region_count must be >= 2")
        if self.compactness <= 0:
            raise ValueError("compactness must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class RegionStats:
    id: int
    centroid: Point2
    area: int
    mean_lab: LabPixel
    mean_rgb: tuple[float, float, float]


@dataclass(frozen=True)
class SuperpixelMap:
    """Label field plus per-region statistics; immutable after construction.

    Keeps a reference to the source image so that downstream consumers
    (graph histograms, overlays, object color estimation) never need to be
    handed the image separately.
    """

    labels: np.ndarray = field(repr=False)
    regions: list[RegionStats]
    image: Image = field(repr=False)
    grid_interval: float

    @property
    def region_count(self) -> int:
        return len(self.regions)


def slic_segment(image: Image, params: SlicParams) -> SuperpixelMap:
    """Segment `image` into roughly `region_count` connected superpixels."""
    h, w = image.height, image.width
    n_pixels = h * w
    if params.region_count > n_pixels:
        raise ValueError(
            f"region_count {params.region_count} exceeds pixel count {n_pixels}"
        )

    lab = rgb_array_to_lab(image.pixels)
    s = np.sqrt(n_pixels / params.region_count)

    centers = _seed_centers(lab, w, h, s)
    labels = _assign_iterate(lab, centers, s, params)
    labels = _enforce_connectivity(labels, s, params.min_region_fraction)
    regions = _region_stats(labels, lab, image.pixels)
    return SuperpixelMap(labels=labels, regions=regions, image=image, grid_interval=s)


def _seed_centers(lab: np.ndarray, w: int, h: int, s: float) -> np.ndarray:
    """Regular S-spaced grid, each seed moved to the lowest-gradient pixel
    in its 3x3 window (ties keep the grid position)."""
    xs = np.arange(s / 2.0, w, s)
    ys = np.arange(s / 2.0, h, s)
    if xs.size == 0:
        xs = np.array([w / 2.0])
    if ys.size == 0:
        ys = np.array([h / 2.0])

    # Lab-space gradient magnitude; replicated borders keep it total.
    pad = np.pad(lab, ((1, 1), (1, 1), (0, 0)), mode="edge")
    gx = pad[1:-1, 2:] - pad[1:-1, :-2]
    gy = pad[2:, 1:-1] - pad[:-2, 1:-1]
    grad = (gx**2).sum(axis=2) + (gy**2).sum(axis=2)

    centers = []
    for cy in ys:
        for cx in xs:
            px, py = int(round(cx)), int(round(cy))
            px = min(max(px, 0), w - 1)
            py = min(max(py, 0), h - 1)
            x0, x1 = max(px - 1, 0), min(px + 2, w)
            y0, y1 = max(py - 1, 0), min(py + 2, h)
            window = grad[y0:y1, x0:x1]
            best = np.unravel_index(np.argmin(window), window.shape)
            if window[best] < grad[py, px]:
                py, px = y0 + best[0], x0 + best[1]
            centers.append([lab[py, px, 0], lab[py, px, 1], lab[py, px, 2], px, py])
    return np.asarray(centers, dtype=np.float64)


def _assign_iterate(
    lab: np.ndarray, centers: np.ndarray, s: float, params: SlicParams
) -> np.ndarray:
    """k-means sweeps with the SLIC 2S x 2S locality rule.

    Ties in the nearest-center assignment break toward the lower center id:
    centers are visited in ascending id order and only strictly better
    distances steal a pixel. Distances use the expansion
    ||p - c||^2 = ||p||^2 - 2 p.c + ||c||^2 over weighted 5D features so the
    inner loop is one window matmul per center.
    """
    h, w = lab.shape[:2]
    xs = np.arange(w, dtype=np.float64)
    ys = np.arange(h, dtype=np.float64)
    root_w = params.compactness / s  # weight applied to the xy features

    xg, yg = np.meshgrid(xs, ys)
    feats = np.concatenate(
        [lab, (root_w * xg)[..., None], (root_w * yg)[..., None]], axis=2
    )
    feats_sq = (feats**2).sum(axis=2)

    labels = np.full((h, w), -1, dtype=np.int32)
    for _ in range(params.max_iterations):
        c5 = centers.copy()
        c5[:, 3] *= root_w
        c5[:, 4] *= root_w
        c_sq = (c5**2).sum(axis=1)

        best = np.full((h, w), np.inf, dtype=np.float64)
        labels.fill(-1)
        for cid in range(len(centers)):
            cx, cy = centers[cid, 3], centers[cid, 4]
            x0, x1 = int(max(cx - s, 0)), int(min(cx + s + 1, w))
            y0, y1 = int(max(cy - s, 0)), int(min(cy + s + 1, h))
            if x0 >= x1 or y0 >= y1:
                continue
            d = feats_sq[y0:y1, x0:x1] - 2.0 * (feats[y0:y1, x0:x1] @ c5[cid])
            sub = best[y0:y1, x0:x1]
            better = d < sub - c_sq[cid]  # equivalent to d + c_sq < sub
            sub[better] = d[better] + c_sq[cid]
            labels[y0:y1, x0:x1][better] = cid

        # Pixels outside every window (possible on ragged grids): nearest
        # center by full 5D distance, lowest id on ties.
        miss_y, miss_x = np.nonzero(labels < 0)
        for py, px in zip(miss_y, miss_x):
            d = c_sq - 2.0 * (c5 @ feats[py, px]) + feats_sq[py, px]
            labels[py, px] = int(np.argmin(d))

        # Update sweep: each center moves to the mean of its pixels.
        flat = labels.ravel()
        counts = np.bincount(flat, minlength=len(centers)).astype(np.float64)
        nonzero = counts > 0
        for dim, values in enumerate(
            [lab[:, :, 0], lab[:, :, 1], lab[:, :, 2], xg, yg]
        ):
            sums = np.bincount(flat, weights=values.ravel(), minlength=len(centers))
            centers[nonzero, dim] = sums[nonzero] / counts[nonzero]
    return labels


def _connected_component_ids(labels: np.ndarray) -> tuple[np.ndarray, int]:
    """4-connected components of an integer label field, all labels at once."""
    h, w = labels.shape
    idx = np.arange(h * w).reshape(h, w)

    right = labels[:, :-1] == labels[:, 1:]
    down = labels[:-1, :] == labels[1:, :]
    src = np.concatenate([idx[:, :-1][right], idx[:-1, :][down]])
    dst = np.concatenate([idx[:, 1:][right], idx[1:, :][down]])

    graph = coo_matrix(
        (np.ones(len(src), dtype=np.int8), (src, dst)), shape=(h * w, h * w)
    )
    n_comp, comp = connected_components(graph, directed=False)
    return comp.reshape(h, w), n_comp


def _enforce_connectivity(
    labels: np.ndarray, s: float, min_region_fraction: float
) -> np.ndarray:
    """Split disconnected label fragments and merge undersized ones.

    Every 4-connected component becomes a candidate region; components
    smaller than min_region_fraction * S^2 are absorbed into their
    largest-area 4-adjacent neighbor. Final ids are compacted to [0, n).
    """
    h, w = labels.shape
    comp, n_comp = _connected_component_ids(labels)
    areas = np.bincount(comp.ravel(), minlength=n_comp).astype(np.int64)
    min_area = max(1, int(round(min_region_fraction * s * s)))

    # Component adjacency from horizontal/vertical boundary pairs.
    pairs = set()
    a, b = comp[:, :-1], comp[:, 1:]
    diff = a != b
    pairs.update(zip(a[diff].tolist(), b[diff].tolist()))
    a, b = comp[:-1, :], comp[1:, :]
    diff = a != b
    pairs.update(zip(a[diff].tolist(), b[diff].tolist()))
    neighbors: list[set[int]] = [set() for _ in range(n_comp)]
    for u, v in pairs:
        neighbors[u].add(v)
        neighbors[v].add(u)

    # Union-find; small roots merge into their largest-area adjacent root,
    # repeated until every surviving root clears the size floor (or has no
    # neighbor left to join).
    parent = list(range(n_comp))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    merged = True
    while merged:
        merged = False
        roots = sorted({find(i) for i in range(n_comp)}, key=lambda r: (areas[r], r))
        for root in roots:
            if find(root) != root or areas[root] >= min_area:
                continue
            adjacent = {find(n) for n in neighbors[root]}
            adjacent.discard(root)
            if not adjacent:
                continue
            target = max(adjacent, key=lambda r: (areas[r], -r))
            parent[root] = target
            areas[target] += areas[root]
            neighbors[target] |= neighbors[root]
            merged = True

    final = np.array([find(i) for i in range(n_comp)])
    uniq, compact = np.unique(final, return_inverse=True)
    return compact[comp].astype(np.int32)


def _region_stats(
    labels: np.ndarray, lab: np.ndarray, rgb: np.ndarray
) -> list[RegionStats]:
    h, w = labels.shape
    flat = labels.ravel()
    n = int(flat.max()) + 1
    counts = np.bincount(flat, minlength=n).astype(np.float64)

    xg, yg = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    cx = np.bincount(flat, weights=xg.ravel(), minlength=n) / counts
    cy = np.bincount(flat, weights=yg.ravel(), minlength=n) / counts

    def channel_mean(values: np.ndarray) -> np.ndarray:
        return np.bincount(flat, weights=values.ravel(), minlength=n) / counts

    lab_means = [channel_mean(lab[:, :, i]) for i in range(3)]
    rgb_means = [channel_mean(rgb[:, :, i].astype(np.float64)) for i in range(3)]

    return [
        RegionStats(
            id=i,
            centroid=Point2(float(cx[i]), float(cy[i])),
            area=int(counts[i]),
            mean_lab=LabPixel(
                float(lab_means[0][i]), float(lab_means[1][i]), float(lab_means[2][i])
            ),
            mean_rgb=(
                float(rgb_means[0][i]),
                float(rgb_means[1][i]),
                float(rgb_means[2][i]),
            ),
        )
        for i in range(n)
    ]


def region_adjacency_pairs(spmap: SuperpixelMap) -> set[tuple[int, int]]:
    """Unordered region-id pairs that share a 4-adjacent pixel boundary."""
    labels = spmap.labels
    pairs: set[tuple[int, int]] = set()
    for a, b in (
        (labels[:, :-1], labels[:, 1:]),
        (labels[:-1, :], labels[1:, :]),
    ):
        diff = a != b
        u = a[diff]
        v = b[diff]
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        pairs.update(zip(lo.tolist(), hi.tolist()))
    return pairs


def boundary_mask(labels: np.ndarray) -> np.ndarray:
    """Pixels adjacent (4-neighborhood) to a different label."""
    mask = np.zeros(labels.shape, dtype=bool)
    dx = labels[:, :-1] != labels[:, 1:]
    dy = labels[:-1, :] != labels[1:, :]
    mask[:, :-1] |= dx
    mask[:, 1:] |= dx
    mask[:-1, :] |= dy
    mask[1:, :] |= dy
    return mask


def save_label_png(spmap: SuperpixelMap, path) -> None:
    """Debug dump of the label field as a 16-bit PNG."""
    if spmap.region_count > 0xFFFF:
        raise ValueError("too many regions for a 16-bit label image")
    PILImage.fromarray(spmap.labels.astype(np.uint16)).save(path, format="PNG")


def boundary_overlay(spmap: SuperpixelMap, color=(255, 0, 0)) -> Image:
    """Source image with region boundaries painted in `color`."""
    out = spmap.image.pixels.copy()
    out[boundary_mask(spmap.labels)] = np.asarray(color, dtype=np.uint8)
    return Image(out)
