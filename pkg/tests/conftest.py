import numpy as np
import pytest

from wirewalk.core import Image, Point2
from wirewalk.graph import ColorHistogram, RegionGraph, VertexRecord
from wirewalk.superpixel import SuperpixelMap, _region_stats
from wirewalk.core import rgb_array_to_lab


def image_from_array(arr) -> Image:
    return Image(np.asarray(arr, dtype=np.uint8))


def uniform_image(width: int, height: int, color=(128, 128, 128)) -> Image:
    px = np.empty((height, width, 3), dtype=np.uint8)
    px[:] = color
    return Image(px)


def map_from_labels(labels: np.ndarray, image: Image) -> SuperpixelMap:
    """Hand-built SuperpixelMap for fixtures that bypass SLIC."""
    labels = np.asarray(labels, dtype=np.int32)
    lab = rgb_array_to_lab(image.pixels)
    regions = _region_stats(labels, lab, image.pixels)
    s = float(np.sqrt(labels.size / len(regions)))
    return SuperpixelMap(labels=labels, regions=regions, image=image, grid_interval=s)


def normalized_histogram(weights, bins=2) -> ColorHistogram:
    """Cubic histogram with the given cell weights placed in raveled order."""
    data = np.zeros(bins**3)
    for i, w in enumerate(weights):
        data[i] = w
    total = data.sum()
    if total > 0:
        data = data / total
    return ColorHistogram(data.reshape(bins, bins, bins))


def graph_from_positions(
    positions: list[tuple[float, float]],
    edges: list[tuple[int, int]],
    histograms=None,
    areas=None,
    order: int = 3,
) -> RegionGraph:
    """Hand-built RegionGraph for walker/graph unit fixtures."""
    n = len(positions)
    if histograms is None:
        histograms = [normalized_histogram([1.0]) for _ in range(n)]
    if areas is None:
        areas = [100] * n
    vertices = [
        VertexRecord(
            id=i,
            centroid=Point2(float(x), float(y)),
            area=int(areas[i]),
            histogram=histograms[i],
        )
        for i, (x, y) in enumerate(positions)
    ]
    adjacency = [[] for _ in range(n)]
    for u, v in edges:
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


@pytest.fixture
def half_split_map() -> SuperpixelMap:
    """16x8 image, left half black (region 0), right half white (region 1)."""
    px = np.zeros((8, 16, 3), dtype=np.uint8)
    px[:, 8:] = 255
    labels = np.zeros((8, 16), dtype=np.int32)
    labels[:, 8:] = 1
    return map_from_labels(labels, Image(px))


@pytest.fixture
def quad_grid_map() -> SuperpixelMap:
    """2x2 grid of four 8x8 regions with distinct colors."""
    px = np.zeros((16, 16, 3), dtype=np.uint8)
    colors = [(255, 0, 0), (0, 255, 0), (0, 0, 255), (255, 255, 0)]
    labels = np.zeros((16, 16), dtype=np.int32)
    for i, (ry, rx) in enumerate([(0, 0), (0, 8), (8, 0), (8, 8)]):
        px[ry : ry + 8, rx : rx + 8] = colors[i]
        labels[ry : ry + 8, rx : rx + 8] = i
    return map_from_labels(labels, Image(px))


@pytest.fixture
def path_graph() -> RegionGraph:
    """0 - 1 - 2 - 3 on a line, unit spacing."""
    return graph_from_positions(
        [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)],
        [(0, 1), (1, 2), (2, 3)],
    )
