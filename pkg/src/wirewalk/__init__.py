"""Deformable linear object segmentation on superpixel region graphs.

Pipeline: SLIC over-segmentation -> region adjacency graph with HSV
histograms -> greedy likelihood-guided walks between seed endpoints ->
per-object B-spline models and rasterized masks.
"""

from .core import Image, LabPixel, HsvPixel, Point2, load_image
from .pipeline import PipelineConfig, segment_image
from .walker import Seed, Walk, WalkerParams

__all__ = [
    "Image",
    "LabPixel",
    "HsvPixel",
    "Point2",
    "load_image",
    "PipelineConfig",
    "segment_image",
    "Seed",
    "Walk",
    "WalkerParams",
]

__version__ = "0.1.0"
