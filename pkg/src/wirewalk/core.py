"""Image container, color-space conversions and small geometry helpers.

Everything here is pure: the same input always produces the same output,
and all containers are treated as immutable once built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from PIL import Image as PILImage

# sRGB companding constants and D65 reference white, the de-facto standard
# used by the superpixel literature.
_SRGB_THRESHOLD = 0.04045
_SRGB_EXPONENT = 2.4
_D65_WHITE = (0.95047, 1.0, 1.08883)

# sRGB -> CIE XYZ (D65) linear transform.
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)


class Point2(NamedTuple):
    """Real-valued 2D point in pixel coordinates (x right, y down)."""

    x: float
    y: float


class LabPixel(NamedTuple):
    l: float
    a: float
    b: float


class HsvPixel(NamedTuple):
    h: float  # degrees in [0, 360)
    s: float  # [0, 1]
    v: float  # [0, 1]


@dataclass(frozen=True)
class Image:
    """8-bit RGB image backed by a (height, width, 3) uint8 array."""

    pixels: np.ndarray = field(repr=False)

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) array, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be non-empty")
        if px.dtype != np.uint8:
            raise ValueError(f"expected uint8 pixels, got {px.dtype}")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def contains(self, p: Point2) -> bool:
        return 0 <= p.x < self.width and 0 <= p.y < self.height


def load_image(path: str | Path) -> Image:
    """Decode a PNG or JPEG file into an 8-bit RGB image (alpha discarded)."""
    with PILImage.open(path) as im:
        rgb = im.convert("RGB")
        return Image(np.asarray(rgb, dtype=np.uint8))


def save_mask_png(mask: np.ndarray, path: str | Path) -> None:
    """Write a binary mask as an 8-bit single-channel PNG (0 / 255)."""
    out = (np.asarray(mask, dtype=bool).astype(np.uint8)) * 255
    PILImage.fromarray(out, mode="L").save(path, format="PNG")


def load_mask_png(path: str | Path) -> np.ndarray:
    """Read an 8-bit mask PNG back to a boolean array."""
    with PILImage.open(path) as im:
        return np.asarray(im.convert("L")) > 127


def save_image_png(image: Image, path: str | Path) -> None:
    PILImage.fromarray(image.pixels, mode="RGB").save(path, format="PNG")


# ---------------------------------------------------------------------------
# Color conversions. The array variants accept any (..., 3) float/int input
# in [0, 255] and are what the pipeline uses; the scalar wrappers exist for
# convenience and for spot checks.
# ---------------------------------------------------------------------------


def rgb_array_to_lab(rgb: np.ndarray) -> np.ndarray:
    """Vectorized sRGB -> CIELAB over an (..., 3) array of [0, 255] values."""
    u = np.asarray(rgb, dtype=np.float64) / 255.0
    lin = np.where(
        u <= _SRGB_THRESHOLD,
        u / 12.92,
        ((u + 0.055) / 1.055) ** _SRGB_EXPONENT,
    )
    xyz = lin @ _RGB_TO_XYZ.T
    xyz = xyz / np.asarray(_D65_WHITE)

    delta = 6.0 / 29.0
    f = np.where(
        xyz > delta**3,
        np.cbrt(xyz),
        xyz / (3 * delta * delta) + 4.0 / 29.0,
    )
    fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]
    return np.stack([116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)], axis=-1)


def rgb_array_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """Vectorized hexcone RGB -> HSV; h in [0, 360), s and v in [0, 1].

    Achromatic pixels get hue 0 so that downstream histograms stay total.
    """
    u = np.asarray(rgb, dtype=np.float64) / 255.0
    r, g, b = u[..., 0], u[..., 1], u[..., 2]
    mx = np.max(u, axis=-1)
    mn = np.min(u, axis=-1)
    d = mx - mn

    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(
            mx == r,
            (g - b) / d,
            np.where(mx == g, (b - r) / d + 2.0, (r - g) / d + 4.0),
        )
    h = np.where(d == 0, 0.0, h * 60.0) % 360.0
    s = np.where(mx == 0, 0.0, d / np.where(mx == 0, 1.0, mx))
    return np.stack([h, s, mx], axis=-1)


def rgb_to_lab(pixel) -> LabPixel:
    """Convert one RGB triple (components in [0, 255]) to CIELAB."""
    r, g, b = pixel
    for c in (r, g, b):
        if not 0 <= c <= 255:
            raise ValueError(f"channel value {c} outside [0, 255]")
    out = rgb_array_to_lab(np.array([r, g, b], dtype=np.float64))
    return LabPixel(float(out[0]), float(out[1]), float(out[2]))


def rgb_to_hsv(pixel) -> HsvPixel:
    """Convert one RGB triple (components in [0, 255]) to hexcone HSV."""
    r, g, b = pixel
    for c in (r, g, b):
        if not 0 <= c <= 255:
            raise ValueError(f"channel value {c} outside [0, 255]")
    out = rgb_array_to_hsv(np.array([r, g, b], dtype=np.float64))
    return HsvPixel(float(out[0]), float(out[1]), float(out[2]))


def euclidean_distance(a: Point2, b: Point2) -> float:
    """Pixel distance between two points."""
    return math.hypot(a.x - b.x, a.y - b.y)
