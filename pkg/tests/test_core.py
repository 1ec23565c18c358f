import numpy as np
import pytest
from hypothesis import given, strategies as st

from wirewalk.core import (
    Image,
    Point2,
    euclidean_distance,
    rgb_array_to_hsv,
    rgb_array_to_lab,
    rgb_to_hsv,
    rgb_to_lab,
)

# Frozen from direct evaluation of the sRGB -> XYZ(D65) -> Lab reference
# formulas (piecewise gamma 0.04045/2.4, white 0.95047/1.0/1.08883).
RED_LAB = (53.24079414130722, 80.09245959641109, 67.20319651585301)


def rel_close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(b))


class TestRgbToLab:
    def test_black_is_zero(self):
        out = rgb_to_lab((0, 0, 0))
        assert out == (0.0, 0.0, 0.0)

    def test_white_point(self):
        out = rgb_to_lab((255, 255, 255))
        assert abs(out.l - 100.0) < 1e-4
        assert abs(out.a) < 0.01 and abs(out.b) < 0.01

    def test_pure_red(self):
        out = rgb_to_lab((255, 0, 0))
        for got, want in zip(out, RED_LAB):
            assert rel_close(got, want)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            rgb_to_lab((300, 0, 0))

    @given(st.integers(0, 255))
    def test_gray_axis_is_achromatic(self, v):
        out = rgb_to_lab((v, v, v))
        assert abs(out.a) < 0.5 and abs(out.b) < 0.5

    def test_array_matches_scalar(self):
        rng = np.random.default_rng(0)
        px = rng.integers(0, 256, size=(5, 7, 3))
        arr = rgb_array_to_lab(px)
        for y in range(5):
            for x in range(7):
                scalar = rgb_to_lab(tuple(int(c) for c in px[y, x]))
                assert np.allclose(arr[y, x], scalar, atol=1e-12)


class TestRgbToHsv:
    def test_black(self):
        assert rgb_to_hsv((0, 0, 0)) == (0.0, 0.0, 0.0)

    def test_pure_red(self):
        assert rgb_to_hsv((255, 0, 0)) == (0.0, 1.0, 1.0)

    def test_olive(self):
        h, s, v = rgb_to_hsv((128, 128, 0))
        assert h == 60.0 and s == 1.0
        assert rel_close(v, 128 / 255)

    @given(st.integers(0, 255))
    def test_gray_axis_zero_saturation(self, val):
        h, s, v = rgb_to_hsv((val, val, val))
        assert h == 0.0 and s == 0.0

    @given(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255))
    def test_ranges(self, r, g, b):
        h, s, v = rgb_to_hsv((r, g, b))
        assert 0 <= h < 360 and 0 <= s <= 1 and 0 <= v <= 1

    def test_array_matches_scalar(self):
        rng = np.random.default_rng(1)
        px = rng.integers(0, 256, size=(4, 6, 3))
        arr = rgb_array_to_hsv(px)
        for y in range(4):
            for x in range(6):
                scalar = rgb_to_hsv(tuple(int(c) for c in px[y, x]))
                assert np.allclose(arr[y, x], scalar, atol=1e-12)


class TestEuclideanDistance:
    def test_zero(self):
        assert euclidean_distance(Point2(0, 0), Point2(0, 0)) == 0.0

    def test_345(self):
        assert euclidean_distance(Point2(0, 0), Point2(3, 4)) == 5.0

    def test_real_valued(self):
        assert rel_close(
            euclidean_distance(Point2(1.5, 2.0), Point2(4.5, 6.0)), 5.0
        )

    @given(
        st.floats(-1e6, 1e6), st.floats(-1e6, 1e6),
        st.floats(-1e6, 1e6), st.floats(-1e6, 1e6),
    )
    def test_symmetric_nonnegative(self, ax, ay, bx, by):
        a, b = Point2(ax, ay), Point2(bx, by)
        assert euclidean_distance(a, b) == euclidean_distance(b, a) >= 0.0


class TestImageIO:
    def test_jpeg_input(self, tmp_path):
        from PIL import Image as PILImage
        from wirewalk.core import load_image

        rng = np.random.default_rng(3)
        px = rng.integers(0, 256, size=(20, 30, 3)).astype(np.uint8)
        PILImage.fromarray(px).save(tmp_path / "img.jpg", quality=95)
        img = load_image(tmp_path / "img.jpg")
        assert img.width == 30 and img.height == 20
        assert img.pixels.dtype == np.uint8

    def test_png_alpha_discarded(self, tmp_path):
        from PIL import Image as PILImage
        from wirewalk.core import load_image

        rgba = np.zeros((8, 8, 4), dtype=np.uint8)
        rgba[..., 0] = 200
        rgba[..., 3] = 128  # semi-transparent
        PILImage.fromarray(rgba, mode="RGBA").save(tmp_path / "img.png")
        img = load_image(tmp_path / "img.png")
        assert img.pixels.shape == (8, 8, 3)

    def test_mask_round_trip(self, tmp_path):
        from wirewalk.core import load_mask_png, save_mask_png

        mask = np.zeros((12, 9), dtype=bool)
        mask[3:7, 2:5] = True
        save_mask_png(mask, tmp_path / "m.png")
        assert (load_mask_png(tmp_path / "m.png") == mask).all()

    def test_conversions_are_pure(self):
        px = (37, 141, 250)
        assert rgb_to_lab(px) == rgb_to_lab(px)
        assert rgb_to_hsv(px) == rgb_to_hsv(px)


class TestImage:
    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            Image(np.zeros((4, 4), dtype=np.uint8))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Image(np.zeros((0, 4, 3), dtype=np.uint8))

    def test_rejects_non_uint8(self):
        with pytest.raises(ValueError):
            Image(np.zeros((4, 4, 3), dtype=np.float64))

    def test_contains(self):
        img = Image(np.zeros((4, 8, 3), dtype=np.uint8))
        assert img.contains(Point2(0, 0))
        assert img.contains(Point2(7.9, 3.9))
        assert not img.contains(Point2(8, 0))
        assert not img.contains(Point2(0, -0.1))
