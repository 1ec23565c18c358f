import numpy as np
import pytest
from hypothesis import given, strategies as st

from wirewalk.core import Point2
from wirewalk.evaluate import (
    GroundTruth,
    evaluate_run,
    format_report_table,
    iou,
    load_scene,
    report_to_dict,
    save_scene,
    weighted_iou,
)

from conftest import uniform_image


def mask(h, w, box=None):
    m = np.zeros((h, w), dtype=bool)
    if box:
        y0, y1, x0, x1 = box
        m[y0:y1, x0:x1] = True
    return m


class TestIoU:
    def test_identical(self):
        m = mask(10, 10, (2, 8, 2, 8))
        assert iou(m, m) == 1.0

    def test_disjoint(self):
        a = mask(10, 10, (0, 5, 0, 10))
        b = mask(10, 10, (5, 10, 0, 10))
        assert iou(a, b) == 0.0

    def test_half_subset(self):
        truth = mask(10, 20, (0, 5, 0, 20))  # 100 px
        pred = mask(10, 20, (0, 5, 0, 10))   # 50 px subset
        assert iou(pred, truth) == 0.5

    def test_empty_vs_empty(self):
        assert iou(mask(5, 5), mask(5, 5)) == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            iou(mask(5, 5), mask(5, 6))

    def test_symmetric(self):
        rng = np.random.default_rng(0)
        a = rng.random((12, 12)) > 0.5
        b = rng.random((12, 12)) > 0.5
        assert iou(a, b) == iou(b, a)

    def test_self_iou_is_one(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            m = rng.random((9, 14)) > 0.6
            assert iou(m, m) == 1.0


class TestWeightedIoU:
    def test_equal_weights(self):
        assert weighted_iou([(1, 0.5), (1, 0.5)]) == 0.5

    def test_cable_weighting(self):
        assert weighted_iou([(3, 1.0), (1, 0.0)]) == 0.75

    def test_single_image(self):
        assert weighted_iou([(4, 0.37)]) == 0.37

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            weighted_iou([])

    def test_zero_count_rejected(self):
        with pytest.raises(ValueError):
            weighted_iou([(0, 0.5)])

    @given(st.lists(
        st.tuples(st.integers(1, 8), st.floats(0.0, 1.0)), min_size=1, max_size=12
    ))
    def test_bounds(self, entries):
        got = weighted_iou(entries)
        vals = [v for _, v in entries]
        assert min(vals) - 1e-12 <= got <= max(vals) + 1e-12

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=12),
           st.integers(1, 5))
    def test_equal_counts_reduce_to_mean(self, vals, c):
        got = weighted_iou([(c, v) for v in vals])
        assert abs(got - float(np.mean(vals))) <= 1e-12


class TestEvaluateRun:
    def make_truth(self):
        cable = mask(20, 20, (4, 8, 0, 20))
        return GroundTruth(
            cable_masks=[cable],
            union_mask=cable.copy(),
            cable_points=[[Point2(0, 6), Point2(19, 6)]],
        )

    def test_union_and_per_cable(self):
        truth = self.make_truth()
        report = evaluate_run([truth.union_mask.copy()], [truth])
        assert report.per_image[0].union_iou == 1.0
        assert report.weighted_iou == 1.0

    def test_misaligned_rejected(self):
        truth = self.make_truth()
        with pytest.raises(ValueError):
            evaluate_run([], [truth])

    def test_report_serializes(self):
        truth = self.make_truth()
        report = evaluate_run([truth.union_mask.copy()], [truth], names=["s0"])
        doc = report_to_dict(report)
        assert doc["version"] == 1
        assert doc["per_image"][0]["name"] == "s0"
        table = format_report_table(report)
        assert "weighted IoU" in table


class TestDatasetIO:
    def test_round_trip(self, tmp_path):
        img = uniform_image(24, 16, (50, 90, 200))
        cable0 = mask(16, 24, (2, 6, 0, 24))
        cable1 = mask(16, 24, (10, 13, 0, 24))
        truth = GroundTruth(
            cable_masks=[cable0, cable1],
            union_mask=cable0 | cable1,
            cable_points=[
                [Point2(0.0, 4.0), Point2(23.0, 4.0)],
                [Point2(0.0, 11.5), Point2(23.0, 11.5)],
            ],
        )
        save_scene(tmp_path / "scene", img, truth)
        back_img, back = load_scene(tmp_path / "scene")
        assert (back_img.pixels == img.pixels).all()
        assert back.cable_count == 2
        assert (back.union_mask == truth.union_mask).all()
        for a, b in zip(back.cable_masks, truth.cable_masks):
            assert (a == b).all()
        assert back.endpoints()[0] == (Point2(0.0, 4.0), Point2(23.0, 4.0))
