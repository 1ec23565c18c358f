import math

import numpy as np
import pytest

from wirewalk.synth import (
    BackgroundSpec,
    CableSpec,
    SceneSpec,
    cable_polyline,
    crossing_scene_spec,
    generate_scene,
    homogeneous_scene_spec,
    self_crossing_scene_spec,
)


def straight_cable(x0=20.0, x1=120.0, y=40.0, width=9):
    # a single cubic segment along a line (control points on the segment)
    p0 = (x0, y)
    p3 = (x1, y)
    p1 = (x0 + (x1 - x0) / 3.0, y)
    p2 = (x0 + 2 * (x1 - x0) / 3.0, y)
    return CableSpec(segments=((p0, p1, p2, p3),), width_px=width, color=(200, 30, 30))


def segments_intersect(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return (v > 1e-12) - (v < -1e-12)

    o1, o2 = orient(p1, p2, p3), orient(p1, p2, p4)
    o3, o4 = orient(p3, p4, p1), orient(p3, p4, p2)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


def polyline_self_intersects(points) -> bool:
    pts = [(p.x, p.y) for p in points[:: max(1, len(points) // 400)]]
    n = len(pts)
    for i in range(n - 1):
        for j in range(i + 2, n - 1):
            if segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1]):
                return True
    return False


class TestGenerateScene:
    def test_straight_cable_stadium_area(self):
        spec = SceneSpec(width=160, height=80, cables=(straight_cable(),))
        _, truth, _ = generate_scene(spec)
        w, length = 9.0, 100.0
        expected = w * length + math.pi * (w / 2.0) ** 2
        got = int(truth.cable_masks[0].sum())
        assert abs(got - expected) <= 0.03 * expected

    def test_deterministic(self):
        spec = homogeneous_scene_spec(seed=42, dims=(200, 160))
        a_img, a_truth, a_ends = generate_scene(spec)
        b_img, b_truth, b_ends = generate_scene(spec)
        assert (a_img.pixels == b_img.pixels).all()
        assert all(
            (ma == mb).all() for ma, mb in zip(a_truth.cable_masks, b_truth.cable_masks)
        )
        assert a_ends == b_ends

    def test_union_is_or(self):
        spec = crossing_scene_spec(seed=3, dims=(320, 240))
        _, truth, _ = generate_scene(spec)
        manual = np.zeros_like(truth.union_mask)
        for m in truth.cable_masks:
            manual |= m
        assert (truth.union_mask == manual).all()

    def test_endpoints_on_mask(self):
        for seed in range(6):
            spec = homogeneous_scene_spec(seed=seed, dims=(320, 240))
            _, truth, endpoints = generate_scene(spec)
            for k, (a, b) in enumerate(endpoints):
                for p in (a, b):
                    assert truth.cable_masks[k][int(p.y), int(p.x)]

    def test_bounds_violation_rejected(self):
        bad = straight_cable(x0=-30.0)
        spec = SceneSpec(width=160, height=80, cables=(bad,))
        with pytest.raises(ValueError):
            generate_scene(spec)

    def test_width_floor_enforced(self):
        with pytest.raises(ValueError):
            CableSpec(segments=(((0, 0), (1, 0), (2, 0), (3, 0)),), width_px=2,
                      color=(1, 2, 3))

    def test_background_kinds(self):
        for kind in ("uniform", "checkerboard", "noise"):
            spec = SceneSpec(
                width=64,
                height=48,
                cables=(straight_cable(x0=15.0, x1=50.0, y=24.0, width=5),),
                background=BackgroundSpec(kind=kind),
                rng_seed=7,
            )
            img, _, _ = generate_scene(spec)
            assert img.width == 64 and img.height == 48

    def test_unknown_background_rejected(self):
        spec = SceneSpec(
            width=64, height=48,
            cables=(straight_cable(x0=15.0, x1=50.0, y=24.0, width=5),),
            background=BackgroundSpec(kind="plaid"),
        )
        with pytest.raises(ValueError):
            generate_scene(spec)


class TestSceneBuilders:
    def test_homogeneous_counts_and_widths(self):
        for seed in range(8):
            spec = homogeneous_scene_spec(seed=seed)
            assert 1 <= len(spec.cables) <= 3
            for c in spec.cables:
                assert 8 <= c.width_px <= 15

    def test_homogeneous_cables_disjoint(self):
        # band placement keeps cables from crossing
        for seed in range(6):
            spec = homogeneous_scene_spec(seed=seed, cable_count=3)
            _, truth, _ = generate_scene(spec)
            for i in range(3):
                for j in range(i + 1, 3):
                    overlap = truth.cable_masks[i] & truth.cable_masks[j]
                    assert overlap.sum() == 0

    def test_crossing_cables_do_cross(self):
        for seed in range(8):
            spec = crossing_scene_spec(seed=seed)
            assert len(spec.cables) == 2
            assert spec.cables[0].color != spec.cables[1].color
            _, truth, _ = generate_scene(spec)
            overlap = truth.cable_masks[0] & truth.cable_masks[1]
            assert overlap.sum() > 0

    def test_self_crossing_polyline_intersects(self):
        for seed in range(8):
            spec = self_crossing_scene_spec(seed=seed)
            assert len(spec.cables) == 1
            line = cable_polyline(spec.cables[0])
            assert polyline_self_intersects(line), f"seed {seed} does not cross"
