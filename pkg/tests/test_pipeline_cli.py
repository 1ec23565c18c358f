import json

import pytest

from wirewalk.cli import (
    EXIT_BAD_CONFIG,
    EXIT_BAD_IMAGE,
    EXIT_BAD_SEEDS,
    EXIT_NO_WALK,
    EXIT_OK,
    main,
)
from wirewalk.core import Point2, load_mask_png, save_image_png
from wirewalk.evaluate import iou, load_scene
from wirewalk.pipeline import (
    PipelineConfig,
    SeedError,
    config_from_dict,
    config_to_dict,
    segment_image,
)
from wirewalk.synth import SceneSpec, generate_scene

from test_synth import straight_cable


SMALL_CONFIG = ["--superpixels", "400"]


@pytest.fixture(scope="module")
def small_scene(tmp_path_factory):
    """A 320x240 straight-cable scene on disk plus its seed file."""
    root = tmp_path_factory.mktemp("scene")
    spec = SceneSpec(
        width=320,
        height=240,
        cables=(straight_cable(x0=30.0, x1=290.0, y=120.0, width=10),),
    )
    image, truth, endpoints = generate_scene(spec)
    save_image_png(image, root / "image.png")
    seeds = [
        {"x": p.x, "y": p.y} for pair in endpoints for p in pair
    ]
    (root / "seeds.json").write_text(json.dumps({"version": 1, "seeds": seeds}))
    return root, image, truth, endpoints


class TestConfig:
    def test_round_trip_default(self):
        cfg = PipelineConfig()
        assert config_from_dict(config_to_dict(cfg)) == cfg

    def test_round_trip_custom(self):
        cfg = PipelineConfig(
            superpixels=1234,
            compactness=7.5,
            histogram_bins=4,
            graph_order=2,
            c_visual=3.0,
            termination_radius_px=17.0,
            thickness_strategy="sqrt_area",
        )
        doc = json.loads(json.dumps(config_to_dict(cfg)))
        assert config_from_dict(doc) == cfg

    def test_rejects_unknown_fields(self):
        doc = config_to_dict(PipelineConfig())
        doc["bogus"] = 1
        with pytest.raises(ValueError):
            config_from_dict(doc)

    def test_rejects_wrong_version(self):
        doc = config_to_dict(PipelineConfig())
        doc["version"] = 99
        with pytest.raises(ValueError):
            config_from_dict(doc)

    def test_rejects_invalid_values(self):
        for kwargs in (
            {"compactness": -1.0},
            {"histogram_bins": 1},
            {"superpixels": 1},
            {"thickness_strategy": "nope"},
            {"max_steps": 0},
        ):
            with pytest.raises(ValueError):
                PipelineConfig(**kwargs)


class TestSegmentImageApi:
    def test_rejects_insufficient_seeds(self, small_scene):
        _, image, _, _ = small_scene
        with pytest.raises(SeedError):
            segment_image(image, [Point2(5, 5)], PipelineConfig(superpixels=400))

    def test_rejects_out_of_bounds_seed(self, small_scene):
        _, image, _, _ = small_scene
        with pytest.raises(SeedError):
            segment_image(
                image,
                [Point2(5, 5), Point2(9999, 5)],
                PipelineConfig(superpixels=400),
            )

    def test_straight_cable_quality(self, small_scene):
        _, image, truth, endpoints = small_scene
        seeds = [p for pair in endpoints for p in pair]
        out = segment_image(image, seeds, PipelineConfig(superpixels=400))
        assert len(out.walks) == 1
        assert iou(out.segmentation.union_mask, truth.union_mask) >= 0.7
        # residual bound: walk centroids stay within one superpixel spacing
        assert out.spmap.grid_interval > 0


class TestCmdSegment:
    def run_segment(self, scene_root, out_dir, extra=()):
        return main(
            [
                "segment",
                str(scene_root / "image.png"),
                "--out",
                str(out_dir),
                "--seeds",
                str(scene_root / "seeds.json"),
                *SMALL_CONFIG,
                *extra,
            ]
        )

    def test_success_writes_artifacts(self, small_scene, tmp_path):
        root, _, truth, _ = small_scene
        out = tmp_path / "out"
        assert self.run_segment(root, out) == EXIT_OK
        for name in (
            "mask_union.png",
            "mask_0.png",
            "spline_0.json",
            "walks.json",
            "overlay.png",
            "config.json",
        ):
            assert (out / name).is_file(), name
        mask = load_mask_png(out / "mask_union.png")
        assert iou(mask, truth.union_mask) >= 0.7
        walks = json.loads((out / "walks.json").read_text())
        assert walks["version"] == 1
        assert walks["walks"][0]["status"] == "closed"

    def test_verbose_records_step_scores_and_graph(self, small_scene, tmp_path):
        root, _, _, _ = small_scene
        out = tmp_path / "verbose"
        assert self.run_segment(root, out, extra=["--verbose"]) == EXIT_OK
        walks = json.loads((out / "walks.json").read_text())
        steps = walks["walks"][0]["steps"]
        assert len(steps) >= 1
        first = steps[0]
        assert set(first) == {
            "candidate", "p_visual", "p_curvature", "p_distance", "p_total",
        }
        for debug_artifact in ("graph.json", "labels.png", "superpixels.png"):
            assert (out / debug_artifact).is_file(), debug_artifact

    def test_deterministic_outputs(self, small_scene, tmp_path):
        root, _, _, _ = small_scene
        a, b = tmp_path / "a", tmp_path / "b"
        assert self.run_segment(root, a) == EXIT_OK
        assert self.run_segment(root, b) == EXIT_OK
        for name in ("walks.json", "spline_0.json", "config.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name
        ma = load_mask_png(a / "mask_union.png")
        mb = load_mask_png(b / "mask_union.png")
        assert (ma == mb).all()

    def test_single_seed_rejected(self, small_scene, tmp_path):
        root, _, _, _ = small_scene
        code = main(
            [
                "segment",
                str(root / "image.png"),
                "--out",
                str(tmp_path / "x"),
                "--seed",
                "5,5",
                *SMALL_CONFIG,
            ]
        )
        assert code == EXIT_BAD_SEEDS

    def test_out_of_bounds_seed_rejected(self, small_scene, tmp_path):
        root, _, _, _ = small_scene
        code = main(
            [
                "segment",
                str(root / "image.png"),
                "--out",
                str(tmp_path / "x"),
                "--seed",
                "5,5",
                "--seed",
                "9999,12",
                *SMALL_CONFIG,
            ]
        )
        assert code == EXIT_BAD_SEEDS

    def test_missing_image(self, tmp_path):
        code = main(
            [
                "segment",
                str(tmp_path / "nope.png"),
                "--out",
                str(tmp_path / "x"),
                "--seed",
                "1,1",
                "--seed",
                "2,2",
            ]
        )
        assert code == EXIT_BAD_IMAGE

    def test_invalid_config_file(self, small_scene, tmp_path):
        root, _, _, _ = small_scene
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"version": 99}))
        code = main(
            [
                "segment",
                str(root / "image.png"),
                "--out",
                str(tmp_path / "x"),
                "--seeds",
                str(root / "seeds.json"),
                "--config",
                str(bad),
            ]
        )
        assert code == EXIT_BAD_CONFIG

    def test_invalid_config_flag_value(self, small_scene, tmp_path):
        root, _, _, _ = small_scene
        code = main(
            [
                "segment",
                str(root / "image.png"),
                "--out",
                str(tmp_path / "x"),
                "--seeds",
                str(root / "seeds.json"),
                "--compactness",
                "-3",
            ]
        )
        assert code == EXIT_BAD_CONFIG

    def test_no_walk_closed(self, small_scene, tmp_path):
        root, _, _, _ = small_scene
        # a one-step budget and microscopic closing radius cannot connect
        code = main(
            [
                "segment",
                str(root / "image.png"),
                "--out",
                str(tmp_path / "x"),
                "--seeds",
                str(root / "seeds.json"),
                *SMALL_CONFIG,
                "--max-steps",
                "1",
                "--radius",
                "1e-9",
            ]
        )
        assert code == EXIT_NO_WALK


class TestCmdSynthEvaluate:
    def test_synth_then_evaluate(self, tmp_path):
        data = tmp_path / "data"
        code = main(
            [
                "synth",
                "--out",
                str(data),
                "--scenes",
                "2",
                "--kind",
                "homogeneous",
                "--seed-base",
                "5",
                "--width",
                "320",
                "--height",
                "240",
            ]
        )
        assert code == EXIT_OK
        scenes = sorted(p.name for p in data.iterdir())
        assert scenes == ["scene_000", "scene_001"]
        image, truth = load_scene(data / "scene_000")
        assert image.width == 320 and truth.cable_count >= 1

        out = tmp_path / "report"
        code = main(
            ["evaluate", str(data), "--out", str(out), *SMALL_CONFIG]
        )
        assert code == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        assert report["version"] == 1
        assert 0.0 <= report["weighted_iou"] <= 1.0
        assert len(report["per_image"]) == 2

    def test_evaluate_missing_dataset(self, tmp_path):
        code = main(["evaluate", str(tmp_path / "absent")])
        assert code == EXIT_BAD_IMAGE

    def test_synth_determinism(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            main(
                [
                    "synth",
                    "--out",
                    str(out),
                    "--scenes",
                    "1",
                    "--kind",
                    "crossing",
                    "--seed-base",
                    "3",
                    "--width",
                    "320",
                    "--height",
                    "240",
                ]
            )
        fa = (a / "scene_000" / "image.png").read_bytes()
        fb = (b / "scene_000" / "image.png").read_bytes()
        assert fa == fb
