import io
import json

import numpy as np
import pytest
from PIL import Image

from conftest import FIXTURES
from pixprobe import classify, decode_image
from pixprobe.cli import main

TOY = str(FIXTURES / "toynet")
SCENE = str(FIXTURES / "scene.png")
SCENE_MASK = str(FIXTURES / "scene_mask.png")


def write_mask(path, h, w, box):
    arr = np.zeros((h, w), np.uint8)
    y0, y1, x0, x1 = box
    arr[y0:y1, x0:x1] = 255
    Image.fromarray(arr, "L").save(path)


class TestClassify:
    def test_table_matches_library_call(self, capsys, toynet, scene_png):
        assert main(["classify", SCENE, "--model", TOY]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out[0].split() == ["class_id", "probability", "label"]
        rows = [line.split() for line in out[1:]]
        scores = classify(toynet, decode_image(scene_png), 5)
        assert [int(r[0]) for r in rows] == [p.class_id for p in scores.topk]
        assert [r[2] for r in rows] == [p.label for p in scores.topk]
        for r, p in zip(rows, scores.topk):
            assert float(r[1]) == pytest.approx(p.probability, abs=1e-6)

    def test_k_one_prints_one_row(self, capsys):
        assert main(["classify", SCENE, "--model", TOY, "-k", "1"]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 2  # header + one row

    def test_json_output(self, capsys):
        assert main(["classify", SCENE, "--model", TOY, "--json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["topk"]) == 5

    def test_missing_file_exits_2(self, capsys):
        assert main(["classify", "no-such.png", "--model", TOY]) == 2
        assert "cannot read" in capsys.readouterr().err

    def test_missing_model_exits_2(self, capsys):
        assert main(["classify", SCENE, "--model", "nowhere"]) == 2


class TestInpaint:
    def test_empty_mask_copies_modulo_quantization(self, tmp_path, capsys, scene_png):
        mask = tmp_path / "empty.png"
        write_mask(mask, 48, 48, (0, 0, 0, 0))
        out = tmp_path / "out.png"
        assert main(["inpaint", SCENE, str(mask), "-o", str(out)]) == 0
        a = decode_image(scene_png)
        b = decode_image(out.read_bytes())
        assert np.array_equal(a.pixels, b.pixels)

    def test_seeded_patchmatch_twice_identical(self, tmp_path, capsys):
        out1, out2 = tmp_path / "a.png", tmp_path / "b.png"
        for out in (out1, out2):
            code = main(["inpaint", SCENE, SCENE_MASK, "-o", str(out),
                         "--algorithm", "patchmatch", "--seed", "3"])
            assert code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_telea_matches_library(self, tmp_path, capsys, scene_png, mask_png):
        from pixprobe import Mask, encode_image, inpaint_telea, mask_from_image

        out = tmp_path / "out.png"
        assert main(["inpaint", SCENE, SCENE_MASK, "-o", str(out), "--radius", "4"]) == 0
        img = decode_image(scene_png)
        mask = mask_from_image(decode_image(mask_png))
        assert out.read_bytes() == encode_image(inpaint_telea(img, mask, 4))

    def test_dims_mismatch_is_domain_error(self, tmp_path, capsys):
        mask = tmp_path / "m.png"
        write_mask(mask, 10, 10, (0, 5, 0, 5))
        assert main(["inpaint", SCENE, str(mask), "-o", str(tmp_path / "o.png")]) == 1
        assert "error" in capsys.readouterr().err


class TestCam:
    def test_overlay_written(self, tmp_path, capsys):
        out = tmp_path / "cam.png"
        code = main(["cam", SCENE, "--model", TOY, "--class-id", "0", "-o", str(out)])
        assert code == 0
        img = decode_image(out.read_bytes())
        assert (img.height, img.width) == (48, 48)

    def test_raw_is_grayscale(self, tmp_path, capsys):
        out = tmp_path / "cam.png"
        main(["cam", SCENE, "--model", TOY, "--class-id", "2", "--mode", "raw",
              "-o", str(out)])
        assert decode_image(out.read_bytes()).channels == 1

    def test_bad_class_is_domain_error(self, tmp_path, capsys):
        code = main(["cam", SCENE, "--model", TOY, "--class-id", "40",
                     "-o", str(tmp_path / "cam.png")])
        assert code == 1


class TestBench:
    def test_budget_suite_runs_and_reports_all_ops(self, capsys, warm_kernels):
        from pixprobe import bench

        rows = bench.run_budget(reps=1, classes=10, input_size=32)
        names = {r.name for r in rows}
        assert names == {"classify", "telea", "patchmatch"}
        for r in rows:
            assert r.median_ms > 0
            assert r.budget_ms is not None

    def test_compare_suite_covers_both_paths(self, warm_kernels):
        from pixprobe import bench

        rows = bench.run_compare(reps=1)
        paths = {r.path for r in rows}
        assert paths == {"numba", "numpy"}
        assert {r.name for r in rows} == {"telea", "march", "patchmatch"}
