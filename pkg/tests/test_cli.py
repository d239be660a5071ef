import json
import math

import numpy as np
import pytest

from cochainopt.cli import main
from cochainopt.io_utils import (
    fmt,
    read_image,
    read_points_csv,
    write_image_pgm,
    write_points_csv,
)
from cochainopt.synthetic import two_blob_image

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


@pytest.fixture
def square_csv(tmp_path):
    path = tmp_path / "square.csv"
    write_points_csv(SQUARE, path)
    return path


class TestBarcodeCommand:
    def test_square_bar(self, square_csv, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(["barcode", str(square_csv), "--out", str(out)])
        assert rc == 0
        rows = (out / "barcode.csv").read_text().strip().splitlines()
        deg1 = [r for r in rows[1:] if r.startswith("1,")]
        assert len(deg1) == 1
        _, birth, death, bs, ds = deg1[0].split(",")
        assert float(birth) == 1.0
        assert float(death) == pytest.approx(math.sqrt(2))
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "barcode"
        assert str(square_csv) in manifest["inputs"]

    def test_empty_file_is_input_error(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        rc = main(["barcode", str(empty), "--out", str(tmp_path / "o")])
        assert rc == 3

    def test_degree_filter(self, square_csv, tmp_path):
        out = tmp_path / "deg0"
        rc = main(["barcode", str(square_csv), "--degree", "0", "--out", str(out)])
        assert rc == 0
        rows = (out / "barcode.csv").read_text().strip().splitlines()[1:]
        assert rows and all(r.startswith("0,") for r in rows)

    def test_usage_error_exit_code(self):
        with pytest.raises(SystemExit) as exc:
            main(["barcode"])  # missing input argument
        assert exc.value.code == 2

    def test_dump_complex(self, square_csv, tmp_path):
        out = tmp_path / "dump"
        rc = main(["barcode", str(square_csv), "--dump-complex", "--out", str(out)])
        assert rc == 0
        dump = json.loads((out / "complex.json").read_text())
        assert {"vertices", "f"} <= set(dump[0])
        assert len(dump) == 14  # 4 vertices, 6 edges, 4 triangles


class TestVrOptimizeCommand:
    def test_zero_iters_echoes_input(self, square_csv, tmp_path):
        out = tmp_path / "run"
        rc = main(["vr-optimize", str(square_csv), "--iters", "0", "--out", str(out)])
        assert rc == 0
        echoed = read_points_csv(out / "points_final.csv")
        assert np.array_equal(echoed, SQUARE)

    def test_no_bar_exit_code(self, tmp_path):
        two = tmp_path / "two.csv"
        write_points_csv(np.array([[0.0, 0.0], [1.0, 0.0]]), two)
        rc = main(["vr-optimize", str(two), "--iters", "3", "--out", str(tmp_path / "o")])
        assert rc == 4

    def test_short_run_writes_artifacts(self, tmp_path):
        from cochainopt.synthetic import noisy_circle

        cloud = tmp_path / "cloud.csv"
        write_points_csv(noisy_circle(10, 0.1, seed=0), cloud)
        out = tmp_path / "run"
        rc = main(["vr-optimize", str(cloud), "--method", "cochains",
                   "--iters", "5", "--out", str(out)])
        assert rc == 0
        assert (out / "trace.csv").exists()
        assert (out / "trace_diagnostics.csv").exists()
        assert (out / "trace_loss.svg").exists()
        assert json.loads((out / "trace_summary.json").read_text())["status"] == "completed"


class TestImageRepairCommand:
    def test_p2_and_p5_parse_identically(self, tmp_path):
        img = two_blob_image(8, seed=0)
        p2 = tmp_path / "img_p2.pgm"
        write_image_pgm(img, p2)
        quant = np.rint(np.clip(img, 0, 1) * 255).astype(np.uint8)
        p5 = tmp_path / "img_p5.pgm"
        with open(p5, "wb") as fh:
            fh.write(b"P5\n# comment\n8 8\n255\n")
            fh.write(quant.tobytes())
        assert np.array_equal(read_image(p2), read_image(p5))

    def test_zero_iters_corruption_only(self, tmp_path):
        img = two_blob_image(8, seed=0)
        src = tmp_path / "img.pgm"
        write_image_pgm(img, src)
        out = tmp_path / "o"
        rc = main(["image-repair", str(src), "--iters", "0",
                   "--corrupt", "2,0.001", "--seed", "7", "--out", str(out)])
        assert rc == 0
        corrupted = read_image(out / "corrupted.pgm")
        repaired = read_image(out / "repaired.pgm")
        assert np.array_equal(corrupted, repaired)

    def test_invert_flag(self, tmp_path):
        img = np.full((4, 4), 0.25)
        src = tmp_path / "img.csv"
        np.savetxt(src, img, delimiter=",")
        assert read_image(src, invert=True)[0, 0] == pytest.approx(0.75)


class TestFeatureWeightsCommand:
    def test_one_step_counter_and_simplex(self, tmp_path):
        out = tmp_path / "fw"
        rc = main(["feature-weights", "--synthetic", "--method", "one-step",
                   "--seed", "3", "--out", str(out)])
        assert rc == 0
        rows = (out / "weights.csv").read_text().strip().splitlines()[1:]
        weights = [float(r.split(",")[1]) for r in rows]
        assert sum(weights) == pytest.approx(1.0, abs=1e-9)
        assert min(weights) >= 0.0
        assert any(w == 0.0 for w in weights)

    def test_requires_input_or_synthetic(self, tmp_path):
        rc = main(["feature-weights", "--method", "one-step",
                   "--out", str(tmp_path / "x")])
        assert rc == 3


class TestVerifyCommand:
    def test_green_suites(self, tmp_path):
        assert main(["verify", "--suite", "critical", "--out", str(tmp_path)]) == 0
        assert main(["verify", "--suite", "symmetry", "--out", str(tmp_path)]) == 0
        rows = json.loads((tmp_path / "verify_report.json").read_text())
        assert all(r["passed"] for r in rows)

    def test_injected_failure_goes_red(self, tmp_path):
        rc = main(["verify", "--suite", "critical", "--inject-failure",
                   "--out", str(tmp_path)])
        assert rc == 1
        rows = json.loads((tmp_path / "verify_report.json").read_text())
        assert any(not r["passed"] for r in rows)


class TestDeterminism:
    def test_identical_reruns_byte_for_byte(self, tmp_path):
        from cochainopt.synthetic import noisy_circle

        cloud = tmp_path / "cloud.csv"
        write_points_csv(noisy_circle(10, 0.1, seed=1), cloud)
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            rc = main(["vr-optimize", str(cloud), "--method", "multi-cochains",
                       "--iters", "4", "--seed", "11", "--out", str(out)])
            assert rc == 0
            outs.append(out)
        for rel in ("trace.csv", "points_final.csv", "trace_diagnostics.csv"):
            assert (outs[0] / rel).read_bytes() == (outs[1] / rel).read_bytes()

    def test_config_file_precedence(self, tmp_path, square_csv):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("iters=0\nmethod=simplices\n")
        out = tmp_path / "out"
        rc = main(["vr-optimize", str(square_csv), "--config", str(cfg),
                   "--out", str(out)])
        assert rc == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["iters"] == 0
        # explicit flag beats the config file
        out2 = tmp_path / "out2"
        rc = main(["vr-optimize", str(square_csv), "--config", str(cfg),
                   "--iters", "1", "--method", "simplices", "--out", str(out2)])
        assert rc == 0
        m2 = json.loads((out2 / "manifest.json").read_text())
        assert m2["config"]["iters"] == 1


class TestEnvSeed:
    def test_env_seed_used_as_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv("COCHAINOPT_SEED", "99")
        out = tmp_path / "fw"
        rc = main(["feature-weights", "--synthetic", "--method", "one-step",
                   "--out", str(out)])
        assert rc == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 99


class TestFloatFormat:
    def test_fmt_roundtrip(self):
        for x in (1 / 3, math.sqrt(2), 1e-17, 123456.789):
            assert float(fmt(x)) == x


class TestIOEdgeCases:
    def test_header_row_skipped(self, tmp_path):
        path = tmp_path / "pts.csv"
        path.write_text("x,y\n0,0\n1,0\n")
        assert read_points_csv(path).shape == (2, 2)

    def test_parse_error_reports_line(self, tmp_path):
        from cochainopt.errors import InputError

        path = tmp_path / "pts.csv"
        path.write_text("0,0\n1,zebra\n")
        with pytest.raises(InputError, match=":2:"):
            read_points_csv(path)

    def test_ragged_rows_rejected(self, tmp_path):
        from cochainopt.errors import InputError

        path = tmp_path / "pts.csv"
        path.write_text("0,0\n1\n")
        with pytest.raises(InputError, match="columns"):
            read_points_csv(path)
