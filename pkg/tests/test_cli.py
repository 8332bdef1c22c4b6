import csv
import io
import json

import numpy as np
import pytest

from wavepeel.benchlab import make_benchmark
from wavepeel.cli import EXIT_IO, EXIT_OK, EXIT_VALIDATION, main
from wavepeel.ggd import make_params, sample
from wavepeel.peeling import threshold_catalog
from wavepeel.signalio import read_signal, write_signal

FC_REFERENCE = {0.1: 4.0215, 0.5: 2.7830, 1.0: 2.42537, 2.0: 2.16169, 3.0: 2.0472, 4.0: 1.98181}


def _csv_rows(text):
    body = "".join(line + "\n" for line in text.splitlines() if not line.startswith("#"))
    return list(csv.DictReader(io.StringIO(body)))


def test_fc_table(capsys):
    assert main(["fc-table"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("# command = fc-table")
    rows = _csv_rows(out)
    assert len(rows) == 6
    for r in rows:
        assert float(r["F_c"]) == pytest.approx(FC_REFERENCE[float(r["u"])], abs=1e-3)
        assert float(r["F_m"]) > float(r["F_c"])
    u2 = next(r for r in rows if float(r["u"]) == 2.0)
    assert float(u2["F_m"]) == pytest.approx(2.4898, abs=1e-4)


def test_fc_table_empty(capsys):
    assert main(["fc-table", "--u", ""]) == EXIT_OK
    rows = [line for line in capsys.readouterr().out.splitlines() if not line.startswith("#")]
    assert rows == ["u,F_c,x_star_c,F_m,error"]


def test_fc_table_bad_shape_reported_per_row(capsys):
    code = main(["fc-table", "--u", "2,50"])
    rows = _csv_rows(capsys.readouterr().out)
    assert code == 3
    assert rows[0]["error"] == "" and rows[1]["error"] != ""


def test_thresholds_json(tmp_path):
    assert main(["thresholds", "--u", "2", "--N", "2000", "--seeds", "3", "--out-dir", str(tmp_path)]) == EXIT_OK
    doc = json.loads((tmp_path / "thresholds.json").read_text())
    assert [r["seed"] for r in doc["data"]] == [0, 1, 2]
    det = threshold_catalog(1.0, 2.0)
    assert doc["data"][0]["T_c15"] == pytest.approx(det["T_c15"], rel=1e-12)
    assert (tmp_path / "thresholds.csv").read_text().count("\n") == len(doc["config"]) + 4


def test_denoise_hard_zero_identity(tmp_path):
    x = make_benchmark("HeaviSine", 256)
    src = tmp_path / "x.csv"
    write_signal(src, x)
    out = tmp_path / "y.csv"
    code = main(["denoise", "--input", str(src), "--output", str(out), "--method", "hard", "--threshold", "0"])
    assert code == EXIT_OK
    np.testing.assert_allclose(read_signal(out), x, atol=1e-10)
    meta = json.loads((tmp_path / "y.csv.json").read_text())
    assert meta["threshold"] == 0.0


def test_denoise_peel_known_shape(tmp_path):
    z = sample(make_params(1.0, 2.0), 8, 4096)
    src = tmp_path / "z.json"
    write_signal(src, z)
    code = main(["denoise", "--input", str(src), "--method", "peel-hat-c15", "--sigma", "1", "--u", "2",
                 "--out-dir", str(tmp_path)])
    assert code == EXIT_OK
    meta = json.loads((tmp_path / "z.denoised.json.json").read_text())
    assert meta["threshold"] == pytest.approx(threshold_catalog(1.0, 2.0)["T_c15"], rel=0.02)
    assert meta["iterations"] == 9 and meta["estimated"] is False
    assert read_signal(tmp_path / "z.denoised.json").size == 4096


@pytest.mark.parametrize("method", ["universal", "sure", "peel-c05", "peel-cm", "peel-m"])
def test_denoise_estimated_methods(tmp_path, method):
    x = make_benchmark("Blocks", 512) + sample(make_params(0.3, 1.0), 1, 512)
    src = tmp_path / "x.csv"
    write_signal(src, x)
    assert main(["denoise", "--input", str(src), "--method", method, "--mode", "soft"]) == EXIT_OK
    meta = json.loads((tmp_path / "x.denoised.csv.json").read_text())
    assert meta["estimated"] is True and meta["threshold"] > 0


def test_denoise_validation_errors(tmp_path):
    src = tmp_path / "x.csv"
    write_signal(src, np.ones(100))
    assert main(["denoise", "--input", str(src), "--method", "hard", "--threshold", "1"]) == EXIT_VALIDATION
    write_signal(src, np.ones(64))
    assert main(["denoise", "--input", str(src), "--method", "hard"]) == EXIT_VALIDATION
    assert main(["denoise", "--input", str(tmp_path / "missing.csv"), "--method", "sure"]) == EXIT_IO


def test_bench_byte_identical(tmp_path):
    cfg = tmp_path / "bench.cfg"
    cfg.write_text("# small run\nsignal_name = Bumps\nN = 256\nreplications = 3\nmethods = Universal, SURE, T_c15\n")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["bench", str(cfg), "--out-dir", str(a)]) == EXIT_OK
    assert main(["bench", str(cfg), "--out-dir", str(b), "--workers", "2"]) == EXIT_OK
    for name in ("bench.csv", "bench.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert (a / "bench.log").exists()
    assert "# base_seed = 0" in (a / "bench.csv").read_text()
    assert main(["bench", str(cfg), "--out-dir", str(b), "--seed", "5"]) == EXIT_OK
    assert (a / "bench.csv").read_bytes() != (b / "bench.csv").read_bytes()


def test_bench_config_error(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("N = 256\nreplications = lots\n")
    assert main(["bench", str(cfg)]) == EXIT_VALIDATION
    assert "line 2" in capsys.readouterr().err
    assert main(["bench", str(tmp_path / "nope.cfg")]) == EXIT_IO


def test_converge(tmp_path):
    cfg = tmp_path / "conv.cfg"
    cfg.write_text("u = 2\nF_factor = 0.9\nN_grid = 256, 1024\nreplications = 10\n")
    assert main(["converge", str(cfg), "--out-dir", str(tmp_path), "--format", "json"]) == EXIT_OK
    doc = json.loads((tmp_path / "converge.json").read_text())
    assert [r["N"] for r in doc["data"]] == [256, 1024]
    assert doc["config"]["F_factor"] == 0.9


def test_sample(capsys, tmp_path):
    assert main(["sample", "--u", "1", "--n", "5", "--seed", "3"]) == EXIT_OK
    vals = [float(v) for v in capsys.readouterr().out.split()]
    np.testing.assert_array_equal(vals, sample(make_params(1.0, 1.0), 3, 5))
    assert main(["sample", "--u", "1", "--n", "5", "--format", "json", "--out-dir", str(tmp_path)]) == EXIT_OK
    assert len(json.loads((tmp_path / "sample.json").read_text())) == 5
    assert main(["sample", "--u", "-1", "--n", "5"]) == EXIT_VALIDATION
