import csv
import io
import json
import subprocess
import sys

import pytest

from martingale_bounds.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestBound:
    def test_kl_drift(self, capsys):
        code, out, _ = run(capsys, "bound", "--bound", "kl-drift", "--n", "100", "--s", "5", "--delta", "0.05")
        assert code == 0
        row = json.loads(out)["rows"][0]
        assert row["radius"] == pytest.approx(0.076109, abs=1e-6)
        assert row["lower"] < 0.05 < row["upper"]

    def test_hoeffding_azuma(self, capsys):
        code, out, _ = run(capsys, "bound", "--bound", "hoeffding-azuma", "--widths", "1x100", "--format", "csv")
        assert code == 0
        assert float(csv_rows(out)[0]["radius"]) == pytest.approx(13.581, abs=5e-4)

    def test_bad_delta(self, capsys):
        code, _, err = run(capsys, "bound", "--bound", "kl-drift", "--n", "100", "--s", "5", "--delta", "1.5")
        assert code == 2 and "delta" in err

    def test_missing_parameter(self, capsys):
        code, _, err = run(capsys, "bound", "--bound", "pb-bernstein", "--n", "100")
        assert code == 2 and err.startswith("error:")

    def test_pac_bayes_with_weights(self, capsys, tmp_path):
        pi = tmp_path / "pi.json"
        pi.write_text(json.dumps([0.5, 0.5]))
        code, out, _ = run(
            capsys, "bound", "--bound", "pb-kl", "--n", "100", "--s", "5,5", "--rho", "0.7,0.3", "--pi", str(pi)
        )
        assert code == 0
        assert json.loads(out)["rows"][0]["radius"] == pytest.approx(0.076932, abs=1e-6)

    def test_pb_bernstein_branch(self, capsys):
        code, out, _ = run(
            capsys, "bound", "--bound", "pb-bernstein", "--n", "100", "--v-upper", "10", "--K", "1",
            "--rho", "1,0", "--pi", "0.36787944117144233,0.6321205588285577",
        )
        assert code == 0
        row = json.loads(out)["rows"][0]
        assert row["grid_size"] == 17 and row["branch"] == "variance_small"

    def test_csv_json_agree(self, capsys):
        argv = ["bound", "--bound", "bernstein", "--n", "1000", "--v", "10", "--K", "1"]
        _, js, _ = run(capsys, *argv)
        _, cs, _ = run(capsys, *argv, "--format", "csv")
        jrow = json.loads(js)["rows"][0]
        crow = csv_rows(cs)[0]
        for key in ("radius", "lambda_used", "grid_size"):
            assert float(crow[key]) == float(jrow[key])


class TestConfig:
    def test_config_and_override(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bound": "kl-drift", "n": 100, "s": 5, "delta": 0.1}))
        code, out, _ = run(capsys, "bound", "--config", str(cfg))
        assert code == 0 and json.loads(out)["metadata"]["delta"] == 0.1
        code, out, _ = run(capsys, "bound", "--config", str(cfg), "--delta", "0.05")
        assert json.loads(out)["metadata"]["delta"] == 0.05

    def test_unknown_key(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        code, _, _ = run(capsys, "bound", "--bound", "kl-drift", "--config", str(cfg))
        assert code == 2


class TestSimulate:
    ARGS = ("simulate", "--scenario", "iid", "--b", "0.3", "--n", "100", "--trials", "500", "--seed", "7")

    def test_report(self, capsys):
        code, out, _ = run(capsys, *self.ARGS)
        assert code == 0
        doc = json.loads(out)
        assert doc["metadata"]["seed"] == 7 and "PCG64" in doc["metadata"]["generator"]
        assert all(r["passed"] for r in doc["rows"])

    def test_byte_identical(self, capsys):
        _, a, _ = run(capsys, *self.ARGS, "--format", "csv")
        _, b, _ = run(capsys, *self.ARGS, "--format", "csv")
        assert a == b and a

    def test_output_dir_env(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("MARTINGALE_BOUNDS_OUTPUT_DIR", str(tmp_path))
        code, out, _ = run(capsys, *self.ARGS, "--output", "sub/report.json")
        assert code == 0 and out == ""
        assert json.loads((tmp_path / "sub" / "report.json").read_text())["rows"]

    def test_unknown_bound(self, capsys):
        code, _, _ = run(capsys, "simulate", "--scenario", "iid", "--bound", "nope", "--trials", "5")
        assert code == 2

    def test_iw(self, capsys):
        code, out, _ = run(
            capsys, "simulate", "--scenario", "iw", "--H", "5", "--pmin", "0.1", "--adaptive",
            "--bound", "pb-bernstein", "--trials", "200", "--seed", "7",
        )
        assert code == 0
        row = json.loads(out)["rows"][0]
        assert row["passed"] and row["bound_id"] == "pb-bernstein"


class TestCompare:
    def test_default_sweep(self, capsys):
        code, out, _ = run(capsys, "compare")
        rows = json.loads(out)["rows"]
        assert code == 0 and len(rows) > 3
        assert {"refined_beats_ha", "kl_beats_ha", "winner"} <= set(rows[0])

    def test_empty(self, capsys):
        code, out, _ = run(capsys, "compare", "--scenarios", "")
        assert code == 0 and json.loads(out)["rows"] == []

    def test_formats_agree(self, capsys):
        argv = ["compare", "--scenarios", "100:5;1000:10:10;100:50"]
        _, js, _ = run(capsys, *argv)
        _, cs, _ = run(capsys, *argv, "--format", "csv")
        for jrow, crow in zip(json.loads(js)["rows"], csv_rows(cs)):
            for key in ("kl_width", "pinsker_width", "refined_width", "ha_width", "bernstein_width"):
                assert float(crow[key]) == jrow[key]

    def test_bad_scenarios(self, capsys):
        code, _, _ = run(capsys, "compare", "--scenarios", "100:abc")
        assert code == 2


class TestVerify:
    def test_exact_mgf(self, capsys):
        code, out, _ = run(capsys, "verify", "--check", "exact-mgf", "--n-max", "300")
        assert code == 0
        assert "exact-mgf" in out

    def test_unknown_check(self, capsys):
        code, _, _ = run(capsys, "verify", "--check", "nope")
        assert code == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "martingale_bounds", "bound", "--bound", "kl-drift", "--delta", "0"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2
