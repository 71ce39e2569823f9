import json
import math
import subprocess
import sys

import numpy as np
import pytest

from condvendi import EmbeddingSet, save_embeddings
from condvendi.cli import main


@pytest.fixture
def fixture_files(tmp_path):
    rng = np.random.default_rng(95)
    x_path = tmp_path / "x.emb1"
    t_path = tmp_path / "t.emb1"
    save_embeddings(EmbeddingSet(rng.standard_normal((32, 4))), x_path)
    save_embeddings(EmbeddingSet(rng.standard_normal((32, 3))), t_path)
    return str(x_path), str(t_path)


def run_cli(args):
    return main(args)


class TestScoreCommand:
    def test_constant_prompts_information_is_one(self, tmp_path):
        rng = np.random.default_rng(96)
        x_path, t_path = tmp_path / "x.emb1", tmp_path / "t.emb1"
        save_embeddings(EmbeddingSet(rng.standard_normal((20, 3))), x_path)
        save_embeddings(EmbeddingSet(np.ones((20, 2))), t_path)
        out = tmp_path / "report.json"
        code = run_cli(["score", "--x", str(x_path), "--t", str(t_path),
                        "--sigma-x", "1.0", "--sigma-t", "1.0", "--out", str(out)])
        assert code == 0
        report = json.loads(out.read_text())
        assert abs(report["information_vendi"] - 1.0) <= 1e-8

    def test_output_bytes_are_deterministic(self, fixture_files, tmp_path):
        x_path, t_path = fixture_files
        outs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            code = run_cli(["score", "--x", x_path, "--t", t_path,
                            "--alpha", "1.0", "--seed", "7", "--out", str(out)])
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_product_identity_from_json(self, tmp_path):
        rng = np.random.default_rng(97)
        x_path, t_path = tmp_path / "x.emb1", tmp_path / "t.emb1"
        save_embeddings(EmbeddingSet(rng.standard_normal((128, 6))), x_path)
        save_embeddings(EmbeddingSet(rng.standard_normal((128, 4))), t_path)
        out = tmp_path / "r.json"
        code = run_cli(["score", "--x", str(x_path), "--t", str(t_path),
                        "--sigma-x", "1.0", "--sigma-t", "1.0", "--out", str(out)])
        assert code == 0
        r = json.loads(out.read_text())
        product = r["conditional_vendi"] * r["information_vendi"]
        assert abs(product - r["vendi_x"]) <= 1e-6 * r["vendi_x"]
        assert list(r) == ["order", "n", "sigma_x", "sigma_t", "vendi_x", "vendi_t",
                           "conditional_vendi", "information_vendi", "h_x", "h_t",
                           "h_xt", "h_x_given_t", "i_xt"]

    def test_csv_output(self, fixture_files, tmp_path):
        x_path, t_path = fixture_files
        out = tmp_path / "r.csv"
        code = run_cli(["score", "--x", x_path, "--t", t_path, "--sigma-x", "1",
                        "--sigma-t", "1", "--csv", "--out", str(out)])
        assert code == 0
        header, row = out.read_text().strip().split("\n")
        assert header.startswith("order,n,sigma_x")
        assert len(row.split(",")) == len(header.split(","))

    def test_missing_file_gives_error_json(self, tmp_path, capsys):
        code = run_cli(["score", "--x", str(tmp_path / "nope.emb1"),
                        "--t", str(tmp_path / "nope.emb1"),
                        "--sigma-x", "1", "--sigma-t", "1"])
        assert code == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"]["type"] == "IoError"

    def test_no_partial_file_on_failure(self, fixture_files, tmp_path):
        x_path, t_path = fixture_files
        target = tmp_path / "missing_dir" / "report.json"
        code = run_cli(["score", "--x", x_path, "--t", t_path, "--sigma-x", "1",
                        "--sigma-t", "1", "--out", str(target)])
        assert code == 1
        assert not target.exists()


class TestBandwidthCommand:
    def test_csv_lists_sigma_variance_rows(self, fixture_files, tmp_path):
        x_path, _ = fixture_files
        out = tmp_path / "bw.csv"
        code = run_cli(["bandwidth", "--x", x_path, "--grid", "0.5,1,2",
                        "--trials", "3", "--subsample", "16", "--csv",
                        "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "sigma,variance"
        assert len(lines) == 4

    def test_json_selection(self, fixture_files, tmp_path):
        x_path, _ = fixture_files
        out = tmp_path / "bw.json"
        code = run_cli(["bandwidth", "--x", x_path, "--grid", "0.1:10:5",
                        "--trials", "3", "--subsample", "16", "--out", str(out)])
        assert code == 0
        r = json.loads(out.read_text())
        assert r["sigma"] in r["candidates"]
        assert len(r["variances"]) == 5


class TestDecomposeCommand:
    def test_reports_modes(self, fixture_files, tmp_path):
        x_path, t_path = fixture_files
        out = tmp_path / "dec.json"
        code = run_cli(["decompose", "--x", x_path, "--t", t_path, "--modes", "2",
                        "--sigma-x", "1", "--sigma-t", "1", "--out", str(out)])
        assert code == 0
        r = json.loads(out.read_text())
        assert len(r["modes"]) == 2
        assert all(len(m["top_samples"]) == 5 for m in r["modes"])

    def test_labels_add_group_report(self, fixture_files, tmp_path):
        x_path, t_path = fixture_files
        labels = tmp_path / "labels.txt"
        labels.write_text("\n".join(["1"] * 16 + ["2"] * 16))
        out = tmp_path / "dec.json"
        code = run_cli(["decompose", "--x", x_path, "--t", t_path, "--modes", "2",
                        "--sigma-x", "1", "--sigma-t", "1",
                        "--labels", str(labels), "--out", str(out)])
        assert code == 0
        r = json.loads(out.read_text())
        assert len(r["groups"]["per_group"]) == 2
        weights = [g["weight"] for g in r["groups"]["per_group"]]
        assert weights == [0.5, 0.5]


class TestSimulateCommand:
    def test_substitution_trend(self, tmp_path):
        out = tmp_path / "sub.csv"
        code = run_cli(["simulate", "--scenario", "substitution", "--seed", "0",
                        "--n-samples", "64", "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "rate,information_vendi,vendi,conditional_vendi"
        rows = [line.split(",") for line in lines[1:]]
        info = [float(r[1]) for r in rows]
        assert info[0] > info[-1]

    def test_mode_growth_specified(self, tmp_path):
        out = tmp_path / "growth.csv"
        code = run_cli(["simulate", "--scenario", "mode_growth_specified",
                        "--seed", "0", "--modes", "4", "--out", str(out)])
        assert code == 0
        rows = [line.split(",") for line in out.read_text().strip().split("\n")[1:]]
        vendi = [float(r[2]) for r in rows]
        cond = [float(r[3]) for r in rows]
        assert vendi[-1] / vendi[0] >= 3.0
        assert max(cond) / min(cond) <= 1.2

    def test_aggregation_single_group_gap_is_tiny(self, tmp_path):
        out = tmp_path / "agg.csv"
        code = run_cli(["simulate", "--scenario", "theorem1", "--seed", "0",
                        "--modes", "1", "--n-samples", "300", "--repeats", "2",
                        "--out", str(out)])
        assert code == 0
        rows = [line.split(",") for line in out.read_text().strip().split("\n")[1:]]
        assert len(rows) == 2
        for row in rows:
            assert float(row[1]) <= 1e-3  # gap column
            assert row[4] == "true"  # passed column

    def test_unknown_scenario_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run_cli(["simulate", "--scenario", "bogus"])
        assert exc.value.code == 2


def test_module_entry_point(fixture_files, tmp_path):
    x_path, t_path = fixture_files
    result = subprocess.run(
        [sys.executable, "-m", "condvendi.cli", "score", "--x", x_path,
         "--t", t_path, "--sigma-x", "1", "--sigma-t", "1"],
        capture_output=True, text=True)
    assert result.returncode == 0
    report = json.loads(result.stdout)
    assert math.isfinite(report["vendi_x"])


def test_thread_cap_env(fixture_files):
    x_path, t_path = fixture_files
    result = subprocess.run(
        [sys.executable, "-m", "condvendi.cli", "score", "--x", x_path,
         "--t", t_path, "--sigma-x", "1", "--sigma-t", "1"],
        capture_output=True, text=True, env={"PATH": "/usr/bin:/bin",
                                             "VENDI_THREADS": "1"})
    assert result.returncode == 0
    json.loads(result.stdout)
