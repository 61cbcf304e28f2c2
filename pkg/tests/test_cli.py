from __future__ import annotations

import json
import subprocess
import sys

import pytest

from ipq.cli import main
from ipq.matrix import read_matrix, write_matrix, write_weights


def run(capsys, *argv) -> tuple[int, dict]:
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else {})


@pytest.fixture
def files(tmp_path, four, two):
    A, x, y = two
    paths = {k: tmp_path / f"{k}.txt" for k in ("four", "two", "x", "y", "one")}
    write_matrix(four, paths["four"])
    write_matrix(A, paths["two"])
    write_weights(x, paths["x"])
    write_weights(y, paths["y"])
    paths["one"].write_text("dense 1 5\n5\n")
    return paths


def test_gen_planted(tmp_path, capsys):
    out = tmp_path / "m.txt"
    code, rep = run(capsys, "gen", "planted", "--n", 16, "--rho", 4, "--m", 64, "--seed", 1, "-o", out)
    assert code == 0 and rep["total"] == 64
    assert read_matrix(out).entries.sum() == 64


def test_gen_random_zero(tmp_path, capsys):
    out = tmp_path / "z.txt"
    run(capsys, "gen", "random", "--n", 8, "--rho", 3, "--p", 0, "-o", out)
    assert not read_matrix(out).entries.any()


def test_gen_graph_family(tmp_path, capsys):
    out = tmp_path / "g.txt"
    code, rep = run(capsys, "gen", "graph-family", "--family", "g1", "--n", 64, "--rho", 2, "-o", out)
    assert rep["Q"] == 384 and (tmp_path / "g.txt.weights").exists()
    code, rep = run(capsys, "verify", "--graph", out, "--weights", str(out) + ".weights")
    assert rep["exact"] == 384


def test_gen_bad_params(tmp_path, capsys):
    code = main(["gen", "planted", "--n", "16", "--rho", "4", "--m", "60", "-o", str(tmp_path / "m")])
    assert code == 2 and "nearest feasible" in capsys.readouterr().err


def test_estimate_verify(files, capsys):
    code, rep = run(capsys, "estimate", "--matrix", files["four"], "--epsilon", "0.4", "--verify", "--trials", 20, "--assert")
    assert code == 0 and rep["exact"] == 29 and rep["in_interval_fraction"] >= 0.9
    assert rep["schema_version"] == 1 and "relative_error" in rep
    assert rep["queries"]["total"] == sum(t["queries"]["total"] for t in rep["trials"])


def test_estimate_zero_matrix(tmp_path, capsys):
    z = tmp_path / "z.txt"
    z.write_text("dense 3 1\n0 0 0\n0 0 0\n0 0 0\n")
    code, rep = run(capsys, "estimate", "--matrix", z, "--epsilon", "0.25")
    assert rep["estimate"] == 0 and rep["queries"]["total"] > 0 and "relative_error" not in rep


def test_estimate_weighted(files, capsys):
    code, rep = run(capsys, "estimate", "--matrix", files["two"], "--x", files["x"], "--y", files["y"], "--epsilon", "0.3", "--verify")
    assert rep["problem"] == "bilinear" and rep["exact"] == 23


def test_sample_single_entry(files, capsys):
    code, rep = run(capsys, "sample", "--matrix", files["one"], "--epsilon", "0.25", "--samples", 10)
    assert rep["frequencies"] == {"0,0": 1.0} and rep["tv_distance"] == 0


def test_sample_fixture_assert(files, capsys):
    code, rep = run(capsys, "sample", "--matrix", files["four"], "--epsilon", "0.25", "--samples", 50000, "--assert")
    assert code == 0 and rep["tv_distance"] < 0.02 and rep["chi_square"]["df"] == 10


def test_sample_weighted(files, capsys):
    code, rep = run(capsys, "sample", "--matrix", files["two"], "--x", files["x"], "--y", files["y"], "--epsilon", "0.25", "--samples", 20000)
    assert set(rep["frequencies"]) == {"0,0", "1,0", "1,1"}
    assert abs(rep["frequencies"]["1,0"] - 12 / 23) < 0.1


def test_sample_zero_matrix(tmp_path, capsys):
    z = tmp_path / "z.txt"
    z.write_text("dense 2 1\n0 0\n0 0\n")
    code, rep = run(capsys, "sample", "--matrix", z, "--epsilon", "0.25", "--samples", 5)
    assert code == 1 and rep["error"] == "all_zero_matrix"


def test_regr_test(files, capsys):
    code, rep = run(capsys, "regr-test", "--matrix", files["four"], "--row", 0, "--samples", 100000, "--assert")
    assert code == 0 and rep["tv_distance"] < 0.02
    assert rep["max_queries_per_call"] <= rep["query_budget"] == 6
    assert rep["target"] == {"0": 1 / 6, "1": 0.5, "3": 1 / 3}


def test_regr_test_singleton_and_zero_rows(tmp_path, capsys):
    m = tmp_path / "m.txt"
    m.write_text("dense 3 2\n0 2 0\n0 0 0\n1 1 1\n")
    code, rep = run(capsys, "regr-test", "--matrix", m, "--row", 0, "--samples", 1000)
    assert rep["tv_distance"] == 0
    code, rep = run(capsys, "regr-test", "--matrix", m, "--row", 1, "--samples", 1000)
    assert code == 1 and rep["error"] == "zero_mass"


def test_assert_failure_sets_exit_code(files, capsys):
    code, rep = run(capsys, "sample", "--matrix", files["four"], "--epsilon", "0.25", "--samples", 50, "--assert")
    assert code == 1 and rep["assertions"][0]["passed"] is False


def test_verify_limit(tmp_path, capsys, monkeypatch):
    import ipq.cli as cli

    monkeypatch.setattr(cli, "VERIFY_LIMIT", 2)
    m = tmp_path / "m.txt"
    m.write_text("dense 3 1\n0 0 0\n0 0 0\n0 0 0\n")
    assert main(["estimate", "--matrix", str(m), "--epsilon", "0.25", "--verify"]) == 2
    assert "limited" in capsys.readouterr().err


def test_parse_error_reports_line(tmp_path, capsys):
    m = tmp_path / "bad.txt"
    m.write_text("dense 2 3\n1 9\n0 0\n")
    assert main(["verify", "--matrix", str(m)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_json_out(files, tmp_path, capsys):
    out = tmp_path / "r.json"
    code, rep = run(capsys, "verify", "--matrix", files["four"], "--json-out", out)
    assert json.loads(out.read_text()) == rep and rep["exact"] == 29


def test_env_override(files, capsys, monkeypatch):
    monkeypatch.setenv("IPQ_CK", "0.5")
    code, rep = run(capsys, "estimate", "--matrix", files["four"], "--epsilon", "0.25")
    assert rep["constants"]["c_k"] == 0.5


def test_module_entry_point(files):
    proc = subprocess.run(
        [sys.executable, "-m", "ipq", "verify", "--matrix", str(files["four"])], capture_output=True, text=True
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["exact"] == 29
