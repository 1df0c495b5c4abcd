import json
import subprocess
import sys

import pytest

from opca.cli import main


def run(capsys, *argv):
    code = main(list(argv) + ["--out", "-"])
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out else None), out.err


def test_graph_and_dot(capsys, tmp_path):
    code, rep, _ = run(capsys, "graph", "--presentation", "Z6xZ5")
    assert code == 0
    assert rep["result"]["num_vertices"] == 30 or len(rep["result"]["vertices"]) == 30
    assert rep["result"]["dot_source"].startswith("digraph")
    dot = tmp_path / "g.dot"
    code, rep, _ = run(capsys, "graph", "--presentation", "Z", "--window", "3", "--dot", str(dot))
    assert code == 0 and dot.read_text().startswith("digraph")
    assert rep["result"]["dot"] == "g.dot"


def test_infinite_group_needs_a_window(capsys):
    code, rep, err = run(capsys, "graph", "--presentation", "Z2")
    assert code == 2 and rep is None and "--window" in err


def test_quotient_check_exit_codes(capsys):
    code, rep, _ = run(capsys, "quotient-check", "--source", "Z2", "--target", "Z6xZ5", "--level", "pedantic")
    assert code == 0 and rep["exit_code"] == 0
    code, rep, _ = run(capsys, "quotient-check", "--source", "Z2", "--target", "Z6xZ5", "--level", "pedantic2")
    assert code == 1 and rep["result"]["level_reached"] == "pedantic"
    code, rep, _ = run(capsys, "quotient-check", "--source", "Z", "--target", "Z4")
    assert code == 1


def test_malformed_presentation_reports_position(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"generators": ["a"],\n "relators": ["a a^-1 a"], "model": {"cyclic": [3]}}')
    code, _, err = run(capsys, "quotient-check", "--source", "Z", "--target", str(bad))
    assert code == 2
    assert "2" in err and "bad.json" in err


def test_validate_and_assemble(capsys):
    assert run(capsys, "validate-rule", "--rule", "partial-swap", "--presentation", "Z8")[0] == 0
    code, rep, _ = run(capsys, "validate-rule", "--rule", "unbalanced-walk", "--presentation", "Z8")
    assert code == 1 and rep["result"]["passed"] is False
    code, rep, _ = run(capsys, "assemble", "--rule", "shift-qubit", "--presentation", "Z6")
    assert code == 0 and rep["result"]["translation"]["passed"]
    code, rep, _ = run(capsys, "assemble", "--rule", "xor", "--presentation", "Z6")
    assert code == 1 and rep["result"]["assembled"] is False


def test_evolve(capsys):
    code, rep, _ = run(capsys, "evolve", "--rule", "shift-classical", "--presentation", "Z4", "--state", "1000",
                       "--steps", "2")
    assert code == 0 and rep["result"]["output"] == {"populations": {"0010": 1.0}}
    code, rep, _ = run(capsys, "evolve", "--rule", "shift-classical", "--presentation", "Z4", "--state", "1000",
                       "--steps", "0")
    assert rep["result"]["output"] == "1000"
    code, rep, _ = run(capsys, "evolve", "--rule", "shift-qubit", "--presentation", "Z", "--window", "5",
                       "--operator", "X@0", "--steps", "2")
    assert code == 0 and rep["result"]["output"]["region"] == [[2]]
    code, _, err = run(capsys, "evolve", "--rule", "shift-classical", "--presentation", "Z4", "--state", "10")
    assert code == 2 and "4 digits" in err


def test_influence_and_extraction(capsys):
    code, rep, _ = run(capsys, "influence", "--rule", "xor", "--presentation", "Z5", "--site", "0", "--graph")
    assert code == 0
    assert rep["result"]["causal_forward"] == [[0], [1], [2], [3], [4]]
    assert sorted(map(tuple, rep["result"]["signalling_forward"])) == [(0,), (1,), (4,)]
    assert len(rep["result"]["influence_graph"]) == 25
    code, rep, _ = run(capsys, "extract-blocks", "--rule", "shift-qubit", "--presentation", "Z5")
    assert code == 0 and rep["result"]["reducible"] is True
    code, rep, _ = run(capsys, "extract-blocks", "--rule", "shift-qubit", "--presentation", "Z5", "--offsets", "1")
    assert code == 1


def test_wrap_verify(capsys, tmp_path):
    args = ["wrap-verify", "--rule", "shift-qubit", "--source", "Z", "--window", "16", "--quotient", "Z8"]
    code, rep, _ = run(capsys, *args, "--steps", "3")
    assert code == 0 and rep["result"]["verdict"] == "match"
    code, rep, _ = run(capsys, *args, "--steps", "3", "--target-rule", "shift-qubit-tampered")
    assert code == 1 and rep["result"]["verdict"] == "mismatch"
    code, _, err = run(capsys, *args, "--steps", "4")
    assert code == 2 and "injectivity radius" in err


def test_norms(capsys, tmp_path):
    f = tmp_path / "m.json"
    f.write_text(json.dumps({"backend": "classical", "d": 2, "matrix": [[1, -1], [0, 1]]}))
    code, rep, _ = run(capsys, "norms", "--input", str(f))
    assert code == 0 and rep["result"]["sup"] == pytest.approx(2.0)


def test_tolerance_override_and_output_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("OPCA_OUTPUT_DIR", str(tmp_path))
    assert main(["quotient-check", "--source", "Z", "--target", "Z8", "--tol", "support=1e-7"]) == 0
    assert capsys.readouterr().out == ""
    rep = json.loads((tmp_path / "quotient-check.json").read_text())
    assert rep["tolerances"]["support"] == 1e-7
    assert rep["command"] == "quotient-check" and "schema_version" in rep
    assert main(["quotient-check", "--source", "Z", "--target", "Z8", "--tol", "support=1e-20"]) == 2


def test_selftest_subset(capsys):
    code, rep, err = run(capsys, "selftest", "--criterion", "3", "--criterion", "7")
    assert code == 0
    assert "[PASS] criterion 3" in err and "[PASS] criterion 7" in err


def test_console_script_runs():
    out = subprocess.run([sys.executable, "-m", "opca.cli", "graph", "--presentation", "Z4", "--out", "-"],
                         capture_output=True, text=True, check=False)
    assert out.returncode == 0
    assert json.loads(out.stdout)["command"] == "graph"
