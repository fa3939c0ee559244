import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from sral import io
from sral.cli import main
from sral.elementary import ElementaryOperator

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = str(FIXTURES / "golden_pair.json")


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(io.dumps(obj))
    return str(path)


def test_jsr_golden_pair(capsys):
    assert main(["jsr", GOLDEN]) == 0
    out = json.loads(capsys.readouterr().out)
    golden = (1 + 5**0.5) / 2
    assert out["certified"] and out["lower"] <= golden <= out["upper"]
    assert out["upper"] - out["lower"] <= 1e-3 + 1e-12


def test_jsr_budget_exhaustion_exit_code(monkeypatch, capsys):
    monkeypatch.setenv("SRAL_BUDGET", "2")
    assert main(["jsr", GOLDEN]) == 3
    out = json.loads(capsys.readouterr().out)
    assert not out["certified"] and out["lower"] <= out["upper"]
    assert main(["jsr", GOLDEN, "--budget", "5e7"]) == 0


def test_tsr_writes_bracket(tmp_path):
    out = tmp_path / "tsr.json"
    assert main(["tsr", GOLDEN, "--depth", "4", "-o", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["lower"] <= rep["upper"]


def test_malformed_and_missing_inputs(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2")
    assert main(["jsr", str(bad)]) == 2
    assert main(["jsr", str(tmp_path / "nope.json")]) == 2
    assert main(["riesz", GOLDEN, "--center", "1", "--radius", "0.5"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["jsr"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_riesz_diagonal(tmp_path, capsys):
    path = _write(tmp_path, "a.json", io.matrix_to_json(np.diag([1.0, 3.0])))
    assert main(["riesz", path, "--center", "1", "--radius", "0.5"]) == 0
    p = io.matrix_from_json(json.loads(capsys.readouterr().out))
    assert np.array_equal(p, np.diag([1.0, 0.0]))
    assert main(["riesz", path, "--center", "1", "--radius", "2"]) == 2


def test_elem_checks(tmp_path, capsys):
    T = ElementaryOperator.single(np.diag([1.0, 2.0]), np.array([[1.0, 1.0], [0.0, 1.0]]))
    path = _write(tmp_path, "t.json", io.operator_to_json(T))
    assert main(["elem", path, "trace"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["trace"] == pytest.approx([6.0, 0.0])
    assert main(["elem", path, "spec"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["radius"] == pytest.approx(2.0)
    assert main(["elem", path, "inclusion"]) == 2
    capsys.readouterr()


def test_elem_inclusion_counterexample(capsys):
    code = main(["elem", str(FIXTURES / "inclusion_counterexample.json"), "inclusion"])
    rep = json.loads(capsys.readouterr().out)
    assert code == 4
    assert rep["hypothesis_satisfied"] is False and rep["inclusion_holds"] is False


def test_triangularize_outputs_chain(tmp_path, capsys):
    n = np.diag([1.0, 1.0], 1)
    path = _write(tmp_path, "g.json", {"generators": [io.matrix_to_json(n)]})
    assert main(["triangularize", path]) == 0
    chain = io.chain_from_json(json.loads(capsys.readouterr().out))
    assert [b.shape[1] for b in chain.bases] == [1, 2]
    path = _write(tmp_path, "bad.json", {"generators": [io.matrix_to_json(np.eye(2))]})
    assert main(["triangularize", path]) == 4
    assert json.loads(capsys.readouterr().out)["hypothesis_satisfied"] is False


def test_decay_csv(tmp_path, capsys):
    n = np.diag(np.ones(3), 1)
    cfg = {"radical": [io.matrix_to_json(n)], "bounded": [io.matrix_to_json(np.eye(4))], "fraction": 0.5}
    path = _write(tmp_path, "cfg.json", cfg)
    assert main(["decay", path, "--m-max", "8"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "m,count_enumerated,max_norm,root" and len(lines) == 9
    assert lines[-1].endswith(",0.0,0.0")
    assert main(["decay", path, "--fraction", "1.5"]) == 2
    capsys.readouterr()


def test_pair_report(tmp_path, capsys):
    T = ElementaryOperator(2, 2, [(np.eye(2), np.eye(2))])
    path = _write(tmp_path, "t.json", io.operator_to_json(T))
    assert main(["pair", path, "--p", "0.5"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["pair_norm"] == pytest.approx([1.0, 1.0])
    assert main(["pair", path, "--p", "2"]) == 2
    capsys.readouterr()


def test_verify_single_suite(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", "trace", "-o", str(out)]) == 0
    table = capsys.readouterr().out
    assert table.split() == ["trace", "PASS"]
    rep = json.loads(out.read_text())
    assert rep["passed"] and [s["suite"] for s in rep["suites"]] == ["trace"]
    assert main(["verify", "--suite", "nonexistent"]) == 2
    capsys.readouterr()


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "sral", "verify", "--suite", "trace", "-o", str(tmp_path / "r.json")],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    assert "PASS" in proc.stdout
