import json
import subprocess
import sys

import numpy as np
import pytest

from sympten.cli import main
from sympten.linear import tensor_from_json


def _write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(path)


def _run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), (json.loads(err) if err.strip() else None)


V_WEDGE = {"n": 2, "order": 3, "signature": [1, 2],
           "entries": [{"idx": [1, 1, 3], "val": "-1/2"}, {"idx": [1, 3, 1], "val": "1/2"},
                       {"idx": [1, 2, 4], "val": "-1/2"}, {"idx": [1, 4, 2], "val": "1/2"}]}


def test_decompose_report_shape(tmp_path, capsys):
    path = _write(tmp_path, "t.json", V_WEDGE)
    code, rep, _ = _run(["decompose", path], capsys)
    assert code == 0 and rep["pass"]
    for key in ("command", "inputs_digest", "mode", "tolerances", "results", "residuals", "checks", "pass"):
        assert key in rep
    assert rep["mode"] == "rational"
    assert rep["inputs_digest"].startswith("sha256:")
    norms = rep["results"]["norms"]
    assert norms["vec_form"] == 0.5 and norms["Aprime"] == 0


def test_decompose_parts_round_trip(tmp_path, capsys):
    rng = np.random.default_rng(0)
    entries = [{"idx": [int(a) + 1 for a in rng.integers(0, 4, 3)], "val": str(int(v))}
               for v in rng.integers(1, 5, 12)]
    path = _write(tmp_path, "raw.json", {"n": 2, "order": 3, "entries": entries})
    code, rep, _ = _run(["decompose", path], capsys)
    assert code == 0 and rep["results"]["input_antisymmetrized"]
    for name, doc in rep["results"]["parts"].items():
        part_path = _write(tmp_path, f"{name}.json", doc)
        code2, rep2, _ = _run(["decompose", part_path], capsys)
        assert code2 == 0
        assert rep2["results"]["norms"][name] == rep["results"]["norms"][name]
        assert tensor_from_json(doc).signature == (1, 2)
    assert not rep2["results"]["input_antisymmetrized"]


def test_decompose_n1_degenerate(tmp_path, capsys):
    doc = {"n": 1, "order": 3, "signature": [1, 2], "entries": [{"idx": [1, 1, 2], "val": "1"}, {"idx": [1, 2, 1], "val": "-1"}]}
    code, rep, _ = _run(["decompose", _write(tmp_path, "t.json", doc)], capsys)
    assert code == 0 and rep["results"]["degenerate"] and "note" in rep["results"]


def test_invariants_command(tmp_path, capsys):
    doc = {"n": 2, "order": 3, "entries": [{"idx": [1, 3, 2], "val": "1"}, {"idx": [3, 1, 2], "val": "-1"},
                                           {"idx": [4, 3, 1], "val": "1"}, {"idx": [3, 4, 1], "val": "-1"}]}
    code, rep, _ = _run(["invariants", _write(tmp_path, "q.json", doc), "--all-matchings"], capsys)
    assert code == 0
    assert rep["results"]["r"]["r2"] == "2"
    assert rep["results"]["skew_in_first_two"] and rep["results"]["unique_invariant"] == "2"
    assert len(rep["results"]["matchings"]) == 15


def test_mode_precedence(tmp_path, capsys, monkeypatch):
    path = _write(tmp_path, "t.json", V_WEDGE)
    monkeypatch.setenv("SYMPTEN_MODE", "float")
    _, rep, _ = _run(["invariants", path], capsys)
    assert rep["mode"] == "float"
    _, rep, _ = _run(["invariants", path, "--mode", "rational"], capsys)
    assert rep["mode"] == "rational"
    monkeypatch.setenv("SYMPTEN_MODE", "bogus")
    code, _, err = _run(["invariants", path], capsys)
    assert code == 2 and err["error"]["type"] == "usage"


def test_classify_traces(capsys):
    code, rep, _ = _run(["classify-traces", "--n", "1,2"], capsys)
    assert code == 0
    assert rep["results"]["2"]["span_rank"] == 4 and rep["results"]["1"]["span_rank"] == 1


def test_tondeur_shipped_chart(tmp_path, capsys):
    out = tmp_path / "rep.json"
    code, _, _ = _run(["tondeur", "nonclosed_n2", "--lattice", "2", "--samples", "2", "--out", str(out)], capsys)
    rep = json.loads(out.read_text())
    assert code == 0 and rep["pass"]
    assert rep["residuals"]["max_nabla_omega"] < 1e-6
    assert len(rep["results"]["samples"]) == 2
    assert not rep["results"]["symplectic"]


def test_tondeur_constant_chart_symplectic(capsys):
    code, rep, _ = _run(["tondeur", "constant_n2", "--lattice", "2"], capsys)
    assert code == 0 and rep["results"]["symplectic"]


@pytest.mark.parametrize("argv, kind", [
    (["tondeur", "no_such_chart"], "usage"),
    (["tondeur", "nonclosed_n2", "--mode", "rational"], "usage"),
    (["verify", "--suite", "nope"], "usage"),
    (["verify", "--n", "a,b"], "usage"),
    (["verify", "--suite", "koszul", "--n", "5"], "usage"),
    (["classify-traces", "--mode", "float"], "usage"),
])
def test_usage_errors(argv, kind, capsys):
    code, out, err = _run(argv, capsys)
    assert code == 2 and out is None
    assert err["error"]["type"] == kind and err["error"]["message"]


def test_parse_errors(tmp_path, capsys):
    bad = _write(tmp_path, "bad.json", "{ not json")
    code, _, err = _run(["invariants", bad], capsys)
    assert code == 2 and err["error"]["type"] == "parse"
    chart = _write(tmp_path, "c.json", {"n": 1, "omega": {"1,2": "1 + x7"}})
    code, _, err = _run(["tondeur", chart], capsys)
    assert code == 2 and err["error"]["type"] == "parse" and "x7" in err["error"]["message"]


def test_degenerate_chart_rejected(tmp_path, capsys):
    chart = _write(tmp_path, "c.json", {"n": 1, "domain": [[-1, 1], [-1, 1]], "omega": {"1,2": "x1"}})
    code, _, err = _run(["tondeur", chart], capsys)
    assert code == 2 and err["error"]["type"] == "parse"


def test_chart_with_torsion_is_precondition_error(tmp_path, capsys):
    doc = {"n": 1, "omega": {"1,2": "1"}, "gamma": {"1,2,1": "1"}}
    code, _, err = _run(["tondeur", _write(tmp_path, "c.json", doc)], capsys)
    assert code == 2 and err["error"]["type"] == "precondition"


def test_failing_check_exits_one(tmp_path, capsys):
    path = _write(tmp_path, "t.json", V_WEDGE)
    # a negative tolerance cannot be met by any residual
    code, rep, _ = _run(["decompose", path, "--mode", "float", "--tol", "-1"], capsys)
    assert code == 1 and not rep["pass"]


def test_verify_koszul(capsys):
    code, rep, _ = _run(["verify", "--suite", "koszul", "--n", "1,2"], capsys)
    assert code == 0 and rep["results"]["koszul"]["pass"]
    assert all(c["pass"] for c in rep["checks"])


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "sympten.cli", "classify-traces", "--n", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["pass"]
