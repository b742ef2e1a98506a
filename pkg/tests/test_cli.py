import csv
import io
import json
import math

import jsonschema
import pytest

from slext.cli import main, parse_grid
from slext.errors import ValidationError
from slext.report import dumps, format_float, load_schema

SCHEMA = load_schema()


def _run(tmp_path, *argv, fmt="json", name="out"):
    out = tmp_path / f"{name}.{fmt}"
    code = main([*argv, "--format", fmt, "--output", str(out)])
    text = out.read_text() if out.exists() else None
    return code, text


def _report(tmp_path, *argv, name="out"):
    code, text = _run(tmp_path, *argv, name=name)
    assert code == 0, text
    rep = json.loads(text)
    jsonschema.validate(rep, SCHEMA)
    return rep, text


def test_parse_grid():
    assert parse_grid("-2:2:1") == [-2.0, -1.0, 0.0, 1.0, 2.0]
    assert parse_grid("0:0:1") == [0.0]
    assert len(parse_grid("-2:2:0.1")) == 41
    assert parse_grid("0.5,1") == [0.5, 1.0]
    for bad in ("1:0:1", "0:1:0", "0:1", "a:b:c", "0:1:-1", ""):
        with pytest.raises(ValidationError):
            parse_grid(bad)


def test_format_float():
    assert format_float(0.1) == "0.10000000000000001"
    assert float(format_float(math.pi)) == math.pi
    assert format_float(math.nan) == "null" and format_float(-0.0) == "0"
    assert dumps({"a": [1.0, None], "b": {}}) == '{\n  "a": [1, null],\n  "b": {}\n}\n'


@pytest.mark.parametrize("kappa,left", [(0.5, "LCC"), (1.0, "LPC")])
def test_classify(tmp_path, kappa, left):
    rep, _ = _report(tmp_path, "classify", "--potential", "inverse-square", "--kappa", str(kappa))
    assert rep["results"]["left"]["verdict"] == left
    assert rep["results"]["right"]["verdict"] == "LPC"


def test_classify_missing_kappa(tmp_path, capsys):
    code, _ = _run(tmp_path, "classify", "--potential", "inverse-square")
    assert code == 2
    assert "--kappa" in capsys.readouterr().err


def test_eigen_examples(tmp_path):
    rep, _ = _report(tmp_path, "eigen", "--kappa", "0.5", "--theta", "2.3561945",
                     "--emin", "-10", "--emax", "-1e-8")
    (e,) = rep["results"]["eigenvalues"]
    assert e["E"] == pytest.approx(-1.0, abs=1e-6)
    rep, _ = _report(tmp_path, "eigen", "--kappa", "0.5", "--theta", "0", "--emin", "-10",
                     "--emax", "-1e-8", name="none")
    assert rep["results"]["eigenvalues"] == []
    code, _ = _run(tmp_path, "eigen", "--kappa", "1.5", "--theta", "0.5", name="bad")
    assert code == 2


def test_eigen_closure(tmp_path):
    rep, _ = _report(tmp_path, "eigen", "--kappa", "1.5", "--emin", "-10", "--emax", "-1e-3")
    assert rep["results"]["extension"]["kind"] == "closure"
    assert rep["results"]["eigenvalues"] == []


def test_ab_spectrum_examples(tmp_path):
    rep, _ = _report(tmp_path, "ab", "spectrum", "--flux", "0.5", "--tau1", "const:2.3561945",
                     "--tau2", "const:0", "--p-grid", "-2:2:1")
    c0 = rep["results"]["channels"][0]
    for p, E in zip(rep["results"]["p_grid"], c0["energies"]):
        assert E == [pytest.approx(-1 + p * p, abs=1e-6)]
    assert all(e == [] for e in rep["results"]["channels"][1]["energies"])
    rep, _ = _report(tmp_path, "ab", "spectrum", "--flux", "2", "--tau", "const:0",
                     "--p-grid", "0:0:1", name="int")
    assert rep["results"]["channels"][0]["energies"] == [[]]
    code, _ = _run(tmp_path, "ab", "spectrum", "--flux", "0.5", "--tau", "const:0",
                   "--p-grid", "0:0:1", name="bad")
    assert code == 2


def test_transform_check_examples(tmp_path):
    rep, _ = _report(tmp_path, "ab", "transform-check", "--n-r", "96", "--n-z", "64")
    res = rep["results"]
    assert res["parseval_defect"] <= 1e-3 and res["leakage"] <= 1e-8
    rep, _ = _report(tmp_path, "ab", "transform-check", "--field", "zero", "--n-r", "64",
                     "--n-z", "32", name="zero")
    assert rep["results"]["parseval_defect"] == 0 and rep["results"]["intertwining_defect"] == 0
    code, _ = _run(tmp_path, "ab", "transform-check", "--r-support", "0,2", name="axis")
    assert code == 2


def test_decompose(tmp_path):
    rep, _ = _report(tmp_path, "decompose", "--kappa", "0.5", "--theta", "1.5707963267948966")
    res = rep["results"]
    assert res["membership"] == "in_extension_only"
    assert res["theta"] == pytest.approx(math.pi / 2)
    rep, _ = _report(tmp_path, "decompose", "--kappa", "0.5", "--theta", "0", name="out2")
    assert rep["results"]["membership"] == "outside"


def test_solve_ivp(tmp_path):
    rep, _ = _report(tmp_path, "solve-ivp", "--potential", "constant", "--value", "1",
                     "--x0", "0", "--x-target", "1", "--a", "-inf", "--samples", "5")
    res = rep["results"]
    assert res["x"] == [0, 0.25, 0.5, 0.75, 1]
    assert res["u"][-1] == pytest.approx(math.cosh(1.0), rel=1e-9)


def test_csv_matches_json(tmp_path):
    argv = ("eigen", "--kappa", "-0.25", "--theta", "2.2", "--emin", "-100", "--emax", "-1e-6")
    rep, _ = _report(tmp_path, *argv)
    code, text = _run(tmp_path, *argv, fmt="csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == len(rep["results"]["eigenvalues"])
    for row, e in zip(rows, rep["results"]["eigenvalues"]):
        for key in ("E", "residual", "mismatch", "R"):
            assert float(row[key]) == e[key]


def test_determinism_and_replay(tmp_path):
    argv = ("ab", "spectrum", "--flux", "0.3", "--tau1", "expr:pi/2+0.5", "--tau2", "2.9",
            "--p-grid", "0:1:0.5")
    _, first = _report(tmp_path, *argv, name="a")
    _, second = _report(tmp_path, *argv, name="b")
    assert first == second
    cfg = tmp_path / "a.json"
    _, replay = _report(tmp_path, "ab", "spectrum", "--config", str(cfg), name="c")
    assert replay == first


def test_config_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kappa": 0.5, "theta": 2.0, "emin": -5}))
    rep, _ = _report(tmp_path, "eigen", "--config", str(cfg), "--theta", "2.5")
    inp = rep["inputs"]
    assert (inp["kappa"], inp["theta"], inp["emin"], inp["emax"]) == (0.5, 2.5, -5, -1e-8)


def test_config_errors(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kappa": 0.5, "nonsense": 1}))
    assert _run(tmp_path, "eigen", "--config", str(cfg))[0] == 2
    cfg.write_text("{not json")
    assert _run(tmp_path, "eigen", "--config", str(cfg))[0] == 2
    assert _run(tmp_path, "eigen", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_malformed_inputs_exit_2(tmp_path):
    assert _run(tmp_path, "eigen", "--kappa", "abc")[0] == 2
    assert _run(tmp_path, "eigen", "--kappa", "nan")[0] == 2
    assert _run(tmp_path, "eigen", "--kappa", "0.5", "--emin", "1", "--emax", "2")[0] == 2
    assert _run(tmp_path, "ab", "spectrum", "--flux", "0.5", "--tau1", "const:9",
                "--tau2", "0", "--p-grid", "0:0:1")[0] == 2
    assert main(["frobnicate"]) == 2


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("SLEXT_OUTPUT_DIR", str(tmp_path / "reports"))
    assert main(["classify", "--kappa", "0.25"]) == 0
    rep = json.loads((tmp_path / "reports" / "classify.json").read_text())
    jsonschema.validate(rep, SCHEMA)
    assert not [p for p in (tmp_path / "reports").iterdir() if p.suffix == ".tmp"]


def test_timing_opt_in(tmp_path):
    rep, _ = _report(tmp_path, "classify", "--kappa", "0.25")
    assert rep["timing"] is None
    code = main(["classify", "--kappa", "0.25", "--timing", "--output", str(tmp_path / "t.json")])
    rep = json.loads((tmp_path / "t.json").read_text())
    assert code == 0 and rep["timing"]["wall_seconds"] >= 0
    jsonschema.validate(rep, SCHEMA)
