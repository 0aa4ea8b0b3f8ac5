import json
import subprocess
import sys

import pytest

from refltrace.checks import Check
from refltrace.cli import ConfigError, RunReport, SuiteConfig, emit, main, run
from refltrace.tensor_core import loads


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_empty_suite_list(tmp_path, capsys):
    path = write(tmp_path, {"suites": []})
    assert main(["verify", path]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["rows"] == [] and out["passed"] is True


def test_axioms_suite_rows(tmp_path, capsys):
    path = write(tmp_path, {"suites": ["axioms"]})
    assert main(["verify", path, "--no-timing"]) == 0
    out = json.loads(capsys.readouterr().out)
    tags = [r["tag"] for r in out["rows"]]
    assert tags == sorted(tags)
    assert set(tags) == {"YBE", "transp", "unitarity", "cross", "cross-2", "crossing-unitarity", "crosscom1"}
    assert "timing" not in out


def test_failing_row_gives_exit_one(tmp_path, capsys):
    path = write(tmp_path, {"suites": ["axioms"], "tolerances": {"YBE": 1e-300}})
    assert main(["verify", path]) == 1
    out = json.loads(capsys.readouterr().out)
    assert [r["tag"] for r in out["rows"] if not r["passed"]] == ["YBE"]


def test_global_tolerance_flag(tmp_path, capsys):
    path = write(tmp_path, {"suites": ["delta"]})
    assert main(["verify", path, "--tol", "-1"]) == 1
    capsys.readouterr()


def test_suite_flag_overrides_config(tmp_path, capsys):
    path = write(tmp_path, {"suites": ["axioms"]})
    assert main(["verify", path, "--suite", "delta"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert [r["tag"] for r in out["rows"]] == ["d"]


def test_dimension_guard(tmp_path, capsys):
    path = write(tmp_path, {"cards_N": [4], "cards_M": [4], "sites": 3})
    assert main(["verify", path]) == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "dimension-guard"


def test_config_errors(tmp_path, capsys):
    assert main(["verify", write(tmp_path, {"suites": ["bogus"]})]) == 2
    assert main(["verify", write(tmp_path, {"nope": 1})]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["verify", str(bad)]) == 2
    assert main(["verify", str(tmp_path / "missing.json")]) == 2
    errs = [json.loads(line) for line in capsys.readouterr().err.splitlines()]
    assert all(e["error"] == "config" for e in errs)


def test_uncertified_model_is_recorded_not_raised(tmp_path, capsys):
    path = write(tmp_path, {"model": {"name": "rational", "n": 3}, "suites": ["axioms", "reflection"]})
    assert main(["verify", path]) == 1
    rows = {r["tag"]: r for r in json.loads(capsys.readouterr().out)["rows"]}
    assert not rows["certify"]["passed"]
    assert "reflection:skipped" in rows


def test_report_round_trip():
    cfg = SuiteConfig.from_dict({"suites": ["axioms", "delta"]})
    rep = run(cfg)
    again = RunReport.from_dict(json.loads(emit(rep)))
    assert emit(again) == emit(rep)
    assert [r.to_dict() for r in again.rows] == [r.to_dict() for r in sorted(rep.rows, key=lambda r: r.tag)]


def test_text_table_is_fixed_width():
    rep = RunReport({}, [Check("YBE", "x", 1e-16, 1e-12), Check("zz", "y", 1.0, 1e-12)], {"YBE": "axioms", "zz": "axioms"})
    lines = emit(rep, "text").splitlines()
    assert len({len(ln) for ln in lines[2:4]}) == 1
    assert lines[2].endswith("PASS") and lines[3].endswith("FAIL")
    assert lines[-1] == "2 rows, 1 failed"


def test_report_subcommand(tmp_path, capsys, monkeypatch):
    path = write(tmp_path, {"suites": ["delta"]})
    dump = tmp_path / "rep.json"
    assert main(["verify", path, "--dump", str(dump)]) == 0
    capsys.readouterr()
    assert main(["report", "--input", str(dump), "--format", "text"]) == 0
    assert "1 rows, 0 failed" in capsys.readouterr().out


@pytest.mark.parametrize("obj", ["R", "fusedR", "K", "Kplus", "T", "t", "T0", "K0", "H", "H-dressed"])
def test_dump_matrix(tmp_path, obj):
    path = write(tmp_path, {})
    out = tmp_path / f"{obj}.txt"
    assert main(["dump-matrix", path, "--object", obj, "--dump", str(out)]) == 0
    op = loads(out.read_text())
    assert op.dim >= 2


def test_default_pipeline_has_tagged_rows():
    rep = run(SuiteConfig.from_dict({"suites": ["all"], "count": 2}))
    tags = {r.tag for r in rep.rows}
    assert any(t.startswith("greq[") for t in tags)
    assert any(t.startswith("comrel[") for t in tags)
    assert any(t.startswith("prop3[") for t in tags)
    suites = [rep.suites[r.tag] for r in rep.rows]
    order = ["axioms", "fused", "reflection", "traces", "classical", "delta"]
    assert suites == sorted(suites, key=order.index)
    assert rep.passed, [(r.tag, r.residual) for r in rep.rows if not r.passed]


def test_guard_via_run():
    with pytest.raises(ConfigError):
        run(SuiteConfig.from_dict({"cards_N": [6], "cards_M": [5]}))


def test_module_entry_point(tmp_path):
    path = write(tmp_path, {"suites": ["delta"]})
    proc = subprocess.run([sys.executable, "-m", "refltrace.cli", "verify", path, "--format", "text"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "PASS" in proc.stdout
