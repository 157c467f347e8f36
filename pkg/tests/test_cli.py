import json
import subprocess
import sys

import pytest

from paracontact.cli import main
from paracontact.models import builtin
from paracontact.suites import SUITES, default_tol, run_suite


def run(args, tmp_path):
    out = tmp_path / "report.json"
    code = main([*args, "--report", str(out)])
    return code, json.loads(out.read_text())


def test_all_on_default_model(tmp_path, capsys):
    code, rep = run(["all"], tmp_path)
    assert code == 0
    assert [r["suite"] for r in rep] == list(SUITES)
    status = {r["suite"]: r["status"] for r in rep}
    assert status["normal-corollaries"] == "pass"
    assert status["main1"] == "skipped"
    assert "PASS" in capsys.readouterr().out


def test_report_fields(tmp_path):
    _, rep = run(["bipara-axioms", "--samples", "4", "--seed", "5"], tmp_path)
    (r,) = rep
    assert r["model"] == "darboux2" and r["seed"] == 5 and r["samples"] == 4
    for c in r["checks"]:
        assert set(c) >= {"check", "anchor", "residual", "tol", "worst_point", "passed"}
        assert c["anchor"]
        if isinstance(c["residual"], float) and c["residual"]:
            assert len(f"{c['residual']:.3g}") >= len(repr(c["residual"])) - 1


def test_reports_are_deterministic(tmp_path):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    _, a = run(["all", "--model", "builtin:kappa_mu"], tmp_path / "a")
    _, b = run(["all", "--model", "builtin:kappa_mu"], tmp_path / "b")
    for r in a + b:
        r.pop("wall_time")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_main4_skips_on_unit_invariant(tmp_path):
    code, rep = run(["main4", "--model", "builtin:kappa_mu_flat"], tmp_path)
    assert code == 0
    assert rep[0]["status"] == "skipped" and rep[0]["reason"] == "I_M = ±1"


def test_kappa_mu_suite_on_sasakian_model_fails(tmp_path):
    code, rep = run(["kappa-mu-core"], tmp_path)
    assert code == 1
    assert rep[0]["status"] == "fail" and "Sasakian" in rep[0]["reason"]


def test_errors_exit_two(tmp_path, capsys):
    assert main(["all", "--model", str(tmp_path / "nope.json")]) == 2
    assert main(["all", "--model", "builtin:nope"]) == 2
    assert main(["all", "--samples", "0"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["no-such-suite"])
    assert exc.value.code == 2


def test_axiom_failure_on_load_exits_two(tmp_path):
    src = json.loads(builtin("kappa_mu").to_json())
    src["facts"] = {}
    src["fields"]["phi1"] = src["fields"]["phi"]
    src["fields"]["phi2"] = src["fields"]["phi"]
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(src))
    assert main(["all", "--model", str(path)]) == 2


def test_user_model_file(tmp_path):
    path = tmp_path / "km.json"
    path.write_text(builtin("kappa_mu_small").to_json())
    code, rep = run(["all", "--model", str(path)], tmp_path)
    assert code == 0
    assert {r["suite"]: r["status"] for r in rep}["main4"] == "pass"


def test_tolerance_precedence(monkeypatch, tmp_path):
    bm = builtin("darboux1")
    assert default_tol(bm) == 1e-8
    assert default_tol(builtin("kappa_mu")) == 1e-10
    monkeypatch.setenv("PARACONTACT_TOL", "1e-30")
    assert default_tol(bm) == 1e-30
    assert run_suite("structures", bm, samples=2)[0].status == "fail"
    assert run_suite("structures", bm, samples=2, tol=1e-8)[0].status == "pass"


def test_unknown_suite_in_api():
    with pytest.raises(KeyError):
        run_suite("nope", builtin("darboux1"))


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "paracontact.cli", "structures", "--model", "builtin:darboux1",
                           "--samples", "2"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "PASS" in proc.stdout
