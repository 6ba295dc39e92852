import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np

from unirel import families as fam

from unirel.cli import main, run
from unirel.relations import dump_json

DATA = Path(__file__).resolve().parent.parent / "data"


def d(name):
    return str(DATA / name)


def test_analyze_u2_is_case_three():
    report, code, _ = run(["analyze", d("u2.json")])
    assert code == 0
    case = report["result"]["case"]
    assert case["case"] == "III" and case["core_shape"] == "{(0,0,w1,0)}"
    assert len(report["inputs"]["sha256"][d("u2.json")]) == 64


def test_analyze_identity_and_family():
    assert run(["analyze", d("identity.json")])[0]["result"]["case"]["case"] == "V"
    case = run(["analyze", d("u_0_e1.json")])[0]["result"]["case"]
    assert case["case"] == "IV" and abs(case["canonical"]["a"]) < 1e-12
    assert case["core_description"].startswith("{(z1,0,w1,0)")


def test_classify_exit_codes():
    report, code, _ = run(["classify", d("u_0.3_i.json"), d("u_0.4_i.json")])
    assert code == 1 and report["result"]["status"] == "Disproved"
    assert report["result"]["witness"]["invariant"] == "canonical a"
    report, code, _ = run(["classify", d("u2.json"), d("u2.json")])
    assert code == 0 and report["result"]["certificate"]["independently_verified"]


def test_classify_permutations_uses_exact_decision():
    report, code, _ = run(["classify", d("theta4a.json"), d("theta4b.json")])
    assert code == 1
    assert report["result"]["witness"]["u"] == "(11,22,12)"


def test_permutations_command():
    report, code, _ = run(["permutations", "2", "2"])
    assert code == 0 and report["result"]["class_count"] == 9
    assert report["result"]["matches_listed_representatives"]
    report, code, _ = run(["permutations", "1", "3"])
    assert code == 0 and report["result"]["class_count"] == 3
    assert run(["permutations", "3", "3"])[1] == 3


def test_verify_command():
    report, code, _ = run(["verify", d("u1.json"), "-N", "3"])
    assert code == 0 and report["result"]["failed"] == 0
    report, code, _ = run(["verify", d("identity.json"), "--suite", "relations"])
    assert code == 0 and {c["suite"] for c in report["result"]["checks"]} == {"relations"}


def test_tolerance_override_is_reported_and_used(tmp_path):
    rel = fam.random_relation(2, 2, np.random.default_rng(0))
    f = tmp_path / "r.json"
    dump_json(rel, f)
    report, code, _ = run(["--tol-relation", "0", "verify", str(f), "-N", "3", "--suite", "relations"])
    assert report["tolerances"]["relation"] == 0.0
    assert code == 1  # floating point residuals are not exactly zero


def test_malformed_json_reports_position(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2,\n "m": 2, "u": [1, }')
    code = main(["analyze", str(bad)])
    assert code == 3
    out = json.loads(capsys.readouterr().out)
    assert out["error"]["type"] == "ParseError" and out["error"]["line"] == 2


def test_non_unitary_input_is_rejected(tmp_path):
    f = tmp_path / "nu.json"
    f.write_text(json.dumps({"n": 1, "m": 1, "u": [[2.0]]}))
    report, code, _ = run(["analyze", str(f)])
    assert code != 0 and report["error"]["type"] == "NotUnitary"


def test_missing_file():
    report, code, _ = run(["analyze", "/nonexistent/file.json"])
    assert code == 3 and "error" in report


def test_reports_identical_modulo_timings():
    a, _, _ = run(["classify", d("u1.json"), d("u3.json"), "--restarts", "4"])
    b, _, _ = run(["classify", d("u1.json"), d("u3.json"), "--restarts", "4"])
    a.pop("timings"), b.pop("timings")
    assert json.dumps(a) == json.dumps(b)
    c, _, _ = run(["--no-timings", "analyze", d("u3.json")])
    assert "timings" not in c


def test_out_flag_writes_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["--out", str(out), "analyze", d("u1.json")]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["result"]["n"] == 2


def test_module_entry_point():
    env = dict(os.environ)
    proc = subprocess.run([sys.executable, "-m", "unirel", "permutations", "1", "2"],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["class_count"] == 2


def test_classify_rectangular_permutations_falls_back_to_numeric(tmp_path):
    for name, cycles in (("a", "(31,32)"), ("b", "(22,32)")):
        (tmp_path / f"{name}.json").write_text(json.dumps({"n": 3, "m": 2, "perm": cycles}))
    report, code, _ = run(["classify", str(tmp_path / "a.json"), str(tmp_path / "b.json")])
    assert code == 0 and report["result"]["status"] == "Equivalent"
    assert report["result"]["certificate"]["independently_verified"]


def test_output_flags_accepted_after_subcommand(tmp_path):
    out = tmp_path / "r.json"
    report, _, args = run(["permutations", "1", "2", "--no-timings", "--out", str(out)])
    assert "timings" not in report and args.out == str(out)
    assert "timings" in run(["permutations", "1", "2"])[0]
