import importlib.util
import json
import os
import subprocess
import sys

import pytest
from conftest import ROOT, fixture_path

from dgtower.cli import main


def load_fixture_script():
    spec = importlib.util.spec_from_file_location("make_fixtures", os.path.join(ROOT, "scripts", "make_fixtures.py"))
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


MAKE = load_fixture_script()


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_d3(capsys):
    code, out, _ = run(capsys, "check", fixture_path("d3.jsonl"))
    assert code == 0
    assert "summary: valid, positively graded" in out


def test_fiberseq_c1(capsys):
    code, out, _ = run(capsys, "fiberseq", fixture_path("c1.jsonl"), "-n", "0", "--cap", "4", "--json")
    assert code == 0
    report = json.loads(out)
    assert report["ok"]
    assert all(entry["theta_quasi_iso"] for entry in report["homs"].values())


def test_rigidify_massey_fails_with_values(capsys):
    code, out, _ = run(capsys, "rigidify", fixture_path("massey.jsonl"), "--json")
    assert code == 1
    report = json.loads(out)
    assert report["status"] == "obstructed"
    assert report["failing_stage"] == 0
    assert report["derivation"] == {"g": {"class0": 1}}


def test_rigidify_liftable(capsys):
    code, out, _ = run(capsys, "rigidify", fixture_path("massey_liftable.jsonl"))
    assert code == 0 and "status: lifted" in out


def test_obstruct_exit_codes(capsys):
    assert run(capsys, "obstruct", fixture_path("massey.jsonl"), "-n", "0")[0] == 1
    assert run(capsys, "obstruct", fixture_path("massey_liftable.jsonl"), "-n", "0")[0] == 0


def test_input_errors(capsys, tmp_path):
    assert run(capsys, "check", str(tmp_path / "missing.jsonl"))[0] == 2
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"kind": "manifest", "version": 1, "field": "Q"}\n{"kind": "nope"}\n')
    code, _, err = run(capsys, "check", str(bad))
    assert code == 2 and "line 2" in err
    assert run(capsys, "bigmodel", fixture_path("poly.jsonl"), "-n", "0", "--cap", "1")[0] == 2
    assert run(capsys, "obstruct", fixture_path("c1.jsonl"), "-n", "0")[0] == 2
    assert run(capsys, "frobnicate", fixture_path("c1.jsonl"))[0] == 2


def test_check_reports_invalid_category(capsys, tmp_path):
    text = open(fixture_path("c1.jsonl"), encoding="utf-8").read()
    broken = tmp_path / "broken.jsonl"
    broken.write_text(text.replace('"result": [["s1", "1"]]', '"result": [["s1", "2"]]', 1))
    code, out, _ = run(capsys, "check", str(broken))
    assert code == 1 and "valid: no" in out


@pytest.mark.parametrize("fixture,args,golden", MAKE.GOLDEN, ids=[g for _, _, g in MAKE.GOLDEN])
def test_golden_reports(capsys, fixture, args, golden):
    with open(fixture_path(os.path.join("golden", f"{golden}.txt")), encoding="utf-8") as fh:
        expected = fh.read()
    code, out, _ = run(capsys, args[0], fixture_path(fixture), *args[1:])
    assert f"exit {code}\n{out}" == expected


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dgtower.cli", "check", fixture_path("d3.jsonl")],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "valid, positively graded" in proc.stdout
