import json
import os
import subprocess
import sys

import pytest

from pmin.cli import main
from pmin.verifier import bundled_profiles_dir

EX = bundled_profiles_dir()


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_ex21(capsys):
    code, out, _ = run(capsys, "analyze", EX / "ex21.json", "--ns", 60, "--nt", 60)
    doc = json.loads(out)
    assert code == 0
    assert doc["proper"]["verdict"] == "proper"
    assert doc["injectivity_violations"] == [] and doc["non_immersed_points"] == []
    assert doc["tolerances"]["singular"] == 1e-10


def test_classify_ex42(capsys):
    code, out, _ = run(capsys, "classify", EX / "ex42.json")
    assert code == 0 and json.loads(out)["kind"] == "non_helicoid"


def test_mesh_obj(capsys, tmp_path):
    out = tmp_path / "out.obj"
    code, _, _ = run(capsys, "mesh", EX / "ex21.json", "--ns", 50, "--nt", 50, "-o", out)
    lines = out.read_text().splitlines()
    assert code == 0
    assert sum(ln.startswith("v ") for ln in lines) == 2500
    assert sum(ln.startswith("f ") for ln in lines) == 2 * 49 * 49


def test_eval_formats(capsys):
    code, out, _ = run(capsys, "eval", EX / "plane.json", "--ns", 2, "--nt", 3, "--t-range", 0, 1)
    assert code == 0 and out.splitlines()[0] == "s,t,x,y,z" and len(out.splitlines()) == 7
    code, out, _ = run(capsys, "eval", EX / "plane.json", "--ns", 2, "--nt", 2, "--format", "json")
    assert len(json.loads(out)["points"]) == 4


def test_golden_ok(capsys):
    code, out, _ = run(capsys, "golden")
    assert code == 0 and "FAIL" not in out


def test_golden_corrupted(capsys, tmp_path):
    for f in EX.glob("*.json"):
        (tmp_path / f.name).write_text(f.read_text())
    doc = json.loads((tmp_path / "ex21.json").read_text())
    doc["theta"] = "atan(t) + pi/3"
    (tmp_path / "ex21.json").write_text(json.dumps(doc))
    code, out, _ = run(capsys, "golden", "--examples", tmp_path)
    assert code == 1 and "ex21/implicit equation" in out


def test_golden_missing_examples(capsys, tmp_path):
    code, _, err = run(capsys, "golden", "--examples", tmp_path / "nope")
    assert code == 2 and "not found" in err


def test_parse_error_names_file_and_line(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "gamma": "t",\n  "theta": "sin(t"\n}\n')
    code, _, err = run(capsys, "analyze", bad)
    assert code == 2 and "bad.json:3" in err and "theta" in err
    bad.write_text('{"theta": "t",')
    code, _, err = run(capsys, "classify", bad)
    assert code == 2 and "bad.json:1" in err


def test_invalid_flags(capsys):
    assert run(capsys, "analyze", EX / "ex21.json", "--ns", 1)[0] == 2
    assert run(capsys, "analyze", EX / "ex21.json", "--tol-singular", -1)[0] == 2
    assert run(capsys, "analyze", EX / "missing.json")[0] == 2


def test_verify_with_patch(capsys):
    code, out, _ = run(capsys, "verify", EX / "y_eq_xz.json", "--patch", 0.5, 2, -1, 1)
    doc = json.loads(out)
    assert code == 0 and doc["pde"]["second_order"] and doc["legendrian"]["ok"]


def test_output_is_deterministic(tmp_path):
    env = dict(os.environ)
    docs = []
    for threads in ("1", "4"):
        env["PMIN_THREADS"] = threads
        out = tmp_path / f"r{threads}.json"
        subprocess.run([sys.executable, "-m", "pmin.cli", "analyze", str(EX / "ex21.json"),
                        "--ns", "80", "--nt", "80", "-o", str(out)], check=True, env=env)
        docs.append(out.read_bytes())
    assert docs[0] == docs[1]
