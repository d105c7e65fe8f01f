import json
import subprocess
import sys

import pytest

from incidence_braid.cli import main

FAMILY1 = {"u": 1, "v": 1, "sigma_a": [0], "tau_a": [0], "sigma_b": [0], "tau_b": [0],
           "field": {"kind": "rationals"}, "epsilon": "1", "alpha": "1",
           "beta_a": "2", "beta_b": "2", "gamma": "3"}


def write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def table_file(tmp_path):
    params = write(tmp_path / "p.json", FAMILY1)
    out = tmp_path / "t.json"
    assert main(["build", params, "--out", str(out)]) == 0
    return out


def test_build_writes_group_like_entries(table_file):
    doc = json.loads(table_file.read_text())
    assert doc["schema"] == "incidence-braid/1"
    ent = {(tuple(map(tuple, e["src"])), tuple(map(tuple, e["dst"]))): e["coeff"] for e in doc["entries"]}
    assert ent[((("a0", "a0"), ("b0", "b0")), (("b0", "b0"), ("a0", "a0")))] == "1"


def test_verify_all(table_file, tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", str(table_file), "--mode", "all", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    full = next(c for c in rep["checks"] if c["check"] == "braid_full")
    assert full["checked"] == 125 and rep["passed"]
    assert rep["properties"][0]["check"] == "r_squared"


def test_verify_sts_mode_fails_on_family1(table_file, tmp_path):
    assert main(["verify", str(table_file), "--mode", "sts", "--out", str(tmp_path / "r.json")]) == 1


def test_verify_perturbed(table_file, tmp_path):
    doc = json.loads(table_file.read_text())
    doc["entries"][5]["coeff"] = "7"
    bad = write(tmp_path / "bad.json", doc)
    out = tmp_path / "r.json"
    assert main(["verify", bad, "--mode", "full", "--out", str(out)]) == 1
    ce = json.loads(out.read_text())["checks"][0]["counterexample"]
    assert set(ce) == {"S", "T", "lbe", "rbe"}


def test_verify_truncated(table_file, tmp_path):
    bad = tmp_path / "trunc.json"
    bad.write_text(table_file.read_text()[:150])
    assert main(["verify", str(bad)]) == 2


def test_verify_verbose_residuals(table_file, tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", str(table_file), "--mode", "reduced", "--verbose", "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())["checks"][0]["residuals"]) == 31


def test_matrix_guard_is_input_error(table_file):
    assert main(["verify", str(table_file), "--mode", "matrix", "--guard-dim", "5"]) == 2


def test_build_rejects_zero_alpha(tmp_path, capsys):
    p = write(tmp_path / "p.json", dict(FAMILY1, alpha="0"))
    assert main(["build", p]) == 2
    assert "alpha must be nonzero" in capsys.readouterr().err


def test_build_rejects_non_coprime(tmp_path, capsys):
    doc = dict(FAMILY1, u=2, v=2, sigma_a=[0, 1], tau_a=[1, 0], sigma_b=[0, 1], tau_b=[1, 0])
    assert main(["build", write(tmp_path / "p.json", doc)]) == 2
    assert "u,v not coprime" in capsys.readouterr().err


def test_count(tmp_path, capsys):
    chain2 = write(tmp_path / "c.json", {"elements": ["x", "y"], "covers": [["x", "y"]]})
    point = write(tmp_path / "pt.json", {"elements": ["x"], "covers": []})
    for path, n, want in [(chain2, 3, "125"), (chain2, 2, "25"), (point, 3, "1")]:
        assert main(["count", path, "--arity", str(n)]) == 0
        assert capsys.readouterr().out.strip() == want


def test_search_bad_prime(tmp_path, capsys):
    spec = write(tmp_path / "s.json", {k: FAMILY1[k] for k in ("u", "v", "sigma_a", "tau_a", "sigma_b", "tau_b")})
    assert main(["search", spec, "--prime", "4"]) == 2
    assert "modulus not prime" in capsys.readouterr().err


def test_search_char2(tmp_path):
    spec = write(tmp_path / "s.json", {k: FAMILY1[k] for k in ("u", "v", "sigma_a", "tau_a", "sigma_b", "tau_b")})
    out = tmp_path / "r.json"
    assert main(["search", spec, "--prime", "2", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["counts"]["3"] == 4 and rep["counts"]["tuples"] == 8


def test_search_reports_stated_condition_mismatches(tmp_path):
    spec = write(tmp_path / "s.json", {k: FAMILY1[k] for k in ("u", "v", "sigma_a", "tau_a", "sigma_b", "tau_b")})
    out = tmp_path / "r.json"
    assert main(["search", spec, "--prime", "3", "--out", str(out)]) == 1
    rep = json.loads(out.read_text())
    assert rep["soundness"]["failures"] == 0
    assert rep["sts_agreement"]["mismatches"] == 12


def test_search_guard(tmp_path):
    spec = write(tmp_path / "s.json", {k: FAMILY1[k] for k in ("u", "v", "sigma_a", "tau_a", "sigma_b", "tau_b")})
    assert main(["search", spec, "--prime", "5", "--max-tuples", "10"]) == 2


def test_reports_identical_across_workers(table_file, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["verify", str(table_file), "--workers", "1", "--out", str(a)])
    main(["verify", str(table_file), "--workers", "2", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point(table_file):
    res = subprocess.run([sys.executable, "-m", "incidence_braid", "verify", str(table_file), "--mode", "reduced"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["passed"]


def test_bad_arguments():
    assert main(["verify"]) == 2


def test_missing_input_file(tmp_path, capsys):
    assert main(["verify", str(tmp_path / "nope.json")]) == 2
    assert "no such file" in capsys.readouterr().err


def test_bad_worker_env(table_file, monkeypatch):
    monkeypatch.setenv("INCIDENCE_BRAID_WORKERS", "0")
    assert main(["verify", str(table_file), "--mode", "reduced"]) == 2
