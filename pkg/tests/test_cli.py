from __future__ import annotations

import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from helpers import perturbed_document
from tqft_orbifold import catalog
from tqft_orbifold import treecalc as tc
from tqft_orbifold.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, main
from tqft_orbifold.orbifold import datum_from_dict, datum_to_dict


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, json.loads(out.out), out.err.strip()


def test_validate_builtin(capsys):
    code, rep, err = run(capsys, "validate", "fibonacci")
    assert code == EXIT_OK and rep["passed"]
    assert err == "validate: PASS"
    assert rep["exit_code"] == 0 and rep["tool"] == "tqft_orbifold"


def test_validate_crossed_and_triangulation(capsys):
    assert run(capsys, "validate", "ty_z2_minus")[0] == EXIT_OK
    assert run(capsys, "validate", "L(3,1)")[0] == EXIT_OK


def test_validate_perturbed_file(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(perturbed_document(catalog.builtin_document("ising"), "F")))
    code, rep, err = run(capsys, "validate", str(p))
    assert code == EXIT_FAIL
    assert not rep["passed"]
    assert err == "validate: FAIL"


def test_validate_missing_file(capsys):
    code, rep, err = run(capsys, "validate", "/nonexistent/cat.json")
    assert code == EXIT_INPUT
    assert "error" in rep
    assert err == "validate: INPUT ERROR"


def test_validate_malformed_json(capsys, tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{"format": "fuscat/1"')
    assert run(capsys, "validate", str(p))[0] == EXIT_INPUT


def test_tv_value(capsys):
    code, rep, _ = run(capsys, "tv", "vec_z2", "L(3,1)")
    assert code == EXIT_OK
    assert rep["tv"][0] == pytest.approx(0.5)


def test_tv_both_paths(capsys):
    code, rep, _ = run(capsys, "tv", "ising", "RP3", "--both-paths")
    assert code == EXIT_OK
    assert rep["difference"] < 1e-10
    assert rep["orbifold"][0] == pytest.approx(rep["tv"][0])


def test_tv_builtin_parameters(capsys):
    code, rep, _ = run(capsys, "tv", "vec_g:cocycle=omega", "RP3")
    assert code == EXIT_OK
    assert abs(rep["tv"][0]) < 1e-12


def test_build_and_check(capsys, tmp_path):
    out = tmp_path / "d.json"
    code, rep, _ = run(capsys, "orbifold", "build", "--from-spherical", "fibonacci", "-o", str(out))
    assert code == EXIT_OK and out.exists()
    code, rep, err = run(capsys, "orbifold", "check", str(out))
    assert code == EXIT_OK
    assert rep["report"]["failing"] == []
    assert err == "orbifold check: PASS"


def test_build_commutative_and_crossed(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "orbifold", "build", "--from-commutative", "vec_z2", "--algebra", "1,g",
               "-o", str(a))[0] == EXIT_OK
    assert run(capsys, "orbifold", "check", str(a))[0] == EXIT_OK
    assert run(capsys, "orbifold", "build", "--from-crossed", "ty_z2_plus", "--m=-1=X",
               "-o", str(b))[0] == EXIT_OK
    assert run(capsys, "orbifold", "check", str(b))[0] == EXIT_OK


def test_build_rejects_non_commutative_braiding(capsys):
    code, rep, _ = run(capsys, "orbifold", "build", "--from-commutative", "vec_z2_chi",
                       "--algebra", "1,g")
    assert code == EXIT_FAIL
    assert "twist" in rep["error"]


def test_tampered_datum_reports_failing_conditions(capsys, tmp_path):
    out = tmp_path / "d.json"
    run(capsys, "orbifold", "build", "--from-spherical", "vec_z2", "-o", str(out))
    d = datum_from_dict(json.loads(out.read_text()))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(datum_to_dict(d.replace(alpha=d.alpha * 1.01))))
    code, rep, err = run(capsys, "orbifold", "check", str(bad))
    assert code == EXIT_FAIL
    assert "O1" in rep["report"]["failing"]
    assert err == "orbifold check: FAIL"


def test_transport_and_iso_check(capsys, tmp_path):
    d, t = tmp_path / "d.json", tmp_path / "t.json"
    run(capsys, "orbifold", "build", "--from-spherical", "vec_z2", "-o", str(d))
    code, rep, _ = run(capsys, "orbifold", "transport", str(d), "--blocks", "2,1", "-o", str(t))
    assert code == EXIT_OK
    assert len(rep["psi_ratio"]) == 2
    assert max(r["residual"] for r in rep["psi_ratio"]) < 1e-10
    assert run(capsys, "orbifold", "check", str(t))[0] == EXIT_OK
    code, rep, _ = run(capsys, "orbifold", "iso-check", str(d), "--blocks", "2,1")
    assert code == EXIT_OK


def test_iso_check_against_file(capsys, tmp_path):
    d, rho = tmp_path / "d.json", tmp_path / "rho.json"
    run(capsys, "orbifold", "build", "--from-spherical", "vec_z2", "-o", str(d))
    datum = datum_from_dict(json.loads(d.read_text()))
    D = np.eye(4)
    D[1, 1] = -1
    rho.write_text(json.dumps(tc.Morphism(datum.cat, datum.T.carrier, datum.T.carrier,
                                          {0: D}).to_dict()))
    code, rep, _ = run(capsys, "orbifold", "iso-check", str(d), "--against", str(d), "--rho",
                       str(rho))
    assert code == EXIT_FAIL
    assert run(capsys, "orbifold", "iso-check", str(d), "--against", str(d))[0] == EXIT_INPUT


def test_catalog_list(capsys):
    code, rep, _ = run(capsys, "catalog", "list")
    assert code == EXIT_OK
    assert "fibonacci" in rep["available"]["categories"]
    assert "l31" in rep["available"]["triangulations"]


def test_report_file(capsys, tmp_path):
    p = tmp_path / "r.json"
    code, rep, _ = run(capsys, "tv", "vec", "S3_2tet", "--report", str(p))
    assert code == EXIT_OK
    assert json.loads(p.read_text()) == rep


@pytest.mark.skipif(shutil.which("tqft-orbifold") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["tqft-orbifold", "validate", "vec"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["passed"]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "tqft_orbifold.cli", "catalog", "list"],
                         capture_output=True, text=True)
    assert res.returncode == 0
