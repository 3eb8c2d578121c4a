import csv
import io
import json
import subprocess
import sys

import pytest

from homotopy_scattering.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write_config(tmp_path, data):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_line_json(capsys):
    code, out, _ = run(capsys, "line")
    assert code == 0
    rep = json.loads(out)
    assert rep["status"] == "pass" and rep["command"] == "line"
    heitler = next(r for r in rep["records"] if r["check_id"] == "line.heitler")
    assert heitler["residual"] < 1e-14
    assert rep["provenance"]["versions"]["homotopy_scattering"]


def test_series_reference_forms_fail_and_corrected_pass(capsys, tmp_path):
    code, out, _ = run(capsys, "series")
    assert code == 1
    failed = {(r["check_id"], r["label"]) for r in json.loads(out)["records"] if not r["passed"]}
    assert failed == {("oracle.s_L", "(2,2)"), ("oracle.s_R", "(2,2)")}
    cfg = write_config(tmp_path, {"oracle_forms": "corrected"})
    code, out, _ = run(capsys, "series", "--config", cfg)
    assert code == 0


def test_output_is_deterministic(capsys):
    first = run(capsys, "series", "--format", "json")[1]
    second = run(capsys, "series", "--format", "json")[1]
    assert first == second


def test_csv_tables(capsys, tmp_path):
    path = tmp_path / "series.csv"
    code, _, _ = run(capsys, "series", "--format", "csv", "--output", str(path))
    assert code == 1
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert rows and set(rows[0]) == {"check_id", "label", "residual", "tolerance", "status"}
    coeffs = list(csv.DictReader(io.StringIO((tmp_path / "series_coefficients.csv").read_text())))
    keys = {(r["component"], r["alpha"], r["beta"]) for r in coeffs}
    assert ("v_ind", "3", "3") in keys and ("s_R", "2", "2") in keys
    assert "sigma3_im" in coeffs[0]


def test_text_shows_pauli_decomposition(capsys):
    code, out, _ = run(capsys, "series", "--format", "text", "--alpha-max", "2")
    assert "FAIL  oracle.s_L [(2,2)]" in out
    assert "s3:" in out and "(2,2) s_L" in out


def test_selftest_and_seed(capsys, tmp_path):
    cfg = write_config(tmp_path, {"selftest": {"complexes": 5}})
    code, a, _ = run(capsys, "selftest", "--config", cfg, "--seed", "4")
    assert code == 0
    b = run(capsys, "selftest", "--config", cfg, "--seed", "4")[1]
    c = run(capsys, "selftest", "--config", cfg, "--seed", "5")[1]
    assert a == b and a != c


def test_verify_relations_small_cutoff(capsys):
    code, out, _ = run(capsys, "verify-relations", "--cutoff", "20", "--alpha-max", "2")
    rep = json.loads(out)
    assert code == 0, [r for r in rep["records"] if not r["passed"]]


@pytest.mark.parametrize("data", [
    {"bogus": 1},
    {"model": {"kappa": -1.0}},
    {"tolerances": {"oracle_rel": 0}},
    {"oracle_forms": "guessed"},
    {"alpha_max": 0},
    {"sweep": {"n0_values": [4, 5, 6]}},
])
def test_config_errors_exit_2(capsys, tmp_path, data):
    code, out, err = run(capsys, "series", "--config", write_config(tmp_path, data))
    assert code == 2 and "configuration error" in err and out == ""


def test_missing_command_exit_2(capsys):
    assert run(capsys)[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "homotopy_scattering", "line", "--format", "text"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "PASS  line.heitler" in proc.stdout
