import csv
import io
import json
import math
import subprocess
import sys

import pytest

from hypdilog import __version__
from hypdilog.cli import SCHEMA_VERSION, main
from hypdilog.terms import bar_f, f_value


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    return code, json.loads(out), err


def test_special_passes_and_records_config(capsys):
    code, doc, _ = run_json(capsys, "special", "--samples", "2000", "--seed", "5")
    assert code == 0 and doc["passed"]
    assert doc["schema_version"] == SCHEMA_VERSION
    assert doc["library_version"] == __version__
    assert doc["seed"] == 5 and doc["config"]["samples"] == 2000
    assert {r["check"] for r in doc["rows"]} == {"pentagon", "reflection", "lemma"}


def test_tolerance_override_can_fail_a_check(capsys):
    code, doc, _ = run_json(capsys, "special", "--samples", "500", "--tol", "pentagon=1e-30")
    assert code == 1 and not doc["passed"]
    assert doc["config"]["tol"]["pentagon"] == 1e-30
    # untouched tolerances keep their defaults and are recorded
    assert doc["config"]["tol"]["reflection"] == 1e-11


def test_pants_values(capsys):
    code, doc, _ = run_json(capsys, "pants", "1", "2", "3")
    assert code == 0
    f_rows = [r for r in doc["rows"] if r["quantity"] == "f"]
    assert len(f_rows) == 3
    assert all(r["value"] == pytest.approx(f_value((1.0, 2.0, 3.0)), rel=1e-12) for r in f_rows)
    bar = next(r for r in doc["rows"] if r["quantity"] == "bar_f")
    assert bar["value"] == pytest.approx(bar_f((1.0, 2.0, 3.0)).value)
    assert doc["summary"]["variant_spread"] <= 1e-9


def test_pants_permutation_invariance(capsys):
    _, a, _ = run_json(capsys, "pants", "1", "2", "3")
    _, b, _ = run_json(capsys, "pants", "3", "1", "2")
    assert a["rows"][0]["value"] == pytest.approx(b["rows"][0]["value"], rel=1e-12)


def test_torus_table(capsys):
    code, doc, _ = run_json(capsys, "torus", "3", "3", "4", "--lmax", "12")
    assert code == 0
    assert doc["summary"]["curves"] == 34
    partial = [r["partial_G14"] for r in doc["rows"]]
    assert all(b < a for a, b in zip(partial, partial[1:]))
    assert doc["summary"]["G14"] == pytest.approx(13.15161647996238, rel=1e-12)


def test_torus_csv(capsys):
    code, out, err = run(capsys, "torus", "3", "3", "4", "--lmax", "6", "--csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and {"slope", "trace", "a", "term_G14", "partial_G14", "partial_G15"} <= set(rows[0])
    meta = json.loads(err)
    assert meta["command"] == "torus" and "rows" not in meta


def test_lasso_verify_symmetric_point(capsys):
    code, doc, _ = run_json(capsys, "lasso-verify", "2", "4", "--cd", "--samples", "3")
    assert code == 0
    first = doc["rows"][0]
    assert first["numeric"] == pytest.approx(math.pi**2 / 6, abs=1e-6)
    assert doc["summary"]["winner"] == "CminusD"


def test_lasso_verify_from_lengths(capsys):
    code, doc, _ = run_json(capsys, "lasso-verify", "0.8", "1.3", "--samples", "0")
    assert code == 0
    assert doc["summary"]["lasso_diff"] <= 1e-6


def test_simulate_pants_is_seed_deterministic(capsys):
    argv = ("simulate", "pants", "1", "2", "3", "--samples", "20000", "--seed", "7")
    code, a, _ = run_json(capsys, *argv)
    _, b, _ = run_json(capsys, *argv, "--workers", "3")
    assert code == 0
    assert a["summary"]["report"]["counts"] == b["summary"]["report"]["counts"]
    classes = {r["class"] for r in a["rows"]}
    assert {"W(P)", "H(M1)", "H(B3)", "W(L1,M2)", "HatF", "BarF"} <= classes


def test_simulate_torus(capsys):
    code, doc, _ = run_json(capsys, "simulate", "torus", "3", "3", "4", "--samples", "20000", "--lmax", "8")
    assert code == 0
    last = doc["rows"][-1]
    assert last["class"] == "W(T)" and last["truncation_allowance"] > 0


def test_identity_fourholed(capsys):
    code, doc, _ = run_json(capsys, "identity", "fourholed", "1", "1.5", "2", "2.5", "2", "0.3", "--lmax", "10")
    assert code == 0
    s = doc["summary"]
    assert s["monotone"] and s["partial_sum"] <= s["bound"] == pytest.approx(8 * math.pi**2)
    assert doc["rows"][0]["pairing"] in ("12|34", "34|12")


def test_identity_genus2(capsys):
    code, doc, _ = run_json(capsys, "identity", "genus2", "--samples", "4000", "--seed", "2")
    closure = next(r for r in doc["rows"] if r["class"] == "closure")
    assert closure["pass"]
    assert code in (0, 1)  # the modal-bin z-score is statistical at this size


def test_config_file_sits_under_flags(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nseed = 9\nsamples = 300\ntol.lemma = 1e-10\n")
    code, doc, _ = run_json(capsys, "special", "--config", str(cfg), "--seed", "4")
    assert code == 0
    assert doc["seed"] == 4
    assert doc["config"]["samples"] == 300
    assert doc["config"]["tol"]["lemma"] == 1e-10


def test_out_path(capsys, tmp_path):
    path = tmp_path / "out.json"
    code, out, _ = run(capsys, "pants", "1", "1", "1", "--json", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["command"] == "pants"


def test_text_output(capsys):
    code, out, err = run(capsys, "pants", "1", "2", "3")
    assert code == 0 and err == ""
    assert out.startswith("hypdilog") and "PASS" in out.splitlines()[0]


@pytest.mark.parametrize(
    "argv",
    [
        ["pants", "1", "2"],
        ["pants", "1", "2", "-3"],
        ["pants", "1", "2", "x"],
        ["torus", "1", "1", "1"],
        ["special", "--tol", "nonsense=1"],
        ["special", "--tol", "pentagon"],
        ["special", "--workers", "0"],
        ["simulate", "pants", "1", "2"],
        ["simulate", "genus2", "1"],
        ["identity", "fourholed", "1", "2"],
        ["bogus"],
        ["torus", "3", "3", "4", "--lmax", "-1"],
    ],
)
def test_invalid_input_exits_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == "" and err


def test_bad_config_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    code, _, err = run(capsys, "special", "--config", str(cfg))
    assert code == 2 and "colour" in err


def test_console_module_entry():
    proc = subprocess.run([sys.executable, "-m", "hypdilog.cli", "pants", "1", "2", "3", "--json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["passed"] is True
