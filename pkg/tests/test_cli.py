import csv
import io
import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from thermoflat.cli import EXIT_DOMAIN, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _schema():
    text = resources.files("thermoflat").joinpath("schemas/run_output.schema.json").read_text()
    return json.loads(text)


def _csv_body(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.reader(io.StringIO("\n".join(lines))))


def test_box_density_reference_row(capsys):
    code, out, _ = run(["box-density", "--tau", "60", "--grid", "11"], capsys)
    assert code == EXIT_OK
    assert "# check rho_q(0.2)_matches_printed = true" in out
    assert "# check rho_q(0.5)_matches_printed = true" in out
    body = _csv_body(out)
    assert body[0] == ["xi", "rho_q"]
    row = {float(r[0]): float(r[1]) for r in body[1:]}
    assert abs(row[0.2] - 1.07855849250) <= 5e-12
    assert abs(row[0.5] - 1.07855849256) <= 5e-12


def test_output_is_deterministic(tmp_path, capsys):
    # the output path is part of the recorded config, so reuse it
    target = tmp_path / "out.csv"
    runs = []
    for _ in range(2):
        assert main(["box-flatness", "--n", "7", "-o", str(target)]) == EXIT_OK
        runs.append(target.read_bytes())
    assert runs[0] == runs[1]
    assert b"dimensionless" in runs[0]
    assert main(["box-flatness", "--n", "7"]) == EXIT_OK
    first = capsys.readouterr().out
    assert main(["box-flatness", "--n", "7"]) == EXIT_OK
    assert capsys.readouterr().out == first


@pytest.mark.parametrize(
    "argv",
    [
        ["box-density", "--tau", "5", "--grid", "5"],
        ["box-flatness", "--n", "4"],
        ["box-kl-scan", "--n-list", "5,10"],
        ["osc-match", "--tau", "2"],
        ["linpot-ratio", "--tau", "2", "--range", "6,8", "--grid", "5"],
        ["linpot-emergence", "--tau", "2", "--n-max", "30"],
        ["ytransform", "--system", "box", "--tau", "3", "--grid", "101"],
        ["semiclassical", "--system", "oscillator", "--tau", "2", "--grid", "11"],
    ],
)
def test_json_matches_schema(argv, capsys):
    code, out, _ = run(argv + ["--format", "json"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    jsonschema.validate(doc, _schema())
    assert doc["config"]["command"] == argv[0]
    assert all(len(r) == len(doc["columns"]) for r in doc["rows"])


def test_extended_numbers_are_strings(capsys):
    code, out, _ = run(["box-density", "--tau", "60", "--grid", "3", "--precision", "extended", "--format", "json"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    jsonschema.validate(doc, _schema())
    assert doc["config"]["precision"] == "extended"
    mid = doc["rows"][1][1]
    assert isinstance(mid, str) and len(mid.replace(".", "")) >= 40


def test_env_var_overrides_precision(monkeypatch, capsys):
    monkeypatch.setenv("THERMOFLAT_PRECISION", "extended")
    code, out, _ = run(["box-density", "--tau", "2", "--grid", "2", "--format", "json"], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["config"]["precision"] == "extended"
    code, out, _ = run(["osc-match", "--tau", "2", "--format", "json"], capsys)
    cfg = json.loads(out)["config"]
    assert cfg["precision"] == "native" and cfg["params"]["precision_requested"] == "extended"
    monkeypatch.setenv("THERMOFLAT_PRECISION", "quad")
    code, _, err = run(["box-density", "--tau", "2"], capsys)
    assert code == EXIT_USAGE and "error" in err


def test_domain_error_exit(capsys):
    code, _, err = run(["osc-match", "--tau", "0.4"], capsys)
    assert code == EXIT_DOMAIN
    assert "ground state" in err
    code, _, _ = run(["box-density", "--tau", "-1"], capsys)
    assert code == EXIT_DOMAIN


def test_unbounded_sigma_exit(capsys):
    code, _, err = run(["ytransform", "--system", "oscillator", "--tau", "0.3", "--grid", "101"], capsys)
    assert code == EXIT_DOMAIN
    assert "unbounded" in err


def test_usage_errors(capsys):
    assert run([], capsys)[0] == EXIT_USAGE
    assert run(["box-density"], capsys)[0] == EXIT_USAGE
    assert run(["box-density", "--tau", "abc"], capsys)[0] == EXIT_USAGE
    assert run(["ytransform", "--system", "rotor", "--tau", "2"], capsys)[0] in (EXIT_USAGE, EXIT_DOMAIN)


def test_numeric_exit_code_is_distinct():
    assert len({EXIT_OK, EXIT_DOMAIN, EXIT_NUMERIC, EXIT_USAGE}) == 4


def test_box_kl_scan_checks(capsys):
    code, out, _ = run(["box-kl-scan", "--format", "json"], capsys)
    doc = json.loads(out)
    assert doc["checks"]["kl_strictly_decreasing"] is True
    assert [r[0] for r in doc["rows"]] == [5, 10, 20, 40, 80]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "thermoflat", "box-flatness", "--n", "2"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert "exact weight n=1: 4/5" in proc.stdout
