"""
End-to-end runs of the command line front end, through ``run(argv)``.
"""
import csv
import io
import json

import pytest

from cvmdips.cli import run
from cvmdips.constants import ExitCode


def _table(text: str) -> list[dict]:
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_rate(capsys):
    assert run(["rate", "--L", "5"]) == ExitCode.OK
    out = capsys.readouterr().out
    assert "# V = 15.0 (default)" in out
    assert "# L = 5.0 (flag)" in out
    (row,) = _table(out)
    assert float(row["K"]) > 0.0
    assert float(row["L_AC"]) == 5.0 and float(row["L_BC"]) == 0.0


def test_rate_json(capsys):
    assert run(["rate", "--L", "5", "--mode", "symmetric", "--format", "json"]) == ExitCode.OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["columns"][:3] == ["V", "k", "T_PS"]
    assert doc["rows"][0]["L_AC"] == 2.5


def _reject_constant(name):
    raise ValueError(f"non-standard JSON constant {name}")


def test_json_is_strict_at_zero_distance(capsys):
    assert run(["rate", "--L", "0", "--format", "json"]) == ExitCode.OK
    doc = json.loads(capsys.readouterr().out, parse_constant=_reject_constant)
    assert doc["rows"][0]["PLOB"] == "inf"


def test_subtraction_flags(capsys):
    assert run(["rate", "--k", "1", "--L", "1"]) == ExitCode.OK
    (row,) = _table(capsys.readouterr().out)
    assert float(row["P"]) == pytest.approx(0.25)


def test_usage_errors(capsys):
    assert run(["bogus"]) == ExitCode.USAGE
    assert run(["rate", "--V"]) == ExitCode.USAGE
    assert run(["sweep", "--axis", "V"]) == ExitCode.USAGE


@pytest.mark.parametrize("argv", [["figure", "fig3", "--V", "30"], ["figure", "fig3", "--config", "run.json"],
                                  ["validate", "--eta", "0.9"]])
def test_fixed_grids_take_no_parameters(capsys, argv):
    assert run(argv) == ExitCode.USAGE
    assert "unrecognized arguments" in capsys.readouterr().err


def test_unknown_log_level(capsys):
    assert run(["rate", "--log-level", "chatty"]) == ExitCode.USAGE
    assert "Unknown log level 'chatty'" in capsys.readouterr().err


def test_config_file(tmp_path, capsys):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"V": 20, "L": 3}))
    assert run(["rate", "--config", str(path), "--L", "4"]) == ExitCode.OK
    out = capsys.readouterr().out
    assert "# V = 20.0 (file)" in out
    assert "# L = 4.0 (flag)" in out


def test_unknown_config_key(tmp_path, capsys):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"variance": 20}))
    assert run(["rate", "--config", str(path)]) == ExitCode.USAGE
    assert "'variance' not in RunConfig spec" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert run(["rate", "--config", str(tmp_path / "absent.json")]) == ExitCode.USAGE


@pytest.mark.parametrize("values", [{"V": "fifteen"}, {"k": None}, {"eta": [0.9]}])
def test_malformed_config_values(tmp_path, capsys, values):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(values))
    assert run(["rate", "--config", str(path)]) == ExitCode.DOMAIN
    assert "must be a number" in capsys.readouterr().err


def test_domain_errors(capsys):
    assert run(["rate", "--k", "1", "--T_PS", "1"]) == ExitCode.DOMAIN
    assert run(["rate", "--k", "1", "--V", "3"]) == ExitCode.DOMAIN
    assert run(["rate", "--eta", "1.5"]) == ExitCode.DOMAIN


def test_no_key(capsys):
    assert run(["optimize", "eta-threshold", "--L", "200"]) == ExitCode.NO_RESULT


def test_missing_crossover_writes_an_empty_cell(capsys):
    assert run(["optimize", "crossover", "--k-a", "0", "--k-b", "0"]) == ExitCode.NO_RESULT
    (row,) = _table(capsys.readouterr().out)
    assert row["L_cross_km"] == ""


def test_max_distance(capsys):
    assert run(["optimize", "max-distance"]) == ExitCode.OK
    (row,) = _table(capsys.readouterr().out)
    assert row["layout"] == "extreme-asym"
    assert float(row["L_max_km"]) > 1.0


def test_sweep(capsys):
    argv = ["sweep", "--axis", "L_AC", "--range", "0", "10", "3", "--axis2", "k", "--values2", "0", "1",
            "--k", "1", "--outputs", "P", "K"]
    assert run(argv) == ExitCode.OK
    rows = _table(capsys.readouterr().out)
    assert [(r["L_AC"], r["k"]) for r in rows] == [("0", "0"), ("0", "1"), ("5", "0"), ("5", "1"),
                                                   ("10", "0"), ("10", "1")]
    assert float(rows[1]["P"]) == pytest.approx(0.25)


def test_output_is_reproducible(tmp_path, capsys):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["figure", "fig3", "--out", str(first)]) == ExitCode.OK
    assert run(["figure", "fig3", "--out", str(second)]) == ExitCode.OK
    assert first.read_bytes() == second.read_bytes()
    assert capsys.readouterr().out == ""


@pytest.mark.slow
def test_validate(capsys):
    assert run(["validate"]) == ExitCode.OK
    rows = _table(capsys.readouterr().out)
    assert len(rows) == 36
    assert all(r["pass"] == "true" for r in rows)
