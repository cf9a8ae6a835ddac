import csv
import json
from fractions import Fraction
from pathlib import Path

import pytest

from ergopt import cli, fileformat
from ergopt.errors import ParseError, ValidationError

from conftest import SYSTEMS

E3_TEXT = (SYSTEMS / "e3.json").read_text(encoding="utf-8")


def write(tmp_path, text, name="sys.json"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_parse_e3():
    spec = fileformat.parse_system_file(SYSTEMS / "e3.json")
    assert len(spec.potential.values) == 4
    assert spec.potential.values[(1, 0)] == -2
    assert spec.options == fileformat.Options()


def test_missing_values_listed_together(tmp_path):
    text = E3_TEXT.replace('"10": -2, ', "").replace('"01": -1, ', "")
    with pytest.raises(ValidationError) as info:
        fileformat.parse_system_file(write(tmp_path, text))
    assert info.value.missing == ["01", "10"]
    assert "10" in str(info.value)


def test_unicode_minus_rational(tmp_path):
    text = E3_TEXT.replace('"01": -1', '"01": "−3/2"').replace('"10": -2', '"10": "-0.25"')
    spec = fileformat.parse_system_file(write(tmp_path, text))
    assert spec.potential.values[(0, 1)] == Fraction(-3, 2)
    assert spec.potential.values[(1, 0)] == Fraction(-1, 4)


def test_json_decimals_are_exact(tmp_path):
    spec = fileformat.parse_system_file(write(tmp_path, E3_TEXT.replace('"01": -1', '"01": -0.1')))
    assert spec.potential.values[(0, 1)] == Fraction(-1, 10)


def test_parse_error_has_line(tmp_path):
    with pytest.raises(ParseError) as info:
        fileformat.parse_system_file(write(tmp_path, E3_TEXT.replace('"01": -1', '"01": "abc"')))
    assert info.value.line == 6
    with pytest.raises(ParseError) as info:
        fileformat.parse_system_file(write(tmp_path, '{"alphabet": 2,\n "transitions": [[1,1],[1,1]],,}'))
    assert info.value.line == 2


@pytest.mark.parametrize("mutation,error", [
    (lambda t: t.replace('"range": 2', '"range": 3'), ParseError),
    (lambda t: t.replace("[[1, 1], [1, 1]]", "[[1, 0], [0, 1]]"), ValidationError),
    (lambda t: t.replace("[[1, 1], [1, 1]]", "[[1, 2], [1, 1]]"), ParseError),
    (lambda t: t.replace('"alphabet": 2', '"alphabet": true'), ParseError),
    (lambda t: t.replace("}\n}", '},\n  "options": {"bogus": 1}\n}'), ParseError),
])
def test_malformed(tmp_path, mutation, error):
    with pytest.raises(error):
        fileformat.parse_system_file(write(tmp_path, mutation(E3_TEXT)))


def test_range_one_needs_full_shift(tmp_path):
    text = json.dumps({"alphabet": 2, "transitions": [[1, 1], [1, 0]],
                       "potential": {"range": 1, "values": {"0": 0, "1": -1}}})
    with pytest.raises(ValidationError):
        fileformat.parse_system_file(write(tmp_path, text))


@pytest.mark.parametrize("path", sorted(p for p in SYSTEMS.glob("*.json") if not p.name.endswith(".analysis.json")),
                         ids=lambda p: p.name)
def test_round_trip(tmp_path, path):
    spec = fileformat.parse_system_file(path)
    again = fileformat.parse_system_file(write(tmp_path, fileformat.serialize(spec)))
    assert again == spec
    assert fileformat.serialize(again) == fileformat.serialize(spec)


def test_analyze_command(tmp_path, capsys):
    out_json = tmp_path / "e3.analysis.json"
    assert cli.main(["analyze", str(SYSTEMS / "e3.json"), "--json", str(out_json)]) == 0
    text = capsys.readouterr().out
    assert "lambda = -3/2" in text and "Omega_1 -> Omega_2" in text
    assert "P_A(beta) = P(beta) + beta*m" in text
    data = json.loads(out_json.read_text())
    assert data["lambda"] == "-3/2" and data["s_ext"] == [[-3, -1], [-2, -3]]


def test_analyze_writes_alongside(tmp_path, capsys):
    src = write(tmp_path, (SYSTEMS / "e2.json").read_text(), "e2.json")
    assert cli.main(["analyze", str(src)]) == 0
    data = json.loads((tmp_path / "e2.analysis.json").read_text())
    assert data["lambda"] == -1
    assert "lambda = -1" in capsys.readouterr().out


def test_analyze_whole_shift(tmp_path, capsys):
    text = json.dumps({"alphabet": 2, "transitions": [[1, 1], [1, 1]],
                       "potential": {"range": 1, "values": {"0": "1/2", "1": "1/2"}}})
    assert cli.main(["analyze", str(write(tmp_path, text))]) == 0
    assert "Omega = X, single component, S_ext undefined (no exterior)" in capsys.readouterr().out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_pressure_csv(tmp_path, capsys):
    out = tmp_path / "p.csv"
    args = ["pressure", str(SYSTEMS / "e2.json"), "--beta-min", "10", "--beta-max", "30",
            "--steps", "3", "--out", str(out)]
    assert cli.main(args) == 0
    rows = read_csv(out)
    assert rows[0] == cli.CSV_COLUMNS
    assert [float(r[2]) for r in rows[1:]] == pytest.approx([4.5398899e-5, 2.0611536e-9, 9.3576230e-14], rel=1e-7)
    assert rows[1][4] == "" and rows[2][4] != ""
    assert len(rows[1][1].replace(".", "").lstrip("0")) == 25
    first = out.read_bytes()
    assert cli.main(args) == 0
    assert out.read_bytes() == first


def test_pressure_slopes_e3(tmp_path):
    out = tmp_path / "p.csv"
    assert cli.main(["pressure", str(SYSTEMS / "e3.json"), "--beta-min", "20", "--beta-max", "50",
                     "--steps", "7", "--out", str(out)]) == 0
    slopes = [float(r[4]) for r in read_csv(out)[1:] if r[4]]
    assert slopes[-1] == pytest.approx(-1.5, abs=1e-9)


def test_pressure_exact_zero(tmp_path, capsys):
    text = json.dumps({"alphabet": 2, "transitions": [[1, 1], [1, 0]],
                       "potential": {"range": 2, "values": {"00": 1, "01": 1, "10": 1}}})
    out = tmp_path / "p.csv"
    assert cli.main(["pressure", str(write(tmp_path, text)), "--steps", "5", "--out", str(out)]) == 0
    rows = read_csv(out)[1:]
    assert all(float(r[2]) == 0 for r in rows)


def test_pressure_precision_rejected(capsys):
    code = cli.main(["pressure", str(SYSTEMS / "e3.json"), "--beta-max", "300"])
    assert code == 1
    assert "--precision-bits" in capsys.readouterr().err


@pytest.mark.parametrize("name", ["e2", "e3", "e4"])
def test_verify_passes(name, capsys):
    assert cli.main(["verify", str(SYSTEMS / f"{name}.json")]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "caveat" in out
    if name == "e4":
        assert "excluded" in out


def test_verify_fail_exit_code(capsys):
    # an impossible tolerance turns the last slope into a FAIL
    assert cli.main(["verify", str(SYSTEMS / "e3.json"), "--tol", "-1"]) == 2
    assert "FAIL" in capsys.readouterr().out


def test_verify_error_exit_code(tmp_path, capsys):
    assert cli.main(["verify", str(write(tmp_path, "{"))]) == 1
    assert "error" in capsys.readouterr().err


@pytest.mark.parametrize("name", ["e2", "e3", "twisted"])
def test_oracle_command(name, capsys):
    assert cli.main(["oracle", str(SYSTEMS / f"{name}.json")]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_oracle_random_planted(tmp_path, capsys):
    import numpy as np
    from ergopt.oracle import random_planted_instance
    rng = np.random.default_rng(77)
    system, pot = random_planted_instance(rng, twist=True)
    spec = fileformat.SystemSpec(system, pot)
    path = write(tmp_path, fileformat.serialize(spec))
    assert cli.main(["oracle", str(path), "--max-length", "40"]) == 0


def test_module_entry_point():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "ergopt", "analyze", str(SYSTEMS / "e2.json"),
                          "--json", "/dev/null"], capture_output=True, text=True)
    assert res.returncode == 0 and "lambda = -1" in res.stdout
