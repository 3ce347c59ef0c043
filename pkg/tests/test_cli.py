import csv
import io
import json
import math
import subprocess
import sys

import pytest

from qsourcecode import cli, universal_code
from qsourcecode.cli import EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, UsageError, main, parse_grid, parse_spectrum


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_helpers():
    assert parse_spectrum("uniform:3").d == 3
    assert parse_spectrum("0.75, 0.25").values[0] == 0.75
    assert parse_grid("1:5", integer=True) == [1, 2, 3, 4, 5]
    assert parse_grid("0:0.3:0.1") == [0.0, 0.1, 0.2, 0.3]
    assert parse_grid("0.1,0.4") == [0.1, 0.4]
    for bad in ("1:2:0", "5:1", "1:2:3:4"):
        with pytest.raises(UsageError):
            parse_grid(bad)
    with pytest.raises(UsageError):
        parse_spectrum("a,b")


def test_exponent_json(capsys):
    code, out, _ = run(capsys, "exponent", "--spectrum", "0.75,0.25", "--rate", "0.673012")
    assert code == EXIT_OK
    rec = json.loads(out)[0]
    vals = [v["value"] for v in rec["error_exponent"].values()]
    assert len(vals) == 3 and max(vals) - min(vals) <= 1e-9
    assert vals[0] == pytest.approx(0.0541159, abs=1e-6)


def test_sweep_uniform(capsys):
    code, out, _ = run(capsys, "sweep", "--spectrum", "uniform:4", "--rates", "0:1.38:0.01", "--workers", "1")
    assert code == EXIT_OK
    rows = rows_of(out)
    assert len(rows) == 139
    assert all(float(r["error_exponent"]) == 0.0 for r in rows)
    for r in rows:
        assert float(r["fidelity_exponent"]) == pytest.approx(math.log(4) - float(r["R"]), abs=1e-12)


def test_sweep_all_forms_and_bits(capsys):
    _, nats, _ = run(capsys, "sweep", "--spectrum", "0.6,0.3,0.1", "--rates", "0.2,0.9", "--all-forms")
    _, bits, _ = run(capsys, "sweep", "--spectrum", "0.6,0.3,0.1", "--rates", "0.2,0.9", "--all-forms",
                     "--bits")
    n_rows, b_rows = rows_of(nats), rows_of(bits)
    assert "fidelity_divergence_form" in n_rows[0]
    assert float(b_rows[0]["R"]) == pytest.approx(0.2)
    r_nats = float(n_rows[0]["R"])
    b_nats = rows_of(run(capsys, "sweep", "--spectrum", "0.6,0.3,0.1", "--rates",
                         repr(r_nats / math.log(2)), "--bits")[1])[0]
    assert float(b_nats["fidelity_exponent"]) == pytest.approx(
        float(n_rows[0]["fidelity_exponent"]) / math.log(2), rel=1e-9)


def test_verify_bounds_example(capsys):
    code, out, _ = run(capsys, "verify-bounds", "--spectrum", "0.75,0.25", "--n", "1:40", "--rate", "0.9")
    assert code == EXIT_OK
    rows = rows_of(out)
    assert {r["bound"] for r in rows} >= {"a4-1", "a4", "h20", "h21", "f-e31", "e31", "f-e32", "e32",
                                          "a5", "10-1", "12-7", "12-8", "12-9", "L10", "L20", "L21"}
    assert all(r["violations"] == "0" for r in rows)
    assert {int(r["n"]) for r in rows} == set(range(1, 41))


def test_code_eval(capsys):
    code, out, _ = run(capsys, "code-eval", "--spectrum", "0.75,0.25", "--rate", "0.3", "--n", "2",
                       "--raw-rate", "--format", "json")
    assert code == EXIT_OK
    rec = json.loads(out)[0]
    assert rec["visible_error"] == pytest.approx(0.1875)
    assert rec["violations"] == ""


def test_degenerate_rows_are_not_failures(capsys):
    code, out, _ = run(capsys, "code-eval", "--spectrum", "0.75,0.25", "--rate", "0.6", "--n", "5")
    assert code == EXIT_OK
    assert rows_of(out)[0]["degenerate"] == "true"


def test_violation_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(universal_code.CodeEvaluation, "violations", lambda self: ["12-7"])
    code, _, _ = run(capsys, "code-eval", "--spectrum", "0.75,0.25", "--rate", "0.3", "--n", "4",
                     "--workers", "1")
    assert code == EXIT_VIOLATION


@pytest.mark.parametrize("argv", [
    ["exponent", "--spectrum", "0.7,0.2", "--rate", "0.3"],
    ["exponent", "--spectrum", "0.75,0.25", "--rate", "0.8"],
    ["exponent", "--spectrum", "0.75,0.25"],
    ["sweep", "--spectrum", "0.5,0.5", "--source", "x.json", "--rates", "0.1"],
    ["code-eval", "--spectrum", "0.75,0.25", "--rate", "0.3", "--n", "0"],
    ["nonsense"],
    ["tails", "--source", "/nonexistent.json", "--n", "3", "--S", "1"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_USAGE
    assert err


def test_oracle_check_with_source(tmp_path, capsys):
    src = tmp_path / "src.json"
    r = 1 / math.sqrt(2)
    src.write_text(json.dumps({"states": [[1, 0], [r, [0, r]]], "probs": [0.6, 0.4]}))
    code, out, _ = run(capsys, "oracle-check", "--source", str(src), "--n", "1:4", "--rate", "0.4",
                       "--raw-rate")
    assert code == EXIT_OK
    rows = rows_of(out)
    assert any(r["kind"] == "errors" for r in rows)
    assert all(r["ok"] == "true" for r in rows if r["ok"])


def test_oracle_check_budget(capsys):
    code, _, _ = run(capsys, "oracle-check", "--spectrum", "0.5,0.3,0.2", "--n", "9")
    assert code == EXIT_USAGE


def test_tails(capsys):
    code, out, _ = run(capsys, "tails", "--spectrum", "0.75,0.25", "--n", "50,100", "--S", "0.7")
    assert code == EXIT_OK
    rows = rows_of(out)
    assert len(rows) == 2 and float(rows[1]["residual"]) < float(rows[0]["residual"])


def test_deterministic_output(tmp_path):
    paths = []
    for i in range(2):
        p = tmp_path / f"out{i}.csv"
        assert main(["oracle-check", "--spectrum", "0.6,0.4", "--n", "1:3", "--seed", "5",
                     "--output", str(p)]) == EXIT_OK
        paths.append(p.read_bytes())
    assert paths[0] == paths[1]


def test_full_precision_cells(capsys):
    _, out, _ = run(capsys, "sweep", "--spectrum", "0.75,0.25", "--rates", "0.1")
    row = rows_of(out)[0]
    val = float(row["fidelity_exponent"])
    assert format(val, ".17g") == row["fidelity_exponent"]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qsourcecode", "exponent", "--spectrum", "0.75,0.25",
                          "--rate", "0.0"], capture_output=True, text=True)
    assert res.returncode == 0
    fid = json.loads(res.stdout)[0]["fidelity_exponent"]["tilted_closed_form"]["value"]
    assert fid == pytest.approx(-math.log(0.75))
