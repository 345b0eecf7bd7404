import csv
import io
import json

import numpy as np
import pytest

from hatnet.cli import main
from hatnet.functions import get_function


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_build_nd(tmp_path, capsys):
    out = tmp_path / "b.json"
    code, text, _ = run(capsys, "build", "--fn", "bump2", "--n", "2", "--k", "1", "--m", "6",
                        "--out", str(out))
    assert code == 0
    assert json.loads(out.read_text())["widths"] == [2, 18, 6] + [108] * 11 + [9, 1]
    assert "nnz=" in text


def test_build_1d_and_half(tmp_path, capsys):
    out = tmp_path / "p.json"
    assert run(capsys, "build", "--fn", "parabola1", "--n", "1", "--k", "4",
               "--out", str(out))[0] == 0
    assert json.loads(out.read_text())["widths"] == [1, 27, 9, 1]
    out = tmp_path / "h.json"
    assert run(capsys, "build", "--fn", "bump2", "--n", "2", "--k", "1", "--m", "6", "--half",
               "--out", str(out))[0] == 0
    assert json.loads(out.read_text())["widths"][-2] == 4


@pytest.mark.parametrize("argv", [
    ["build", "--fn", "nosuch2", "--k", "1", "--m", "2"],
    ["build", "--fn", "bump2", "--n", "3", "--k", "1", "--m", "2"],
    ["build", "--fn", "bump2", "--k", "0", "--m", "2"],
    ["build", "--fn", "bump2", "--k", "1"],
    ["build", "--fn", "cosine1", "--k", "1", "--half"],
    ["frobnicate"],
])
def test_build_usage_errors(tmp_path, capsys, argv):
    assert run(capsys, *argv, *(["--out", str(tmp_path / "x.json")] if argv[0] == "build" else []))[0] == 2


def test_eval_interpolatory_and_roundtrip(tmp_path, capsys):
    model = tmp_path / "p.json"
    run(capsys, "build", "--fn", "sine1", "--k", "4", "--out", str(model))
    code, text, _ = run(capsys, "eval", str(model), "--point", "0.25")
    assert code == 0
    assert float(text) == pytest.approx(get_function("sine1")([0.25]), abs=1e-12)
    code, text2, _ = run(capsys, "eval", str(model), "--point", "3.5")
    assert code == 0 and float(text2) == 0.0
    copy = tmp_path / "copy.json"
    assert run(capsys, "export", str(model), "--format", "json", "--out", str(copy))[0] == 0
    _, text3, _ = run(capsys, "eval", str(copy), "--point", "0.3")
    _, text4, _ = run(capsys, "eval", str(model), "--point", "0.3")
    assert text3 == text4


def test_eval_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "eval", str(bad), "--point", "0")[0] == 3
    model = tmp_path / "m.json"
    run(capsys, "build", "--fn", "sine1", "--k", "2", "--out", str(model))
    assert run(capsys, "eval", str(model), "--point", "0,1")[0] == 2
    assert run(capsys, "eval", str(model), "--point", "abc")[0] == 2


def test_export_dense_csv_and_io_error(tmp_path, capsys):
    model = tmp_path / "m.json"
    run(capsys, "build", "--fn", "parabola1", "--k", "1", "--out", str(model))
    assert run(capsys, "export", str(model), "--format", "dense-csv",
               "--out", str(tmp_path / "dense"))[0] == 0
    assert len(list(tmp_path.glob("dense_layer*.csv"))) == 3
    assert run(capsys, "export", str(model), "--out", str(tmp_path / "no" / "x.json"))[0] == 4


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_verify_lemma4(capsys):
    code, text, _ = run(capsys, "verify", "--suite", "lemma4", "--n", "3", "--k", "8",
                        "--samples", "10000")
    assert code == 0
    rows = _rows(text)
    assert len(rows) == 2 and all(r["passed"] == "true" for r in rows)
    assert float(rows[0]["value"]) <= 1e-12


def test_verify_mult(capsys):
    code, text, _ = run(capsys, "verify", "--suite", "mult", "--r", "2", "--m", "8")
    assert code == 0
    err = [r for r in _rows(text) if r["quantity"].startswith("max|")][0]
    assert float(err["value"]) <= 0.03515625 and float(err["bound"]) == 0.03515625


def test_verify_theorem1(capsys):
    code, text, _ = run(capsys, "verify", "--suite", "theorem1", "--fn", "parabola1", "--k", "8")
    assert code == 0
    row = _rows(text)[0]
    assert float(row["bound"]) == 0.25 and float(row["value"]) <= 0.25


def test_verify_theorem2_reports_tight_bound_as_informational(capsys):
    code, text, _ = run(capsys, "verify", "--suite", "theorem2", "--fn", "sine2", "--k", "1",
                        "--m", "6")
    rows = _rows(text)
    tight = [r for r in rows if r["quantity"] == "sup error vs tight bound"][0]
    assert tight["mandatory"] == "false"
    assert code == (1 if any(r["passed"] == "false" and r["mandatory"] == "true"
                             for r in rows) else 0)
    assert code == 0


def test_verify_csv_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        run(capsys, "verify", "--suite", "lemma4", "--n", "2", "--k", "4", "--samples", "500",
            "--seed", "3", "--out", str(path))
    assert a.read_bytes() == b.read_bytes()


def test_rate_study_1d(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code, _, err = run(capsys, "rate-study", "--fn", "lacunary1", "--k-schedule", "2,4,8,16",
                       "--out", str(out))
    assert code == 0
    rows = _rows(out.read_text())
    assert [int(r["k"]) for r in rows] == [2, 4, 8, 16]
    errs = np.array([float(r["sup_error"]) for r in rows])
    assert np.all(np.diff(errs) < 0)
    assert "fitted slope" in err


def test_rate_study_nd_small(capsys):
    code, text, _ = run(capsys, "rate-study", "--fn", "sine2", "--m-range", "4:8:2")
    assert code == 0
    rows = _rows(text)
    assert [int(r["k"]) for r in rows] == [1, 2, 4]
    assert [int(r["L"]) for r in rows] == [12, 14, 16]
