import json
import subprocess
import sys
from decimal import Decimal

import pytest

from iterlab.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _walk_numbers(obj):
    if isinstance(obj, dict):
        for v in obj.values():
            yield from _walk_numbers(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from _walk_numbers(v)
    else:
        yield obj


def test_cf_golden(capsys):
    code, out, _ = run(capsys, "cf", "--m", "1")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["L_u"].startswith("0.3262379212492639374321078")
    assert doc["closed_u"] == {"p": "-11", "q": "7"}
    assert doc["closed_v"] == {"p": "-4", "q": "3"}
    assert doc["iterations"] <= 100
    # numbers travel as decimal strings only (ints for counters)
    for v in _walk_numbers(doc):
        assert not isinstance(v, float)


def test_cf_no_recognize(capsys):
    code, out, _ = run(capsys, "cf", "--m", "2", "--no-recognize")
    assert code == EXIT_OK
    assert json.loads(out)["closed_u"] is None


@pytest.mark.parametrize(
    "argv",
    [
        ("cf", "--m", "0"),
        ("cf",),
        ("abel", "--a", "3"),
        ("abel", "--a", "9/5", "--digits", "20"),
        ("abel", "--a", "3/2", "--sample", "0.1:1.4"),
        ("abel", "--a", "3/2", "--sample", "0.1:1.6:5"),
        ("translated", "--N", "0"),
        ("translated", "--derivatives", "fd,magic"),
        ("series", "--order", "0"),
        ("cf", "--m", "1", "--tol", "-1e-10"),
        ("bogus",),
    ],
)
def test_usage_errors(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == EXIT_USAGE
    assert out == ""


def test_precision_error_exit(capsys):
    code, _, err = run(capsys, "cf", "--m", "1", "--digits", "30", "--tol", "1e-60")
    assert code == EXIT_NUMERIC
    assert "precision" in err


def test_translated_fd_guard(capsys):
    code, _, err = run(capsys, "translated", "--N", "1000", "--digits", "60", "--derivatives", "fd")
    assert code == EXIT_NUMERIC


def test_abel_chain_json(capsys):
    code, out, _ = run(capsys, "abel", "--a", "9/5", "--chain", "1")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["chain"]["xi"][1].startswith("1.286564033401")
    assert doc["chain"]["F_xi"][0].startswith("1.44667971668")
    assert doc["series"]["normalization"] == "normal_form"


def test_abel_asymptote_null(capsys):
    code, out, _ = run(capsys, "abel", "--a", "2", "--chain", "1")
    assert json.loads(out)["chain"]["F_eta"] is None


def test_abel_csv(capsys):
    code, out, _ = run(capsys, "abel", "--a", "2", "--digits", "30", "--order", "12", "--sample", "0.5:1.5:5")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "x,f_a,F_a"
    assert len(lines) == 6
    assert lines[3].endswith(",")


def test_series_latex(capsys):
    code, out, _ = run(capsys, "series", "--order", "3")
    assert code == EXIT_OK
    assert out.startswith(r"x_{n}\sim n+C-\frac{1}{n}")


def test_series_json_round_trip(capsys):
    from iterlab.formal import poly_from_json
    from iterlab.translated import derive_expansion

    code, out, _ = run(capsys, "series", "--order", "5", "--format", "json")
    doc = json.loads(out)
    table = derive_expansion(5)
    for k, p in enumerate(doc["P"], start=1):
        assert poly_from_json(p) == table.poly(k)


def test_translated_small(capsys):
    code, out, _ = run(capsys, "translated", "--N", "1000", "--digits", "60", "--derivatives", "product,forward")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["C"].startswith("2.5987868558248713482599664951883")
    # decimal strings parse losslessly
    assert str(Decimal(doc["C"])) == doc["C"]


def test_out_file_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["cf", "--m", "3", "--out", str(a)]) == EXIT_OK
    assert main(["cf", "--m", "3", "--out", str(b)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert a.read_bytes() == b.read_bytes()


def test_env_override(monkeypatch, capsys):
    monkeypatch.setenv("ITERLAB_DIGITS", "40")
    code, out, _ = run(capsys, "cf", "--m", "1")
    assert code == EXIT_OK
    assert len(json.loads(out)["L_u"]) < 50


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "iterlab", "cf", "--m", "0"], capture_output=True, text=True)
    assert proc.returncode == EXIT_USAGE
    proc = subprocess.run([sys.executable, "-m", "iterlab", "series", "--order", "2"], capture_output=True, text=True)
    assert proc.returncode == EXIT_OK and proc.stdout.startswith("x_{n}")
