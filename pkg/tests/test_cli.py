import csv
import io
import json
import subprocess
import sys

import pytest

from operadic_ho.cli import (
    OUT_ENV,
    QUASICCR_HEADER,
    SEMICLASSICAL_HEADER,
    ConfigError,
    fmt,
    load_config,
    main,
)


def blocks(text):
    return [list(csv.reader(io.StringIO(b))) for b in text.strip("\n").split("\n\n")]


def test_fmt():
    assert fmt(None) == ""
    assert fmt(3) == "3"
    assert fmt(-0.0) == "0"
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(True) in ("True", "true", "1")


def test_config_overrides_win(tmp_path):
    cfg_file = tmp_path / "c.json"
    cfg_file.write_text(json.dumps({"omega": 2.0, "E": 3.0, "family": "VI_a", "a": 0.5}))
    cfg = load_config(str(cfg_file), {"E": 4.0, "a": None})
    assert (cfg.omega, cfg.E, cfg.family, cfg.a) == (2.0, 4.0, "VI_a", 0.5)
    assert cfg.params.p0 == pytest.approx(8**0.5)


@pytest.mark.parametrize("bad", [
    {"E": -1.0}, {"omega": 0.0}, {"family": "VI_a", "a": 1.0}, {"hbar_list": [0.1, 0.2, 0.05]},
    {"hbar_list": [0.2, 0.1]}, {"bogus": 1}, {"a": -2.0}, {"family": "III_1", "a": 3.0},
])
def test_config_errors(tmp_path, bad):
    f = tmp_path / "c.json"
    f.write_text(json.dumps(bad))
    with pytest.raises(ConfigError):
        load_config(str(f), {})


def test_config_unreadable(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"), {})


def test_exit_code_2_on_bad_config(tmp_path):
    assert main(["tables", "--family", "VI_a", "--a", "1", "--out", str(tmp_path)]) == 2
    assert main(["tables", "--energy", "-1", "--out", str(tmp_path)]) == 2
    assert main(["nonsense"]) == 2


def test_tables_constants_line_and_rerun(tmp_path, capsys):
    assert main(["tables", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "tables_report.csv").read_text()
    assert "\r" not in text
    b = blocks(text)
    assert b[0][0] == ["family", "a", "omega", "p0"]
    assert b[0][1] == ["VII_a", "1", "1", "2"]
    assert b[1][0] == [f"C{k}" for k in range(1, 10)]
    assert ",".join(b[1][1]) == "0,-0.25,0,-0.5,0,0.5,-0.5,0,1"
    assert all(row[3] in ("True", "true", "1") for row in b[2][1:])
    table = b[4]
    assert table[0] == ["s", "i", "j", "table1", "t0"]
    assert all(row[3] == row[4] for row in table[1:])
    assert len(b[3]) == 65
    assert "PASS" in capsys.readouterr().out
    first = text
    assert main(["tables", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "tables_report.csv").read_text() == first


@pytest.mark.parametrize("fam,a", [("III_1", "1"), ("VI_a", "2")])
def test_tables_other_families(tmp_path, fam, a):
    assert main(["tables", "--family", fam, "--a", a, "--out", str(tmp_path)]) == 0


def test_verify_lax_and_negative_control(tmp_path, capsys):
    assert main(["verify-lax", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "lax_report.json").read_text())
    assert all(c["passed"] for c in rep["checks"])
    assert len(rep["richardson"]) == 6
    assert all(3.6 <= r["ratio"] <= 4.4 for r in rep["richardson"])
    first = (tmp_path / "lax_report.json").read_bytes()
    assert main(["verify-lax", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "lax_report.json").read_bytes() == first
    capsys.readouterr()
    assert main(["verify-lax", "--corrupt-m", "--out", str(tmp_path / "bad")]) == 1
    err = capsys.readouterr()
    assert "FAIL matrix_lax_residual" in err.out
    assert "matrix_lax_residual" in err.err


def test_env_var_sets_output(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path))
    assert main(["tables"]) == 0
    assert (tmp_path / "tables_report.csv").exists()


def test_semiclassical_outputs(tmp_path):
    args = ["semiclassical", "--hbar", "0.2", "0.1", "0.05", "--out", str(tmp_path)]
    assert main(args) == 0
    q = list(csv.reader(open(tmp_path / "quasiccr.csv")))
    s = list(csv.reader(open(tmp_path / "semiclassical.csv")))
    assert tuple(q[0]) == QUASICCR_HEADER
    assert tuple(s[0]) == SEMICLASSICAL_HEADER
    assert len(q) == len(s) == 4
    assert s[1][-1] == ""
    assert 0.9 < float(s[-1][-1]) < 1.1
    before = [(tmp_path / n).read_bytes() for n in ("quasiccr.csv", "semiclassical.csv")]
    assert main(args) == 0
    assert before == [(tmp_path / n).read_bytes() for n in ("quasiccr.csv", "semiclassical.csv")]


def test_semiclassical_truncation_failure(tmp_path, capsys):
    assert main(["semiclassical", "--N", "20", "--out", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert "truncation" in err and "hbar=0.2" in err


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "operadic_ho", "tables", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert (tmp_path / "tables_report.csv").exists()
