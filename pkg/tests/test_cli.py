import json
import subprocess
import sys

import pytest

from cglab.harness.cli import load_battery, main
from cglab.harness.report import CSV_HEADER, read_csv
from cglab.setops import make_set, rational_set, write_set_file
from cglab.fields import laurent, parse_element


def test_verify_single_family(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code = main(["verify", "thm1", "--family", "interval", "--sizes", "8..32", "--fn", "log", "--out", str(out)])
    assert code == 0
    rows = read_csv(out)
    assert [r["N"] for r in rows] == ["8", "16", "32"]
    assert all(r["assert"] == "pass" for r in rows)
    assert "thm1" in capsys.readouterr().err


def test_verify_stdout_and_json(capsys):
    assert main(["verify", "thmFF", "--family", "laurent_constants", "--q", "3", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["reports"][0]["rows"][0]["ratio"] == "1"


def test_verify_failure_exit_code(capsys):
    assert main(["verify", "thm1", "--family", "interval", "--sizes", "64", "--cap", "10"]) == 1
    assert "capped" in capsys.readouterr().out


def test_verify_with_config_and_plot(tmp_path):
    cfg = tmp_path / "b.cfg"
    cfg.write_text(
        "[a]\ntheorem = thm2\nfamily = interval\nsizes = 4..16\nk = 1\n\n"
        "[b]\ntheorem = prop41\nfamily = interval\nsizes = 4..8,2\nscale = 3\nk = 2\n"
    )
    out = tmp_path / "r.csv"
    assert main(["verify", "all", "--config", str(cfg), "--out", str(out), "--plot"]) == 0
    assert (tmp_path / "r.png").stat().st_size > 1000
    rows = read_csv(out)
    assert {r["theorem"] for r in rows} == {"thm2", "prop41"}
    assert main(["verify", "prop41", "--config", str(cfg), "--out", str(out), "--plot", str(tmp_path / "x.png")]) == 0
    assert (tmp_path / "x.png").exists()
    assert {r["theorem"] for r in read_csv(out)} == {"prop41"}


def test_verify_certificates(tmp_path):
    cert = tmp_path / "c.jsonl"
    args = ["verify", "thm3", "--family", "interval", "--sizes", "8", "--k", "1", "--certificates", str(cert)]
    assert main(args) == 0
    recs = [json.loads(x) for x in cert.read_text().splitlines()]
    assert recs and all("certificate" in r for r in recs)


def test_bad_inputs(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[a]\ntheorem = thm1\nfamily = interval\ncolour = blue\n")
    assert main(["verify", "all", "--config", str(cfg)]) == 2
    assert "unknown key" in capsys.readouterr().err
    assert main(["verify", "all", "--config", str(tmp_path / "missing.cfg")]) == 2
    with pytest.raises(SystemExit):
        main(["verify", "thm9"])
    with pytest.raises(SystemExit):
        main(["verify", "thm1", "--family", "nope"])


def test_default_battery_loads():
    sections = load_battery()
    names = [n for n, _ in sections]
    assert len(names) == len(set(names)) >= 20
    assert {s["theorem"] for _, s in sections} >= {"thm1", "thm2", "thm3", "thm4", "prop41", "thmC", "thmFF"}


def test_construct(tmp_path, capsys):
    cert = tmp_path / "c.jsonl"
    assert main(["construct", "prop41", "--sizes", "4,6", "--scale", "3", "--k", "2", "--certificates", str(cert)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "family,N,k,count,expected,replayed"
    assert lines[1:] == ["interval,4,2,1,1,true", "interval,6,2,10,10,true"]
    assert len(cert.read_text().splitlines()) == 11
    base = tmp_path / "base.txt"
    write_set_file(rational_set([0, 10, 20, 30]), base)
    assert main(["construct", "prop41", "--base", str(base)]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "file,4,1,3,3,true"


def test_chains(tmp_path, capsys):
    F = laurent(2)
    src = tmp_path / "a.txt"
    write_set_file(make_set(F, [parse_element(t, F) for t in ("0", "1", "t", "t^3")]), src)
    out = tmp_path / "forest.json"
    assert main(["chains", "--in", str(src), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert max(doc["depths"].values()) == 3
    assert "max depth 3" in capsys.readouterr().err
    assert main(["chains", "--in", str(src)]) == 0
    assert json.loads(capsys.readouterr().out)["depths"]["t^3"] == 3


def test_exponent(tmp_path, capsys):
    out = tmp_path / "r.csv"
    main(["verify", "thm2", "--family", "interval", "--sizes", "8..64", "--k", "1", "--out", str(out)])
    capsys.readouterr()
    assert main(["exponent", "--in", str(out)]) == 0
    header, line = capsys.readouterr().out.splitlines()
    assert header == "theorem,family,slope,intercept,residual,points"
    assert line.startswith("thm2,interval,") and float(line.split(",")[2]) > 1.8
    short = tmp_path / "s.csv"
    short.write_text(",".join(CSV_HEADER) + "\nthm1,interval,4,10,1,10,pass,1,\n")
    assert main(["exponent", "--in", str(short)]) == 1


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "cglab", "verify", "thmFF", "--family", "laurent_constants", "--q", "2"],
        capture_output=True, text=True, check=True,
    )
    assert res.stdout.splitlines()[0] == ",".join(CSV_HEADER)
