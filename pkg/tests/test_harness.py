import csv
import io
import json
import math
from fractions import Fraction

import pytest

from cglab.fields import GAUSSIAN, laurent
from cglab.harness.experiments import ExperimentReport, Options, Row, run_experiment
from cglab.harness.families import FamilySpec, gen_family, parse_sizes, rng_for
from cglab.harness.plotting import plot_reports
from cglab.harness.report import CSV_HEADER, SCHEMA_VERSION, emit_report, fit_exponent, fmt_number, read_csv
from cglab.setops import rational_set, write_set_file
from cglab.convexfn import ShiftedPower
from cglab.squeeze import prop41_construct, squeeze_count


# --- families


def test_family_examples():
    (inst,) = gen_family(FamilySpec("interval", (10,)))
    assert inst.A == rational_set(range(1, 11))
    (inst,) = gen_family(FamilySpec("gp", (5,), g=Fraction(2)))
    assert inst.A == rational_set([1, 2, 4, 8, 16])
    (inst,) = gen_family(FamilySpec("laurent_constants", q=3))
    assert inst.A.field == laurent(3) and len(inst.A) == 3
    (inst,) = gen_family(FamilySpec("ap", (4,), start=Fraction(3), step=Fraction(1, 2)))
    assert inst.A == rational_set([3, Fraction(7, 2), 4, Fraction(9, 2)])
    (inst,) = gen_family(FamilySpec("convex_image", (4,), fn="pow(2,0)"))
    assert inst.A == rational_set([1, 4, 9, 16])
    (inst,) = gen_family(FamilySpec("interval", (3,), scale=Fraction(5)))
    assert inst.A == rational_set([5, 10, 15])


def test_gaussian_families():
    (g,) = gen_family(FamilySpec("gaussian_grid", (3,)))
    assert g.A.field == GAUSSIAN and len(g.A) == 9
    (rot,) = gen_family(FamilySpec("gaussian_grid", (3,), rotate=True))
    assert len(rot.A) == 9
    # rotation by (3+4i)/5 preserves all distances
    d = sorted(GAUSSIAN.raw_key(GAUSSIAN.sub(x, y)) for x in g.A.raw for y in g.A.raw)
    dr = sorted(GAUSSIAN.raw_key(GAUSSIAN.sub(x, y)) for x in rot.A.raw for y in rot.A.raw)
    assert d == dr


def test_random_families_are_seeded():
    spec = FamilySpec("random_subset", (8, 16), seed=5, replicates=2)
    a = gen_family(spec)
    b = gen_family(spec)
    assert [i.A for i in a] == [i.A for i in b]
    assert [i.label for i in a] == ["random_subset", "random_subset#1"] * 2
    assert a[0].A != a[1].A
    assert all(len(i.A) == i.param for i in a)
    c = gen_family(spec.with_(seed=6))
    assert [i.A for i in c] != [i.A for i in a]
    for name in ("gaussian_random", "laurent_random"):
        s = FamilySpec(name, (6,), seed=1, M=5, q=3, max_degree=3)
        assert gen_family(s)[0].A == gen_family(s)[0].A
    assert rng_for(1, 2, 3).integers(10**9) == rng_for(1, 2, 3).integers(10**9)


def test_family_errors(tmp_path):
    with pytest.raises(ValueError):
        FamilySpec("nope", (3,))
    with pytest.raises(ValueError):
        gen_family(FamilySpec("interval"))
    with pytest.raises(ValueError):
        gen_family(FamilySpec("random_subset", (20,), M=10))
    with pytest.raises(ValueError):
        gen_family(FamilySpec("from_file"))
    p = tmp_path / "a.txt"
    write_set_file(rational_set([1, 5, 9]), p)
    (inst,) = gen_family(FamilySpec("from_file", path=str(p)))
    assert inst.A == rational_set([1, 5, 9])


def test_parse_sizes():
    assert parse_sizes("8..128") == (8, 16, 32, 64, 128)
    assert parse_sizes("5..20,5") == (5, 10, 15, 20)
    assert parse_sizes("3, 7,9") == (3, 7, 9)
    with pytest.raises(ValueError):
        parse_sizes("0..8")


# --- fits and reports


def ols_slope(pts):
    xs = [math.log(n) for n, _ in pts]
    ys = [math.log(v) for _, v in pts]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)


def test_fit_exponent_examples():
    slope, icpt, res = fit_exponent([(8, 512), (16, 4096), (32, 32768)])
    assert slope == pytest.approx(3.0, abs=1e-12) and res == pytest.approx(0, abs=1e-12)
    pts = [(N, 3 * N - 2) for N in (8, 16, 32, 64, 128)]
    slope, _, _ = fit_exponent(pts)
    assert slope == pytest.approx(ols_slope(pts), abs=1e-12)
    # local slope 3N/(3N-2) > 1, so the fit sits just above 1 (see the ledger)
    assert 1.0 < slope < 1.05
    assert fit_exponent([(N, N) for N in (2, 5, 9)])[0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        fit_exponent([(1, 1), (2, 2)])
    with pytest.raises(ValueError):
        fit_exponent([(1, 1), (2, 0), (3, 3)])


def test_fmt_number():
    assert fmt_number(Fraction(84)) == "84"
    assert fmt_number(Fraction(1, 3)) == "0.333333333333"
    assert fmt_number(None) == ""
    assert fmt_number(2.5) == "2.5"


def test_csv_schema_and_empty_report():
    empty = ExperimentReport("thm1", "interval", [])
    assert emit_report([empty]) == ",".join(CSV_HEADER) + "\n"
    assert emit_report([]) == "theorem,family,N,lhs,rhs,ratio,assert,constant,runtime_ms\n"
    rep = run_experiment("thm1", FamilySpec("interval", (3,)))
    rows = list(csv.reader(io.StringIO(emit_report(rep))))
    assert rows[0] == CSV_HEADER
    assert rows[1] == ["thm1", "interval", "3", "84", "0.25", "336", "pass", "1/32", ""]


def test_json_schema(tmp_path):
    rep = run_experiment("thm1", FamilySpec("interval", (3, 4, 5)), Options(fn="pow(2,0)"), name="t")
    path = tmp_path / "r.json"
    doc = json.loads(emit_report([rep], path, "json"))
    assert doc == json.loads(path.read_text())
    assert doc["schema_version"] == SCHEMA_VERSION
    (r,) = doc["reports"]
    assert r["name"] == "t" and r["prng"].startswith("numpy-")
    assert len(r["rows"]) == 3 and all(row["schema_version"] == SCHEMA_VERSION for row in r["rows"])
    assert r["fit"]["slope"] > 0
    with pytest.raises(ValueError):
        emit_report([rep], None, "xml")


def test_read_csv_round_trip(tmp_path):
    rep = run_experiment("thm1", FamilySpec("interval", (4, 8)))
    p = tmp_path / "r.csv"
    emit_report(rep, p)
    rows = read_csv(p)
    assert [r["N"] for r in rows] == ["4", "8"]
    assert all(r["assert"] == "pass" for r in rows)


# --- experiments


def test_thm1_interval_battery():
    rep = run_experiment("thm1", FamilySpec("interval", parse_sizes("8..128")), Options(fn="pow(2,0)"))
    assert len(rep.rows) == 5 and rep.passed
    assert all(r.status == "pass" for r in rep.rows)


def test_thmFF_constants_ratio_one():
    for q in (2, 3, 5):
        rep = run_experiment("thmFF", FamilySpec("laurent_constants", q=q))
        (row,) = rep.rows
        assert row.ratio == 1 and row.status == "report"


def test_prop41_counts_column():
    rep = run_experiment("prop41", FamilySpec("interval", (5, 10), scale=Fraction(3)), Options(k=2))
    assert [r.lhs for r in rep.rows] == [squeeze_count(2, 5), squeeze_count(2, 10)]
    assert rep.passed


def test_certificates_are_written(tmp_path):
    p = tmp_path / "c.jsonl"
    run_experiment("prop41", FamilySpec("interval", (4,), scale=Fraction(10)), Options(k=1, certificates=str(p)))
    recs = [json.loads(line) for line in p.read_text().splitlines()]
    want = prop41_construct([10, 20, 30, 40], ShiftedPower(2), 1, 1)
    assert [r["value"] for r in recs] == [str(e.value) for e in want]
    assert all(r["family"] == "interval" and r["N"] == 4 for r in recs)


def test_rows_are_isolated():
    # a tiny cap trips the larger instances; the small one still runs
    rep = run_experiment("thm1", FamilySpec("interval", (3, 64, 128)), Options(cap=50))
    assert [r.status for r in rep.rows] == ["pass", "capped", "capped"]
    assert not rep.passed
    rep = run_experiment("thm3", FamilySpec("interval", (1, 8)), Options(k=1))
    assert [r.status for r in rep.rows] == ["error", "pass"]
    assert "ConstructionError" in rep.rows[0].details["error"]


def test_timings_flag():
    rep = run_experiment("thm1", FamilySpec("interval", (4,)), Options(timings=True))
    assert rep.rows[0].runtime_ms is not None and rep.rows[0].runtime_ms >= 0
    assert emit_report(rep).splitlines()[1].split(",")[-1] != ""


def test_unknown_theorem():
    with pytest.raises(ValueError):
        run_experiment("thm9", FamilySpec("interval", (3,)))


def test_determinism():
    spec = FamilySpec("random_subset", (8, 16), seed=3, replicates=2)
    a = emit_report(run_experiment("thm1", spec))
    b = emit_report(run_experiment("thm1", spec))
    assert a == b


def test_plot(tmp_path):
    reps = [
        run_experiment("thm1", FamilySpec("interval", (4, 8, 16)), name="sq"),
        run_experiment("plunnecke", FamilySpec("interval", (4, 8, 16)), Options(k=2)),
        ExperimentReport("thm2", "interval", [Row("thm2", "interval", 3, None, None, "capped")]),
    ]
    out = plot_reports(reps, tmp_path / "fig.png", "demo")
    data = (tmp_path / "fig.png").read_bytes()
    assert str(out).endswith("fig.png") and data[:8] == b"\x89PNG\r\n\x1a\n"
