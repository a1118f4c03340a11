"""CSV / JSON emission and log-log exponent fits."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

CSV_HEADER = ["theorem", "family", "N", "lhs", "rhs", "ratio", "assert", "constant", "runtime_ms"]
SCHEMA_VERSION = 1


def fit_exponent(rows: Sequence[tuple]) -> tuple[float, float, float]:
    """OLS fit of log(value) = slope*log(N) + intercept; residual is the RMS error."""
    pts = [(float(n), float(v)) for n, v in rows]
    if len(pts) < 3:
        raise ValueError("need at least 3 rows to fit an exponent")
    if any(n <= 0 or v <= 0 for n, v in pts):
        raise ValueError("fit needs positive N and values")
    x = np.log([n for n, _ in pts])
    y = np.log([v for _, v in pts])
    X = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = float(np.sqrt(np.mean((X @ np.array([slope, intercept]) - y) ** 2)))
    return float(slope), float(intercept), resid


def fit_rows(rows) -> Optional[tuple]:
    pts = {}
    for r in rows:
        if r.lhs is not None and r.lhs > 0 and r.N > 0 and r.status in ("pass", "fail", "report"):
            pts.setdefault(r.N, r.lhs)
    if len(pts) < 3:
        return None
    try:
        return fit_exponent(sorted(pts.items()))
    except ValueError:
        return None


def fmt_number(x) -> str:
    if x is None:
        return ""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        return f"{float(x):.12g}"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def csv_rows(reports: Iterable) -> list[list[str]]:
    out = []
    for rep in reports:
        for r in rep.rows:
            out.append(
                [
                    r.theorem,
                    r.family,
                    str(r.N),
                    fmt_number(r.lhs),
                    fmt_number(r.rhs),
                    fmt_number(r.ratio),
                    r.status,
                    r.constant,
                    "" if r.runtime_ms is None else f"{r.runtime_ms:.1f}",
                ]
            )
    return out


def to_csv(reports: Iterable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(csv_rows(reports))
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if v is None or isinstance(v, (bool, int, float, str)):
        return v
    return str(v)


def to_json(reports: Iterable) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "reports": []}
    for rep in reports:
        doc["reports"].append(
            {
                "theorem": rep.theorem,
                "name": rep.name,
                "family": rep.family,
                "prng": rep.prng,
                "options": _jsonable(rep.options),
                "fit": None if rep.fit is None else dict(zip(("slope", "intercept", "residual"), rep.fit)),
                "rows": [
                    {
                        "schema_version": SCHEMA_VERSION,
                        "theorem": r.theorem,
                        "family": r.family,
                        "N": r.N,
                        "lhs": _jsonable(r.lhs),
                        "rhs": _jsonable(r.rhs),
                        "ratio": fmt_number(r.ratio) or None,
                        "assert": r.status,
                        "constant": r.constant,
                        "runtime_ms": r.runtime_ms,
                        "details": _jsonable(r.details),
                    }
                    for r in rep.rows
                ],
            }
        )
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def emit_report(reports, path=None, fmt: str = "csv") -> str:
    if not isinstance(reports, (list, tuple)):
        reports = [reports]
    if fmt == "csv":
        text = to_csv(reports)
    elif fmt == "json":
        text = to_json(reports)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
