"""Batch runner: one row per instance, failures isolated per row."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .. import squeeze, ultra
from ..convexfn import ConvexFn, ShiftedPower, parse_fn
from ..engine import DEFAULT_CAP
from ..errors import ResourceLimitError
from ..setops import FiniteSet
from .families import PRNG_ID, FamilySpec, Instance, gen_family

THEOREMS = ("thm1", "thm2", "thm3", "thm4", "thmC", "thmFF", "prop41", "chains", "lem1", "plunnecke")

PASS, FAIL, REPORT, CAPPED, ERROR = "pass", "fail", "report", "capped", "error"


@dataclass
class Options:
    fn: Optional[str] = None
    k: int = 1
    s: int = 1
    d: Fraction = Fraction(1)
    eps: Fraction = Fraction(0)
    cap: int = DEFAULT_CAP
    certificates: Optional[str] = None
    timings: bool = False


@dataclass
class Row:
    theorem: str
    family: str
    N: int
    lhs: Fraction
    rhs: Optional[Fraction]
    status: str
    constant: str = ""
    runtime_ms: Optional[float] = None
    details: dict = field(default_factory=dict)

    @property
    def ratio(self) -> Optional[Fraction]:
        if self.rhs is None or self.rhs == 0 or self.lhs is None:
            return None
        return Fraction(self.lhs) / Fraction(self.rhs)


@dataclass
class ExperimentReport:
    theorem: str
    family: str
    rows: list
    options: dict = field(default_factory=dict)
    prng: str = PRNG_ID
    fit: Optional[tuple] = None
    name: str = ""

    @property
    def passed(self) -> bool:
        return all(r.status in (PASS, REPORT) for r in self.rows)


def _status(passed) -> str:
    if passed is None:
        return REPORT
    return PASS if passed else FAIL


def _power_for_grid(A, k: int) -> ConvexFn:
    """x^(k+1) shifted so the whole shifted grid sits in x >= 0."""
    d0, _, _, shifted, _ = squeeze._shifted_grid(A, k)
    low = min(shifted)
    return ShiftedPower(k + 1, max(Fraction(0), -low))


class _CertSink:
    def __init__(self, path: Optional[str]):
        self.fh = open(path, "a") if path else None

    def write(self, label, N, records):
        if self.fh is None:
            return
        for r in records:
            self.fh.write(r.to_json()[:-1] + f', "family": "{label}", "N": {N}}}\n')

    def close(self):
        if self.fh:
            self.fh.close()


def _run_one(theorem: str, inst: Instance, opts: Options, sink: _CertSink) -> Row:
    A = inst.A.with_cap(opts.cap)
    n = len(A)
    label = inst.label
    certs = sink.fh is not None
    if theorem == "thm1":
        f = parse_fn(opts.fn or "pow(2,0)")
        rep = squeeze.verify_thm1(A, f)
        return Row(theorem, label, n, rep.lhs, rep.rhs, _status(rep.passed), "1/32", details=_plain(rep.details))
    if theorem == "thm2":
        f = parse_fn(opts.fn) if opts.fn else ShiftedPower(opts.k + 1)
        rep = squeeze.verify_thm2(A, f, opts.k, opts.cap)
        return Row(theorem, label, n, rep.lhs, rep.rhs, REPORT, "1", details=_plain(rep.details))
    if theorem == "thm3":
        f = parse_fn(opts.fn) if opts.fn else _power_for_grid(A, opts.k)
        res = squeeze.thm3_construct(A, f, opts.k, certificates=True)
        ok = res.count >= res.expected and all(e.replay(f) for e in res.elements)
        sink.write(label, n, res.elements)
        det = {"d0": res.d0, "M": len(res.shifted), "memberships": len(res.memberships), "fn": str(f)}
        return Row(theorem, label, n, Fraction(res.count), Fraction(res.expected), _status(ok), "C_k(M)", details=det)
    if theorem == "thm4":
        rep = squeeze.thm4_products(A, opts.s, certificates=True, cap=opts.cap)
        sink.write(label, n, rep.details.pop("quotients"))
        return Row(theorem, label, n, rep.lhs, rep.rhs, _status(rep.passed), rep.constant, details=_plain(rep.details))
    if theorem == "prop41":
        f = parse_fn(opts.fn) if opts.fn else ShiftedPower(opts.k + 1)
        elems = squeeze.prop41_construct(A, f, opts.k, opts.d, certificates=True)
        expected = squeeze.squeeze_count(opts.k, n)
        ok = len(elems) == expected and all(e.replay(f) for e in elems)
        sink.write(label, n, elems)
        return Row(theorem, label, n, Fraction(len(elems)), Fraction(expected), _status(ok), "C_k(N)")
    if theorem == "thmC":
        rep = ultra.verify_thmC(A, opts.cap)
        det = {
            "S": rep.sum_size,
            "P": rep.product_size,
            "triples": rep.triples,
            "max_coverage": rep.max_coverage,
            "psi_injective": rep.psi_injective,
        }
        return Row(theorem, label, n, rep.lhs, rep.rhs, _status(rep.passed), rep.constant, details=det)
    if theorem == "thmFF":
        rep = ultra.verify_thmFF(A, opts.eps, opts.cap)
        return Row(theorem, label, n, rep.lhs, rep.rhs, REPORT, rep.constant, details=_plain(rep.details))
    if theorem == "chains":
        forest = ultra.chain_forest(A)
        S = len(A.plus_plus_minus)
        P = len(ultra.product_power(A, 2, opts.cap))
        bound = Fraction(n**4, S * P * P) / Fraction(math.log2(n) ** 3) if n > 2 else None
        det = {"max_weak_depth": forest.max_weak_depth, "j0": forest.j0()}
        return Row(theorem, label, n, Fraction(forest.max_depth), bound, REPORT, "1", details=det)
    if theorem == "lem1":
        forest = ultra.chain_forest(A)
        chain = forest.deepest_chain()
        U = ultra.separable_extract(chain)
        Uset = FiniteSet(A.field, U)
        plus = (opts.k + 1) // 2
        rep = ultra.lem1_verify(Uset, plus, opts.k - plus, opts.cap)
        return Row(theorem, label, len(Uset), rep.lhs, rep.rhs, REPORT, "1", details={"chain": len(chain)})
    if theorem == "plunnecke":
        rep = ultra.plunnecke_check(A, opts.k, opts.cap)
        return Row(theorem, label, n, rep.lhs, rep.rhs, REPORT, "1", details=_plain(rep.details))
    raise ValueError(f"unknown theorem {theorem!r}")


def _plain(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, (list, tuple)) and v and not isinstance(v[0], (int, float, str, Fraction)):
            continue
        out[k] = v
    return out


def run_experiment(
    theorem: str, family: FamilySpec, options: Optional[Options] = None, name: str = ""
) -> ExperimentReport:
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem {theorem!r}; expected one of {', '.join(THEOREMS)}")
    opts = options or Options()
    instances = gen_family(family)
    sink = _CertSink(opts.certificates)
    rows = []
    try:
        for inst in instances:
            t0 = time.perf_counter()
            try:
                row = _run_one(theorem, inst, opts, sink)
            except ResourceLimitError as exc:
                row = Row(theorem, inst.label, len(inst.A), None, None, CAPPED, details={"error": str(exc)})
            except Exception as exc:  # isolate the row, keep the batch going
                row = Row(
                    theorem, inst.label, len(inst.A), None, None, ERROR,
                    details={"error": f"{type(exc).__name__}: {exc}"},
                )
            if opts.timings:
                row.runtime_ms = (time.perf_counter() - t0) * 1000
            rows.append(row)
    finally:
        sink.close()
    rows.sort(key=lambda r: (r.family, r.N))
    from .report import fit_rows

    report = ExperimentReport(theorem, family.name, rows, _options_dict(family, opts), name=name)
    report.fit = fit_rows(rows)
    return report


def _options_dict(family: FamilySpec, opts: Options) -> dict:
    return {
        "family": family.name,
        "sizes": list(family.sizes),
        "seed": family.seed,
        "q": family.q,
        "fn": opts.fn,
        "k": opts.k,
        "s": opts.s,
        "cap": opts.cap,
    }
