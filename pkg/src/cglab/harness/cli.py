"""Command-line entry point: ``cglab verify | construct | chains | exponent``."""

from __future__ import annotations

import argparse
import configparser
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional

from .. import squeeze, ultra
from ..convexfn import ShiftedPower, parse_fn
from ..engine import DEFAULT_CAP
from ..errors import CglabError
from ..setops import read_set_file
from . import report as rpt
from .experiments import THEOREMS, Options, run_experiment
from .families import FAMILIES, FamilySpec, gen_family, parse_sizes

# Keys accepted in config sections, with their converters.
_KEYS = {
    "theorem": str,
    "family": str,
    "sizes": parse_sizes,
    "k": int,
    "s": int,
    "q": int,
    "fn": str,
    "seed": int,
    "g": Fraction,
    "start": Fraction,
    "step": Fraction,
    "scale": Fraction,
    "d": Fraction,
    "eps": Fraction,
    "m": int,
    "max_degree": int,
    "rotate": lambda v: v.strip().lower() in ("1", "true", "yes", "on"),
    "replicates": int,
    "path": str,
    "cap": int,
}


def load_battery(path: Optional[str] = None) -> list[tuple[str, dict]]:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str.lower
    if path is None:
        text = resources.files("cglab.harness").joinpath("default_battery.cfg").read_text()
        cp.read_string(text)
    else:
        if not cp.read(path):
            raise FileNotFoundError(path)
    out = []
    for name in cp.sections():
        sec = {}
        for key, raw in cp[name].items():
            key = key.replace("-", "_")
            if key not in _KEYS:
                raise ValueError(f"[{name}] unknown key {key!r}")
            sec[key] = _KEYS[key](raw)
        if "theorem" not in sec or "family" not in sec:
            raise ValueError(f"[{name}] needs theorem and family")
        out.append((name, sec))
    return out


def _experiment(name: str, sec: dict, cap_override: Optional[int], certificates, timings):
    fam_keys = ("sizes", "seed", "q", "g", "start", "step", "scale", "fn", "m", "max_degree", "rotate",
                "replicates", "path")
    fam = {k: sec[k] for k in fam_keys if k in sec}
    if "m" in fam:
        fam["M"] = fam.pop("m")
    fam_fn = fam.pop("fn", None)
    spec = FamilySpec(sec["family"], **fam, **({"fn": fam_fn} if sec["family"] == "convex_image" and fam_fn else {}))
    opts = Options(
        fn=None if sec["family"] == "convex_image" else sec.get("fn"),
        k=sec.get("k", 1),
        s=sec.get("s", 1),
        d=sec.get("d", Fraction(1)),
        eps=sec.get("eps", Fraction(0)),
        cap=cap_override or sec.get("cap", DEFAULT_CAP),
        certificates=certificates,
        timings=timings,
    )
    return run_experiment(sec["theorem"], spec, opts, name)


def _flags_section(args) -> dict:
    sec = {"theorem": args.theorem, "family": args.family}
    for key in ("k", "s", "q", "fn", "seed", "g", "scale", "d", "eps", "max_degree", "replicates", "path"):
        v = getattr(args, key)
        if v is not None:
            sec[key] = _KEYS[key](v) if isinstance(v, str) and key not in ("fn", "path") else v
    if args.M is not None:
        sec["m"] = args.M
    if args.rotate:
        sec["rotate"] = True
    if args.sizes:
        sec["sizes"] = parse_sizes(args.sizes)
    return sec


def _write_output(reports, args):
    text = rpt.emit_report(reports, args.out, args.format)
    if args.out is None:
        sys.stdout.write(text)
    if args.plot is not None:
        from .plotting import plot_reports

        if args.plot == "auto":
            if args.out is None:
                raise SystemExit("--plot without a path needs --out")
            target = Path(args.out).with_suffix(".png")
        else:
            target = Path(args.plot)
        plot_reports(reports, target, title=", ".join(sorted({r.theorem for r in reports})))
        print(f"figure: {target}", file=sys.stderr)


def _summary(reports) -> bool:
    ok = True
    for rep in reports:
        counts: dict = {}
        for r in rep.rows:
            counts[r.status] = counts.get(r.status, 0) + 1
        fit = "" if rep.fit is None else f" slope={rep.fit[0]:.4f}"
        print(f"{rep.name or rep.theorem:22s} {rep.family:18s} " + " ".join(f"{k}={v}" for k, v in sorted(counts.items())) + fit,
              file=sys.stderr)
        ok = ok and rep.passed
    return ok


def cmd_verify(args) -> int:
    if args.theorem != "all" and args.theorem not in THEOREMS:
        raise SystemExit(f"unknown theorem {args.theorem!r}")
    if args.certificates:
        Path(args.certificates).write_text("")
    if args.family:
        sections = [(args.theorem, _flags_section(args))]
    else:
        sections = load_battery(args.config)
        if args.theorem != "all":
            sections = [(n, s) for n, s in sections if s["theorem"] == args.theorem]
            if not sections:
                raise SystemExit(f"no battery entries for {args.theorem}; pass --family")
    reports = [_experiment(n, sec, args.cap, args.certificates, args.timings) for n, sec in sections]
    _write_output(reports, args)
    return 0 if _summary(reports) else 1


def cmd_construct(args) -> int:
    if args.what != "prop41":
        raise SystemExit("only prop41 can be constructed")
    if args.base:
        bases = [("file", read_set_file(args.base))]
    else:
        spec = FamilySpec(args.family or "interval", parse_sizes(args.sizes or "8"), scale=Fraction(args.scale))
        bases = [(inst.label, inst.A) for inst in gen_family(spec)]
    f = parse_fn(args.fn) if args.fn else ShiftedPower(args.k + 1)
    sink = open(args.certificates, "w") if args.certificates else None
    ok = True
    try:
        print("family,N,k,count,expected,replayed")
        for label, A in bases:
            elems = squeeze.prop41_construct(A, f, args.k, Fraction(args.d), certificates=True)
            expected = squeeze.squeeze_count(args.k, len(A))
            replay = all(e.replay(f) for e in elems)
            ok = ok and replay and len(elems) >= expected
            print(f"{label},{len(A)},{args.k},{len(elems)},{expected},{str(replay).lower()}")
            if sink:
                for e in elems:
                    sink.write(e.to_json() + "\n")
    finally:
        if sink:
            sink.close()
    return 0 if ok else 1


def cmd_chains(args) -> int:
    A = read_set_file(args.input)
    forest = ultra.chain_forest(A)
    text = forest.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    chain = forest.deepest_chain()
    U = ultra.separable_extract(chain)
    f = A.field
    print(
        f"max depth {forest.max_depth}; deepest chain "
        f"{' < '.join(f.format_raw(c) for c in chain.elements)}; separable subset size {len(U)}",
        file=sys.stderr,
    )
    return 0


def cmd_exponent(args) -> int:
    rows = rpt.read_csv(args.input)
    groups: dict = {}
    for r in rows:
        if r.get("assert") in ("capped", "error"):
            continue
        try:
            x, y = float(r[args.x]), float(r[args.y])
        except (KeyError, ValueError):
            continue
        key = (r.get("theorem", ""), r.get("family", "").split("#")[0])
        groups.setdefault(key, {}).setdefault(x, y)
    print("theorem,family,slope,intercept,residual,points")
    status = 0
    for (th, fam), pts in sorted(groups.items()):
        try:
            slope, icpt, res = rpt.fit_exponent(sorted(pts.items()))
        except ValueError as exc:
            print(f"{th},{fam},,,,{len(pts)}  # {exc}", file=sys.stderr)
            status = 1
            continue
        print(f"{th},{fam},{slope:.6f},{icpt:.6f},{res:.6g},{len(pts)}")
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cglab", description="Sum-product and convexity experiments with exact arithmetic.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verifiers over set families")
    v.add_argument("theorem", help=f"one of {', '.join(THEOREMS)} or 'all'")
    v.add_argument("--family", choices=FAMILIES)
    v.add_argument("--sizes", help="a..b (doubling), a..b,step or a comma list")
    v.add_argument("--k", type=int)
    v.add_argument("--s", type=int)
    v.add_argument("--q", type=int)
    v.add_argument("--fn", help="pow(p, c), log or reflect(<fn>)")
    v.add_argument("--seed", type=int)
    v.add_argument("--g", help="ratio for gp")
    v.add_argument("--M", type=int, help="range for random families")
    v.add_argument("--scale", help="dilation applied to rational families")
    v.add_argument("--d", help="progression step for prop41")
    v.add_argument("--eps", help="epsilon for thmFF")
    v.add_argument("--max-degree", dest="max_degree", type=int)
    v.add_argument("--rotate", action="store_true")
    v.add_argument("--replicates", type=int)
    v.add_argument("--path", help="set file for the from_file family")
    v.add_argument("--out")
    v.add_argument("--format", choices=("csv", "json"), default="csv")
    v.add_argument("--certificates", metavar="PATH", help="write certified elements as JSON lines")
    v.add_argument("--cap", type=int)
    v.add_argument("--config", help="battery file (INI sections, keys mirror these flags)")
    v.add_argument("--timings", action="store_true", help="fill runtime_ms (makes output nondeterministic)")
    v.add_argument("--plot", nargs="?", const="auto", help="log-log PNG; defaults to <out>.png")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("construct", help="certified constructions")
    c.add_argument("what", choices=("prop41",))
    c.add_argument("--base", help="set file holding a_1 < ... < a_N")
    c.add_argument("--family", choices=FAMILIES)
    c.add_argument("--sizes")
    c.add_argument("--scale", default="1")
    c.add_argument("--k", type=int, default=1)
    c.add_argument("--d", default="1")
    c.add_argument("--fn")
    c.add_argument("--certificates", metavar="PATH")
    c.set_defaults(func=cmd_construct)

    ch = sub.add_parser("chains", help="nearest-neighbour ball forest of a Laurent set")
    ch.add_argument("--in", dest="input", required=True)
    ch.add_argument("--out")
    ch.set_defaults(func=cmd_chains)

    e = sub.add_parser("exponent", help="log-log slope fits from a report CSV")
    e.add_argument("--in", dest="input", required=True)
    e.add_argument("--x", default="N")
    e.add_argument("--y", default="lhs")
    e.set_defaults(func=cmd_exponent)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CglabError, ValueError, FileNotFoundError) as exc:
        print(f"cglab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
