"""Squeezing constructions and verifiers for convex images of real sets.

The basic move: if Δ_d f is increasing and x < s, then
``f(s) + Δ_d f(x)`` lands strictly between ``f(s)`` and ``f(s+d)``.  Iterating
with ``g = f(a) + Δ_d f`` (one convexity order lower) produces many distinct
elements of ``2^k f(S) - (2^k - 1) f(S)``, each with an explicit certificate.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, prod
from typing import Iterable, Optional

from .convexfn import (
    ConvexFn,
    Log,
    Reflect,
    ValueSet,
    apply_fn,
    discrete_k_convexity_check,
)
from .errors import ConstructionError, ConvexityError
from .fields import RATIONAL_KIND, format_element, RATIONAL
from .setops import FiniteSet, min_gap, product_power, rational_set, signed_sumset


def squeeze_count(k: int, n: int) -> int:
    """C_k(n): C_1(n) = (n-1)(n-2)/2, C_k(n) = sum_{i=1..n} C_{k-1}(i-1)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < 3:
        return 0
    # The recursion telescopes to a binomial coefficient.
    return comb(n - 1, k + 1)


def _rationals(A) -> tuple:
    if isinstance(A, FiniteSet):
        if A.field.kind != RATIONAL_KIND:
            raise TypeError("expected a rational set")
        return A.raw
    return tuple(sorted({Fraction(x) for x in A}))


def _fmt(x: Fraction) -> str:
    return format_element(RATIONAL.element(x))


# --- grid -----------------------------------------------------------------------


@dataclass(frozen=True)
class SqueezeGrid:
    """Base points a_1 < ... < a_N with progressions P_i = {a_i, ..., a_i + kd}."""

    base: tuple
    d: Fraction
    k: int

    def __post_init__(self):
        object.__setattr__(self, "base", _rationals(self.base))
        object.__setattr__(self, "d", Fraction(self.d))
        if self.d <= 0:
            raise ConstructionError("d must be positive")
        if self.k < 1:
            raise ConstructionError("k must be >= 1")
        span = self.k * self.d
        for lo, hi in zip(self.base, self.base[1:]):
            if hi - lo < span:
                raise ConstructionError(f"gap {hi - lo} between {lo} and {hi} is below kd = {span}")

    @property
    def N(self) -> int:
        return len(self.base)

    def P(self, i: int) -> tuple:
        """P_{k,i}, 1-indexed."""
        a = self.base[i - 1]
        return tuple(a + j * self.d for j in range(self.k + 1))

    def S(self, i: int) -> tuple:
        """S_{k,i}: union of P_{k,j} over j < i."""
        return tuple(x for j in range(1, i) for x in self.P(j))

    def points(self) -> tuple:
        return tuple(x for i in range(1, self.N + 1) for x in self.P(i))


# --- certified elements ---------------------------------------------------------


@dataclass(frozen=True)
class CertifiedElement:
    """value = (+)f(plus) (-) f(minus) in f's value group, squeezed into interval."""

    value: Fraction
    plus: Optional[tuple]
    minus: Optional[tuple]
    interval: tuple

    def replay(self, f: ConvexFn) -> bool:
        if self.plus is None:
            raise ValueError("count-only element has no certificate")
        g = f.group
        acc = g.identity
        for x in self.plus:
            acc = g.op(acc, f(x))
        for x in self.minus:
            acc = g.sub(acc, f(x))
        lo, hi = self.interval
        return acc == self.value and lo < self.value < hi

    def to_json(self) -> str:
        rec = {
            "value": _fmt(self.value),
            "interval": [_fmt(self.interval[0]), _fmt(self.interval[1])],
        }
        if self.plus is not None:
            rec["certificate"] = {"plus": [_fmt(x) for x in self.plus], "minus": [_fmt(x) for x in self.minus]}
        return json.dumps(rec)


def write_certificates(elements: Iterable[CertifiedElement], path) -> int:
    n = 0
    with open(path, "w") as fh:
        for e in elements:
            fh.write(e.to_json() + "\n")
            n += 1
    return n


def _balance(plus: list, minus: list, k: int) -> tuple[tuple, tuple]:
    """Cancel common arguments until the sizes are exactly 2^k and 2^k - 1."""
    want = 1 << k
    excess = len(plus) - want
    if excess < 0 or len(minus) - excess != want - 1:
        raise ConstructionError("certificate has the wrong shape")
    common = Counter(plus) & Counter(minus)
    drop = Counter()
    for x in sorted(common):
        take = min(common[x], excess - sum(drop.values()))
        if take <= 0:
            break
        drop[x] = take
    if sum(drop.values()) != excess:
        raise ConstructionError("not enough cancelling pairs in certificate")
    p = Counter(plus) - drop
    m = Counter(minus) - drop
    return tuple(sorted(p.elements())), tuple(sorted(m.elements()))


class _Level:
    """f at depth 0; g = parent(a) + Δ_d parent below that."""

    def __init__(self, f: ConvexFn, parent: Optional["_Level"] = None, a=None, d=None):
        self.f = f
        self.group = f.group
        self.parent = parent
        self.a = a
        self.d = d
        self._cache: dict = {}

    def value(self, x):
        v = self._cache.get(x)
        if v is None:
            if self.parent is None:
                v = self.f(x)
            else:
                p, g = self.parent, self.group
                v = g.op(p.value(self.a), g.sub(p.value(x + self.d), p.value(x)))
            self._cache[x] = v
        return v

    def args(self, x) -> tuple[list, list]:
        if self.parent is None:
            return [x], []
        p = self.parent
        pa, ma = p.args(self.a)
        pd, md = p.args(x + self.d)
        px, mx = p.args(x)
        return pa + pd + mx, ma + md + px


def _check_grid_convexity(f: ConvexFn, grid: SqueezeGrid, mode: str = "increasing"):
    k, d = grid.k, grid.d
    pts = sorted({x for x in grid.points() if f.in_domain(x) and f.in_domain(x + k * d)})
    if len(pts) < 2:
        return
    rep = discrete_k_convexity_check(f, pts, k, [d] * k, mode=mode)
    if not rep.passed:
        raise ConvexityError(f"{f} fails the order-{rep.failed_order} check at {rep.at}")


def squeeze_set(f: ConvexFn, d, s, S_minus) -> ValueSet:
    """{f(s) + Δ_d f(x) : x in S_minus}, each strictly inside (f(s), f(s+d))."""
    d, s = Fraction(d), Fraction(s)
    if d <= 0:
        raise ValueError("d must be positive")
    xs = _rationals(S_minus)
    if not xs:
        return ValueSet(f.group, ())
    if any(x >= s for x in xs):
        raise ValueError("every element of S_minus must be below s")
    rep = discrete_k_convexity_check(f, list(xs) + [s], 1, [d])
    if not rep.passed:
        raise ConvexityError(f"{f} is not convex on the grid (order {rep.failed_order} at {rep.at})")
    g = f.group
    lo, hi = f(s), f(s + d)
    out = [g.op(lo, g.sub(f(x + d), f(x))) for x in xs]
    if len(set(out)) != len(out):
        raise ConstructionError("squeezed values collide")
    for v in out:
        if not lo < v < hi:
            raise ConstructionError(f"squeezed value {v} escapes ({lo}, {hi})")
    return ValueSet(g, out)


def prop41_construct(base, f: ConvexFn, k: int, d, *, certificates: bool = True) -> list[CertifiedElement]:
    """Certified distinct elements of 2^k f(S) - (2^k - 1) f(S) for the grid S.

    Output is ordered by interval, then value.  With ``certificates=False``
    the plus/minus fields are ``None``.
    """
    grid = SqueezeGrid(base, d, k)
    _check_grid_convexity(f, grid)
    d = grid.d
    g = f.group
    out: list[CertifiedElement] = []

    def emit(level: _Level, pts: tuple, depth: int, top_interval):
        for i in range(1, len(pts) - 1) if depth == 1 else range(len(pts) - 1):
            a = pts[i]
            lo, hi = level.value(a), level.value(a + d)
            interval = top_interval or (lo, hi)
            if depth == 1:
                for x in pts[:i]:
                    v = g.op(lo, g.sub(level.value(x + d), level.value(x)))
                    if not (lo < v < hi and interval[0] < v < interval[1]):
                        raise ConstructionError(f"value escapes its interval at center {a}")
                    cert = (None, None)
                    if certificates:
                        pa, ma = level.args(a)
                        pd, md = level.args(x + d)
                        px, mx = level.args(x)
                        cert = _balance(pa + pd + mx, ma + md + px, k)
                    out.append(CertifiedElement(v, cert[0], cert[1], interval))
            else:
                emit(_Level(f, level, a, d), pts[: i + 1], depth - 1, interval)

    emit(_Level(f), grid.base, k, None)
    values = [e.value for e in out]
    if len(set(values)) != len(values):
        raise ConstructionError("constructed values collide")
    if grid.base:
        fmin = min(f(a) for a in grid.base)
        fmax = max(f(a) for a in grid.base)
        if any(not fmin < v < fmax for v in values):
            raise ConstructionError("constructed value outside (min f(base), max f(base))")
    out.sort(key=lambda e: (e.interval[0], e.value))
    return out


def remark_containment(values) -> bool:
    """{x1 + x3 - x2 : x1 <= x2 <= x3} stays inside [min, max], checked exhaustively."""
    if isinstance(values, ValueSet):
        g, xs = values.group, list(values.values)
    else:
        from .convexfn import ADDITIVE

        g, xs = ADDITIVE, sorted({Fraction(v) for v in values})
    if not xs:
        return True
    lo, hi = xs[0], xs[-1]
    n = len(xs)
    for i in range(n):
        for j in range(i, n):
            for l in range(j, n):
                v = g.sub(g.op(xs[i], xs[l]), xs[j])
                if not lo <= v <= hi:
                    return False
    return True


# --- Ψ map and good indices -----------------------------------------------------


def psi_pairs(A, f: ConvexFn) -> list[tuple]:
    """(a_{i+1} - a_i, f(a_{i+1}) - f(a_i)) for consecutive elements; asserts injectivity."""
    pts = _rationals(A)
    if len(pts) < 2:
        raise ValueError("psi_pairs needs at least two elements")
    g = f.group
    vals = [f(a) for a in pts]
    steps = list(zip(vals, vals[1:]))
    if not (all(x < y for x, y in steps) or all(x > y for x, y in steps)):
        raise ConvexityError(f"{f} is not strictly monotone on the set")
    pairs = [(b - a, g.sub(fb, fa)) for a, b, fa, fb in zip(pts, pts[1:], vals, vals[1:])]
    if len(set(pairs)) != len(pairs):
        raise ConvexityError(f"consecutive-pair images collide; {f} is not strictly convex here")
    return pairs


@dataclass
class GapPartition:
    """Good consecutive gaps, 0-based: index i stands for the pair (a_i, a_{i+1})."""

    A: tuple
    good_indices: tuple
    H: tuple
    classes: dict
    threshold_constant: Fraction
    threshold_A: Fraction
    threshold_f: Optional[Fraction]
    conditions: int
    K: Fraction

    def truncation(self, h, i: int) -> tuple:
        """A_h^i: the first i - 1 elements of A_h."""
        return tuple(self.classes[h][: max(i - 1, 0)])

    def invariants(self) -> dict:
        n1 = len(self.A) - 1
        c = self.threshold_constant
        return {
            "pigeonhole": len(self.good_indices) >= n1 * (1 - Fraction(self.conditions) / c),
            "gap_count": len(self.H) <= self.threshold_A,
            "class_sum": sum(len(v) for v in self.classes.values()) == len(self.good_indices),
        }


def _count_between(sorted_vals, lo, hi) -> int:
    import bisect

    if lo > hi:
        lo, hi = hi, lo
    return bisect.bisect_right(sorted_vals, hi) - bisect.bisect_right(sorted_vals, lo)


def good_indices(A: FiniteSet, f: Optional[ConvexFn] = None, c=None, fA: Optional[ValueSet] = None) -> GapPartition:
    """Indices whose gap holds few elements of A+A-A (and of f(A)+f(A)-f(A)).

    ``fA`` may pass a precomputed ``apply_fn(f, A)`` to reuse its cached sumset.
    """
    pts = _rationals(A)
    n = len(pts)
    if n < 2:
        raise ValueError("good_indices needs at least two elements")
    c = Fraction(c if c is not None else (2 if f is None else 4))
    if c <= 1:
        raise ValueError("threshold constant must exceed 1")
    S = A if isinstance(A, FiniteSet) else rational_set(pts)
    ppm = S._ppm_sorted
    t_A = c * len(ppm) / (n - 1)
    good = [i for i in range(n - 1) if _count_between(ppm, pts[i], pts[i + 1]) <= t_A]
    t_f = None
    if f is not None:
        if fA is None:
            fA = apply_fn(f, pts)
        fppm = fA.plus_plus_minus.values
        t_f = c * len(fppm) / (n - 1)
        good = [i for i in good if _count_between(fppm, f(pts[i]), f(pts[i + 1])) <= t_f]
    classes: dict = {}
    for i in good:
        classes.setdefault(pts[i + 1] - pts[i], []).append(pts[i])
    return GapPartition(
        A=pts,
        good_indices=tuple(good),
        H=tuple(sorted(classes)),
        classes=classes,
        threshold_constant=c,
        threshold_A=t_A,
        threshold_f=t_f,
        conditions=1 if f is None else 2,
        K=Fraction(len(ppm), n),
    )


# --- verifiers ------------------------------------------------------------------


@dataclass
class TheoremReport:
    theorem: str
    n: int
    lhs: Fraction
    rhs: Fraction
    passed: Optional[bool]
    constant: str = ""
    details: dict = field(default_factory=dict)

    @property
    def ratio(self) -> Optional[Fraction]:
        return None if not self.rhs else Fraction(self.lhs) / Fraction(self.rhs)


def _convex_on(f: ConvexFn, pts, k: int):
    if len(pts) < 2 or k < 1:
        return
    d0 = min(b - a for a, b in zip(pts, pts[1:]))
    rep = discrete_k_convexity_check(f, pts, k, [d0] * k, mode="monotone")
    if not rep.passed:
        raise ConvexityError(f"{f} fails the order-{rep.failed_order} check at {rep.at}")


def verify_thm1(A: FiniteSet, f: ConvexFn) -> TheoremReport:
    """S1 * S2 >= (|A|-1)^3 / 32 with S1 = |A+A-A|, S2 = |f(A)+f(A)-f(A)|."""
    pts = _rationals(A)
    S = A if isinstance(A, FiniteSet) else rational_set(pts)
    n = len(pts)
    fA = apply_fn(f, pts)
    s1 = len(S.plus_plus_minus)
    s2 = len(fA.plus_plus_minus)
    bound = Fraction((n - 1) ** 3, 32)
    details = {"S1": s1, "S2": s2, "bound": bound, "ratio_n3": Fraction(s1 * s2, n**3) if n else None}
    if n >= 2:
        _convex_on(f, pts, 1)
        pairs = psi_pairs(pts, f)
        part = good_indices(S, f, 4, fA=fA)
        g = f.group
        Z1 = int(part.threshold_A)
        Z2 = int(part.threshold_f)
        dA = set(S.differences.raw[:Z1])
        dF = set(fA.positive_differences[:Z2])
        in_box = all(
            pairs[i][0] in dA and (pairs[i][1] if pairs[i][1] > g.identity else g.inv(pairs[i][1])) in dF
            for i in part.good_indices
        )
        details.update(
            good=len(part.good_indices),
            psi_injective=True,
            image_in_box=in_box,
            remark=remark_containment(fA) if n <= 40 else None,
        )
        passed = s1 * s2 >= bound and in_box and 2 * len(part.good_indices) >= n - 1
    else:
        passed = True
    return TheoremReport("thm1", n, Fraction(s1 * s2), bound, passed, "1/32", details)


def verify_thm2(A: FiniteSet, f: ConvexFn, k: int, cap: Optional[int] = None) -> TheoremReport:
    """|2^k f(A) - (2^k-1) f(A)| against |A|^(2^(k+1)-1) / |A+A-A|^(2^(k+1)-k-2)."""
    if not 1 <= k <= 3:
        raise ValueError("k must be in 1..3")
    pts = _rationals(A)
    S = A if isinstance(A, FiniteSet) else rational_set(pts)
    n = len(pts)
    _convex_on(f, pts, k)
    fA = apply_fn(f, pts)
    if cap is not None:
        fA.cap = cap
    L = fA.signed_sumset(1 << k, (1 << k) - 1)
    s = len(S.plus_plus_minus)
    rhs = Fraction(n ** ((1 << (k + 1)) - 1), s ** ((1 << (k + 1)) - k - 2)) if n else Fraction(0)
    inside = len([v for v in L.values if fA.min() < v < fA.max()]) if n else 0
    details = {"L": len(L), "S": s, "K": Fraction(s, n) if n else None, "inside": inside, "k": k}
    if n >= 2:
        part = good_indices(S, None, 2)
        details.update(good=len(part.good_indices), H=len(part.H))
    return TheoremReport("thm2", n, Fraction(len(L)), rhs, None, "1", details)


@dataclass
class GridMembership:
    """x = sum(plus) - sum(minus) with every argument in A."""

    x: Fraction
    plus: tuple
    minus: tuple


@dataclass
class Thm3Result:
    d0: Fraction
    witness: tuple
    s: int
    shifted: tuple
    memberships: list
    elements: list
    count: int
    expected: int


def _grid_memberships(A_sub, k, s, d0, b, b_prime) -> list[GridMembership]:
    out = []
    even = k % 2 == 0
    for a in A_sub:
        for j in range(k + 1):
            t = j - s
            if even:
                x = a + t * d0
                if t >= 0:
                    plus, minus = [a] + [b] * t, [b_prime] * t
                else:
                    plus, minus = [a] + [b_prime] * -t, [b] * -t
                pad = s - abs(t)
            else:
                x = a + t * d0 - b_prime
                if t >= 0:
                    plus, minus = [a] + [b] * t, [b_prime] * (t + 1)
                    pad = s - t - 1
                else:
                    plus, minus = [a] + [b_prime] * (-t - 1), [b] * -t
                    pad = s + t
            plus += [a] * pad
            minus += [a] * pad
            if sum(plus) - sum(minus) != x:
                raise ConstructionError(f"membership certificate for {x} does not add up")
            out.append(GridMembership(x, tuple(plus), tuple(minus)))
    return out


def _shifted_grid(A: FiniteSet, k: int):
    pts = _rationals(A)
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(pts) < 2 * k:
        raise ConstructionError(f"need |A| >= 2k = {2 * k}")
    d0, (b, b_prime) = min_gap(A if isinstance(A, FiniteSet) else rational_set(pts))
    d0, b, b_prime = d0.raw, b.raw, b_prime.raw
    s = k // 2 if k % 2 == 0 else (k + 1) // 2
    M = len(pts) // k
    chosen = [pts[k * t - 1] for t in range(1, M + 1)]
    shift = s * d0 + (b_prime if k % 2 else 0)
    shifted = tuple(a - shift for a in chosen)
    members = _grid_memberships(chosen, k, s, d0, b, b_prime)
    allowed = set(pts)
    for m in members:
        if not set(m.plus) <= allowed or not set(m.minus) <= allowed:
            raise ConstructionError("membership certificate uses an element outside A")
        want = (s + 1, s) if k % 2 == 0 else (s, s)
        if (len(m.plus), len(m.minus)) != want:
            raise ConstructionError("membership certificate has the wrong size")
    return d0, (b, b_prime), s, shifted, members


def thm3_construct(A: FiniteSet, f: ConvexFn, k: int, *, certificates: bool = True) -> Thm3Result:
    """Shift every k-th element of A so the squeeze grid sits inside (s+1)A-sA or sA-sA."""
    d0, wit, s, shifted, members = _shifted_grid(A, k)
    elems = prop41_construct(shifted, f, k, d0, certificates=certificates)
    return Thm3Result(d0, wit, s, shifted, members, elems, len(elems), squeeze_count(k, len(shifted)))


@dataclass(frozen=True)
class CertifiedQuotient:
    """value = prod(numerator) / prod(denominator), numerator of size 2^k."""

    value: Fraction
    numerator: tuple
    denominator: tuple

    def replay(self) -> bool:
        return prod(self.numerator, start=Fraction(1)) / prod(self.denominator, start=Fraction(1)) == self.value

    def to_json(self) -> str:
        return json.dumps(
            {
                "value": _fmt(self.value),
                "certificate": {
                    "numerator": [_fmt(x) for x in self.numerator],
                    "denominator": [_fmt(x) for x in self.denominator],
                },
            }
        )


def thm4_products(
    A: FiniteSet,
    s: int,
    *,
    enumerate_products: Optional[bool] = None,
    certificates: bool = True,
    cap: Optional[int] = None,
) -> TheoremReport:
    """Distinct quotients of products of sA-sA, and |(sA-sA)^(m)| with m = 2^(2s-1)."""
    if s < 1:
        raise ValueError("s must be >= 1")
    pts = _rationals(A)
    S = A if isinstance(A, FiniteSet) else rational_set(pts)
    n = len(pts)
    k = 2 * s - 1
    m = 1 << k
    details: dict = {"s": s, "k": k, "m": m, "log_domain": "positive grid, reflected"}
    quotients: list[CertifiedQuotient] = []
    constructed = 0
    if n < 2:
        details["degenerate"] = True
        details["M_pos"] = 0
    else:
        details["degenerate"] = False
        try:
            d0, _, _, shifted, members = _shifted_grid(S, k)
        except ConstructionError as exc:
            details["construction"] = str(exc)
            shifted, members, d0 = (), [], None
        positive = [a for a in shifted if a > 0]
        details["M"] = len(shifted)
        details["M_pos"] = len(positive)
        if len(positive) >= 3:
            reflected = sorted(-(a + k * d0) for a in positive)
            F = Reflect(Log())
            elems = prop41_construct(reflected, F, k, d0, certificates=certificates)
            for e in elems:
                num = tuple(sorted(-y for y in e.plus)) if certificates else ()
                den = tuple(sorted(-y for y in e.minus)) if certificates else ()
                q = CertifiedQuotient(1 / e.value, num, den)
                if certificates and not q.replay():
                    raise ConstructionError("quotient certificate does not replay")
                quotients.append(q)
            constructed = len(elems)
            grid_vals = {mm.x for mm in members}
            if certificates and any(x not in grid_vals for q in quotients for x in q.numerator + q.denominator):
                raise ConstructionError("quotient uses a point outside the certified grid")
        details["expected"] = squeeze_count(k, details["M_pos"]) if details["M_pos"] else 0
    details["constructed"] = constructed
    details["quotients"] = quotients
    if enumerate_products is None:
        enumerate_products = s == 1 or (s == 2 and n <= 6)
    lhs: Fraction
    passed: Optional[bool]
    X = signed_sumset(S, s, s, cap) if n else S
    details["X"] = len(X)
    if enumerate_products and n:
        P = product_power(X, m, cap)
        size = len(P)
        details["product_size"] = size
        lhs = Fraction(size)
        passed = size >= n**s and size * size >= constructed
    else:
        lhs = Fraction(constructed)
        passed = constructed >= details.get("expected", 0)
    return TheoremReport("thm4", n, lhs, Fraction(n**s), passed, f"m={m}", details)
