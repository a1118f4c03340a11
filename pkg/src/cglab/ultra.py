"""Nearest-neighbour balls, ultrametric chains and the complex / function-field verifiers.

Laurent balls are compared through a canonical id: ``(radius, truncation of the
center to degrees above the radius)``.  Two closed balls are the same set
exactly when their ids agree.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import lcm
from typing import Optional, Sequence

import numpy as np

from .errors import FieldMismatchError
from .fields import (
    GAUSSIAN_KIND,
    LAURENT_KIND,
    FieldDescriptor,
    FieldElement,
    NormKey,
)
from .setops import FiniteSet, product_power, signed_sumset

_NEG_INF = float("-inf")


def _require_ultrametric(f: FieldDescriptor):
    if not getattr(f, "is_ultrametric", False):
        raise FieldMismatchError(f"{f} is not ultrametric; balls need not nest")


def _raw(f: FieldDescriptor, x):
    if isinstance(x, FieldElement):
        if x.field != f:
            raise FieldMismatchError("element from a different field")
        return x.raw
    return f.coerce(x)


@dataclass(frozen=True)
class Ball:
    """Closed ball B(center, radius) = {x : key(x - center) <= radius}."""

    center: FieldElement
    radius: NormKey

    def __post_init__(self):
        if self.radius.kind != self.center.field.kind:
            raise FieldMismatchError("radius key is for a different field kind")

    @property
    def field(self):
        return self.center.field

    def contains(self, x) -> bool:
        f = self.field
        return f.raw_key(f.sub(_raw(f, x), self.center.raw)) <= self.radius.to_raw()

    __contains__ = contains

    def ball_id(self):
        _require_ultrametric(self.field)
        return _laurent_ball_id(self.center.raw, self.radius.to_raw())

    def __str__(self):
        return f"B({self.center}, {self.radius})"


def _laurent_ball_id(center_raw, r):
    return (r, tuple(term for term in center_raw if term[0] > r))


class BallRelation(enum.Enum):
    DISJOINT = "disjoint"
    EQUAL = "equal"
    FIRST_INSIDE = "b1<b2"
    SECOND_INSIDE = "b2<b1"


def ball_relation(b1: Ball, b2: Ball) -> BallRelation:
    """Exact relation between two Laurent balls (intersecting balls always nest)."""
    f = b1.field
    if b2.field != f:
        raise FieldMismatchError("balls over different fields")
    _require_ultrametric(f)
    r1, r2 = b1.radius.to_raw(), b2.radius.to_raw()
    dist = f.raw_key(f.sub(b1.center.raw, b2.center.raw))
    if dist > max(r1, r2):
        return BallRelation.DISJOINT
    if r1 == r2:
        return BallRelation.EQUAL
    return BallRelation.FIRST_INSIDE if r1 < r2 else BallRelation.SECOND_INSIDE


# --- nearest neighbours -----------------------------------------------------------


@dataclass
class NearestNeighborData:
    """r_A(a), B_A(a) and a witness nearest neighbour for every a, aligned with A.raw."""

    A: FiniteSet
    radii: tuple
    witnesses: tuple

    def index(self, a) -> int:
        x = _raw(self.A.field, a)
        return self.A.raw.index(x)

    def radius(self, a) -> NormKey:
        return NormKey.from_raw(self.A.field.kind, self.radii[self.index(a)])

    def witness(self, a) -> FieldElement:
        return FieldElement(self.A.field, self.witnesses[self.index(a)])

    def ball(self, a) -> Ball:
        i = self.index(a)
        f = self.A.field
        return Ball(FieldElement(f, self.A.raw[i]), NormKey.from_raw(f.kind, self.radii[i]))

    def balls(self) -> list[Ball]:
        f = self.A.field
        return [Ball(FieldElement(f, x), NormKey.from_raw(f.kind, r)) for x, r in zip(self.A.raw, self.radii)]


def nn_data(A: FiniteSet) -> NearestNeighborData:
    if len(A) < 2:
        raise ValueError("nearest neighbours need at least two elements")
    f = A.field
    raw = A.raw
    if f.kind == GAUSSIAN_KIND:
        return _gaussian_nn(A)
    radii, wits = [], []
    for i, a in enumerate(raw):
        best, wit = None, None
        for j, b in enumerate(raw):
            if i == j:
                continue
            k = f.raw_key(f.sub(a, b))
            if best is None or k < best:
                best, wit = k, b
        radii.append(best)
        wits.append(wit)
    return NearestNeighborData(A, tuple(radii), tuple(wits))


def _gaussian_nn(A: FiniteSet) -> NearestNeighborData:
    L = _gaussian_scale(A.raw)
    xs = _int_array([int(a[0] * L) for a in A.raw])
    ys = _int_array([int(a[1] * L) for a in A.raw])
    d = (xs[:, None] - xs[None, :]) ** 2 + (ys[:, None] - ys[None, :]) ** 2
    n = len(A.raw)
    big = d.max() + 1
    for i in range(n):
        d[i, i] = big
    # argmin returns the first minimiser, i.e. the canonical-order tie-break
    idx = [int(j) for j in np.argmin(d, axis=1)]
    radii = tuple(Fraction(int(d[i, j]), L * L) for i, j in enumerate(idx))
    return NearestNeighborData(A, radii, tuple(A.raw[j] for j in idx))


# --- chain forest -------------------------------------------------------------------


@dataclass
class ForestNode:
    ball_id: tuple
    radius: object
    members: list
    parent: Optional[int] = None
    children: list = field(default_factory=list)
    height: int = 1
    weak_height: int = 0


@dataclass
class AChain:
    """Elements c_1, ..., c_n whose nearest-neighbour balls are nested (innermost first)."""

    elements: tuple
    nn: NearestNeighborData
    strict: bool = True

    def __len__(self):
        return len(self.elements)

    def validate(self) -> bool:
        if len(set(self.elements)) != len(self.elements):
            return False
        f = self.nn.A.field
        balls = [self.nn.ball(FieldElement(f, c)) for c in self.elements]
        for b1, b2 in zip(balls, balls[1:]):
            rel = ball_relation(b1, b2)
            if rel is BallRelation.FIRST_INSIDE:
                continue
            if rel is BallRelation.EQUAL and not self.strict:
                continue
            return False
        return True


@dataclass
class ChainForest:
    """Inclusion forest over the distinct balls B_A(a).

    ``depths`` uses strict inclusion (equal balls count once); ``weak_depths``
    counts chains under non-strict inclusion with distinct centres.
    """

    A: FiniteSet
    nn: NearestNeighborData
    nodes: list
    node_of: dict
    depths: dict
    weak_depths: dict

    @property
    def max_depth(self) -> int:
        return max(self.depths.values())

    @property
    def max_weak_depth(self) -> int:
        return max(self.weak_depths.values())

    def depth(self, a) -> int:
        return self.depths[_raw(self.A.field, a)]

    def chain_ending_at(self, a, strict: bool = True) -> AChain:
        """A longest chain whose outermost element is a."""
        f = self.A.field
        x = _raw(f, a)
        path = []
        node = self.nodes[self.node_of[x]]
        key = (lambda n: n.height) if strict else (lambda n: n.weak_height)
        while True:
            path.append(node)
            if not node.children:
                break
            node = max((self.nodes[c] for c in node.children), key=lambda n: (key(n), n.members[0]))
        path.reverse()
        out = []
        for n in path:
            if n is path[-1]:
                group = [x] if strict else [m for m in n.members if m != x] + [x]
            else:
                group = [n.members[0]] if strict else list(n.members)
            out.extend(group)
        return AChain(tuple(out), self.nn, strict)

    def deepest_chain(self, strict: bool = True) -> AChain:
        best = max(self.A.raw, key=lambda a: ((self.depths if strict else self.weak_depths)[a],))
        return self.chain_ending_at(FieldElement(self.A.field, best), strict)

    def dyadic_classes(self) -> dict:
        """A_j = {a : 2^j <= N(a) < 2^(j+1)}."""
        classes: dict = {}
        for a, n in self.depths.items():
            classes.setdefault(n.bit_length() - 1, []).append(a)
        return classes

    def j0(self) -> int:
        classes = self.dyadic_classes()
        return max(sorted(classes), key=lambda j: (len(classes[j]), -j))

    def to_json(self) -> str:
        f = self.A.field
        nodes = [
            {
                "element": f.format_raw(n.members[0]),
                "members": [f.format_raw(m) for m in n.members],
                "radius_key": None if n.radius == _NEG_INF else n.radius,
                "parent": n.parent,
            }
            for n in self.nodes
        ]
        depths = {f.format_raw(a): self.depths[a] for a in self.A.raw}
        return json.dumps({"nodes": nodes, "depths": depths}, indent=1)


def chain_forest(A: FiniteSet, nn: Optional[NearestNeighborData] = None) -> ChainForest:
    f = A.field
    _require_ultrametric(f)
    nn = nn or nn_data(A)
    by_id: dict = {}
    node_of: dict = {}
    nodes: list[ForestNode] = []
    for a, r in zip(A.raw, nn.radii):
        bid = _laurent_ball_id(a, r)
        if bid not in by_id:
            by_id[bid] = len(nodes)
            nodes.append(ForestNode(bid, r, []))
        nodes[by_id[bid]].members.append(a)
        node_of[a] = by_id[bid]
    order = sorted(range(len(nodes)), key=lambda i: nodes[i].radius)
    for pos, i in enumerate(order):
        r, trunc = nodes[i].ball_id
        center = nodes[i].members[0]
        for j in order[pos + 1 :]:
            rj = nodes[j].radius
            if rj > r and f.raw_key(f.sub(center, nodes[j].members[0])) <= rj:
                nodes[i].parent = j
                nodes[j].children.append(i)
                break
    for i in order:
        n = nodes[i]
        n.height = 1 + max((nodes[c].height for c in n.children), default=0)
        n.weak_height = len(n.members) + max((nodes[c].weak_height for c in n.children), default=0)
    depths = {a: nodes[node_of[a]].height for a in A.raw}
    weak = {a: nodes[node_of[a]].weak_height for a in A.raw}
    return ChainForest(A, nn, nodes, node_of, depths, weak)


def longest_chain_bruteforce(A: FiniteSet, strict: bool = True) -> int:
    """Longest A-chain by trying every subset (oracle for |A| <= 12 or so)."""
    nn = nn_data(A)
    balls = nn.balls()
    n = len(balls)
    ok = {BallRelation.FIRST_INSIDE} if strict else {BallRelation.FIRST_INSIDE, BallRelation.EQUAL}
    rel = [[ball_relation(balls[i], balls[j]) for j in range(n)] for i in range(n)]
    best = 1
    for mask in range(1, 1 << n):
        idx = [i for i in range(n) if mask >> i & 1]
        if len(idx) <= best:
            continue
        idx.sort(key=lambda i: balls[i].radius)
        if all(rel[i][j] in ok for i, j in zip(idx, idx[1:])):
            best = len(idx)
    return best


# --- separability -----------------------------------------------------------------


def enclosing_ball(f: FieldDescriptor, points: Sequence) -> Ball:
    """Smallest closed ball around a finite Laurent set: canonical minimum centre, radius = diameter."""
    _require_ultrametric(f)
    pts = sorted((_raw(f, p) for p in points), key=f.sort_key)
    if not pts:
        raise ValueError("no points")
    r = max((f.raw_key(f.sub(x, y)) for i, x in enumerate(pts) for y in pts[i + 1 :]), default=_NEG_INF)
    return Ball(FieldElement(f, pts[0]), NormKey.from_raw(f.kind, r))


@dataclass
class SeparableReport:
    passed: bool
    balls: list
    failed_at: Optional[int] = None


def separable_check(A: FiniteSet, ordering: Sequence) -> SeparableReport:
    """Each prefix {a_1..a_j} must be exactly A ∩ (its enclosing ball)."""
    f = A.field
    _require_ultrametric(f)
    order = [_raw(f, a) for a in ordering]
    if sorted(order, key=f.sort_key) != list(A.raw):
        raise ValueError("ordering must be a permutation of A")
    balls = []
    r = _NEG_INF
    for j, x in enumerate(order):
        if j:
            r = max(r, max(f.raw_key(f.sub(x, y)) for y in order[:j]))
        center = min(order[: j + 1], key=f.sort_key)
        ball = Ball(FieldElement(f, center), NormKey.from_raw(f.kind, r))
        balls.append(ball)
        if any(ball.contains(FieldElement(f, y)) for y in order[j + 1 :]):
            return SeparableReport(False, balls, j + 1)
    return SeparableReport(True, balls)


def find_separable_ordering(A: FiniteSet) -> Optional[list[FieldElement]]:
    """An ordering witnessing separability, or None.

    Peels off the element that sits alone at the top split of the cluster tree.
    """
    f = A.field
    _require_ultrametric(f)
    rest = list(A.raw)
    tail = []
    while len(rest) > 2:
        R = max(f.raw_key(f.sub(x, y)) for i, x in enumerate(rest) for y in rest[i + 1 :])
        groups: dict = {}
        for x in rest:
            groups.setdefault(tuple(t for t in x if t[0] >= R), []).append(x)
        singles = [g[0] for g in groups.values() if len(g) == 1]
        if len(groups) != 2 or not singles:
            return None
        last = min(singles, key=f.sort_key)
        tail.append(last)
        rest.remove(last)
    out = sorted(rest, key=f.sort_key) + tail[::-1]
    return [FieldElement(f, x) for x in out]


def separable_extract(chain: AChain, q: Optional[int] = None) -> list[FieldElement]:
    """Strict-growth greedy from the innermost ball outward; kept order is separable."""
    if not chain.validate():
        raise ValueError("not a valid A-chain")
    f = chain.nn.A.field
    q = q or f.q
    kept = []
    r = _NEG_INF
    for c in chain.elements:
        if kept:
            new = max(r, max(f.raw_key(f.sub(c, y)) for y in kept))
            if new <= r:
                continue
            r = new
        kept.append(c)
    U = FiniteSet._from_raw(f, kept)
    if not separable_check(U, kept).passed:
        raise AssertionError("extracted set failed the separability check")
    if len(kept) < len(chain) // q:
        raise AssertionError("extracted set is smaller than |C|/q")
    return [FieldElement(f, x) for x in kept]


@dataclass
class SizeReport:
    name: str
    n: int
    lhs: Fraction
    rhs: Fraction
    passed: Optional[bool]
    constant: str = ""
    details: dict = field(default_factory=dict)

    @property
    def ratio(self):
        return None if not self.rhs else Fraction(self.lhs) / Fraction(self.rhs)


def lem1_verify(U: FiniteSet, n: int, m: int, cap: Optional[int] = None) -> SizeReport:
    """|nU - mU| against |U|^(n+m) for a separable U."""
    k = n + m
    if not 1 <= k <= 4:
        raise ValueError("need 1 <= n + m <= 4")
    if len(U) > 1 and find_separable_ordering(U) is None:
        raise ValueError("set is not separable")
    size = len(signed_sumset(U, n, m, cap))
    return SizeReport("lem1", len(U), Fraction(size), Fraction(len(U) ** k), None, "1", {"n": n, "m": m})


# --- coverage ------------------------------------------------------------------------


def covering(A: FiniteSet, point, nn: Optional[NearestNeighborData] = None) -> list[FieldElement]:
    """Elements a with point in B_A(a); for Laurent sets sorted by ball radius (a nested chain)."""
    nn = nn or nn_data(A)
    f = A.field
    x = _raw(f, point)
    hits = [(r, a) for a, r in zip(A.raw, nn.radii) if f.raw_key(f.sub(x, a)) <= r]
    hits.sort(key=lambda t: (t[0], f.sort_key(t[1])))
    return [FieldElement(f, a) for _, a in hits]


def coverage_count(A: FiniteSet, point, nn: Optional[NearestNeighborData] = None) -> int:
    return len(covering(A, point, nn))


def _gaussian_scale(*groups):
    return reduce(lcm, (c.denominator for g in groups for z in g for c in z), 1)


def _int_array(vals):
    arr = np.array(vals, dtype=object)
    if arr.size and max(abs(int(v)) for v in arr.ravel()) < 2**29:
        return arr.astype(np.int64)
    return arr


def gaussian_coverage(A: FiniteSet, points, nn: Optional[NearestNeighborData] = None) -> np.ndarray:
    """Coverage counts of many gaussian points at once."""
    if A.field.kind != GAUSSIAN_KIND:
        raise TypeError("gaussian_coverage needs a gaussian set")
    nn = nn or nn_data(A)
    pts = [_raw(A.field, p) for p in points]
    L = _gaussian_scale(A.raw, pts)
    ax = _int_array([int(a[0] * L) for a in A.raw])
    ay = _int_array([int(a[1] * L) for a in A.raw])
    rr = _int_array([int(r * L * L) for r in nn.radii])
    px = _int_array([int(p[0] * L) for p in pts])[:, None]
    py = _int_array([int(p[1] * L) for p in pts])[:, None]
    d = (px - ax[None, :]) ** 2 + (py - ay[None, :]) ** 2
    return (d <= rr[None, :]).sum(axis=1).astype(np.int64)


# --- theorem verifiers -----------------------------------------------------------


@dataclass
class GoodTripleReport:
    n: int
    sum_size: int
    product_size: int
    lhs: Fraction
    rhs: Fraction
    passed: bool
    triples: int
    thresholds: dict
    violations: dict
    psi_injective: bool
    max_coverage: int
    constant: str = "1/1568"

    @property
    def ratio(self):
        return Fraction(self.lhs) / self.rhs if self.rhs else None


def verify_thmC(A: FiniteSet, cap: Optional[int] = None, sample: int = 200_000, seed: int = 0) -> GoodTripleReport:
    """|A+A-A| |AA|^2 >= |A|^4 / 1568 with the good-triple count behind it."""
    if A.field.kind != GAUSSIAN_KIND:
        raise TypeError("verify_thmC needs a gaussian set")
    n = len(A)
    if n < 2:
        raise ValueError("need |A| >= 2")
    S = A.plus_plus_minus if cap is None else signed_sumset(A, 2, 1, cap)
    P = product_power(A, 2, cap)
    s, p = len(S), len(P)
    nn = nn_data(A)
    L = _gaussian_scale(A.raw, S.raw)
    # S scales by L, P by L^2; ball radii are squared moduli.
    ax = np.array([int(a[0] * L) for a in A.raw], dtype=object)
    ay = np.array([int(a[1] * L) for a in A.raw], dtype=object)
    rr = np.array([int(r * L * L) for r in nn.radii], dtype=object)
    sx = np.array([int(v[0] * L) for v in S.raw], dtype=object)
    sy = np.array([int(v[1] * L) for v in S.raw], dtype=object)
    plus_hits = ((sx[None, :] - ax[:, None]) ** 2 + (sy[None, :] - ay[:, None]) ** 2) <= rr[:, None]
    cnt_plus = plus_hits.sum(axis=1)
    cover_S = int(plus_hits.sum(axis=0).max())
    L2 = L * L
    qx = np.array([int(v[0] * L2) for v in P.raw], dtype=object)
    qy = np.array([int(v[1] * L2) for v in P.raw], dtype=object)
    # v in c*B(a, r)  <=>  |v - c a|^2 <= |c|^2 r
    cax = ax[:, None] * ax[None, :] - ay[:, None] * ay[None, :]  # index [c, a]
    cay = ax[:, None] * ay[None, :] + ay[:, None] * ax[None, :]
    cnorm = ax**2 + ay**2
    cnt_star = np.zeros((n, n), dtype=np.int64)  # [a, c]
    for c in range(n):
        d = (qx[None, :] - cax[c][:, None]) ** 2 + (qy[None, :] - cay[c][:, None]) ** 2
        cnt_star[:, c] = (d <= (cnorm[c] * rr)[:, None]).sum(axis=1)
    t_plus = Fraction(28 * s, n)
    t_star = Fraction(28 * p, n)
    ok_plus = np.array([Fraction(int(v)) <= t_plus for v in cnt_plus])
    ok_star = np.vectorize(lambda v: Fraction(int(v)) <= t_star)(cnt_star)
    f = A.field
    nbrs = [
        [j for j, b in enumerate(A.raw) if j != i and f.raw_key(f.sub(b, A.raw[i])) <= nn.radii[i]] for i in range(n)
    ]
    # Ψ3 forgets (a, b) when c = 0, so the multiplier ranges over nonzero c.
    zero = f.zero()
    multipliers = [c for c in range(n) if A.raw[c] != zero]
    triples = []
    for i in range(n):
        if not ok_plus[i]:
            continue
        for c in multipliers:
            if ok_star[i, c]:
                triples.extend((i, j, c) for j in nbrs[i])
    T = len(triples)
    if T > sample:
        rng = np.random.default_rng(seed)
        idx = rng.choice(T, size=sample, replace=False)
        checked = [triples[t] for t in sorted(idx)]
    else:
        checked = triples
    raw = A.raw
    images = {(f.sub(raw[a], raw[b]), f.mul(raw[c], raw[a]), f.mul(raw[c], raw[b])) for a, b, c in checked}
    injective = len(images) == len(checked)
    lhs = Fraction(s * p * p)
    rhs = Fraction(n**4, 1568)
    # Coverage <= 7 makes both column sums small, which forces |T| >= |A| * #multipliers / 2.
    sums_ok = int(cnt_plus.sum()) <= 7 * s and all(int(cnt_star[:, c].sum()) <= 7 * p for c in multipliers)
    passed = lhs >= rhs and 2 * T >= n * len(multipliers) and injective and cover_S <= 7 and sums_ok
    return GoodTripleReport(
        n=n,
        sum_size=s,
        product_size=p,
        lhs=lhs,
        rhs=rhs,
        passed=passed,
        triples=T,
        thresholds={"plus": t_plus, "star": t_star},
        violations={
            "plus": int((~ok_plus).sum()),
            "star": int((~ok_star[:, multipliers]).sum()),
            "coverage_sums": 0 if sums_ok else 1,
        },
        psi_injective=injective,
        max_coverage=cover_S,
    )


def verify_thmFF(A: FiniteSet, eps=0, cap: Optional[int] = None) -> SizeReport:
    """|A+A-A|^3 |AA|^4 against q^-2 |A|^(9-eps), plus chain statistics."""
    f = A.field
    if f.kind != LAURENT_KIND:
        raise TypeError("verify_thmFF needs a Laurent set")
    eps = Fraction(eps)
    n = len(A)
    s = len(A.plus_plus_minus if cap is None else signed_sumset(A, 2, 1, cap))
    p = len(product_power(A, 2, cap))
    lhs = Fraction(s**3 * p**4)
    q = f.q
    if eps.denominator == 1:
        rhs = Fraction(n ** (9 - int(eps)), q * q) if n else Fraction(0)
        ratio = lhs / rhs if rhs else None
    else:
        rhs = Fraction(math.exp((9 - float(eps)) * math.log(n)) / (q * q)) if n else Fraction(0)
        ratio = math.exp(
            3 * math.log(s) + 4 * math.log(p) + 2 * math.log(q) - (9 - float(eps)) * math.log(n)
        )
    details: dict = {"S": s, "P": p, "q": q, "eps": eps, "ratio": ratio}
    if n >= 2:
        forest = chain_forest(A)
        log_n = math.log2(n)
        details.update(
            max_depth=forest.max_depth,
            max_weak_depth=forest.max_weak_depth,
            chain_bound=(n**4 / (s * p * p * log_n**3)) if log_n > 0 else None,
            j0=forest.j0(),
            A_j0=len(forest.dyadic_classes()[forest.j0()]),
        )
    return SizeReport("thmFF", n, lhs, rhs, None, "q^-2", details)


def plunnecke_check(A: FiniteSet, k: int, cap: Optional[int] = None) -> SizeReport:
    """|kA - kA| next to |A+A-A|^k / |A|^(k-1); reported, not asserted."""
    if not 1 <= k <= 3:
        raise ValueError("k must be in 1..3")
    n = len(A)
    lhs = len(signed_sumset(A, k, k, cap))
    s = len(A.plus_plus_minus)
    rhs = Fraction(s**k, n ** (k - 1))
    return SizeReport("plunnecke", n, Fraction(lhs), rhs, None, "1", {"k": k, "S": s})
