"""Symbolic k-convex functions evaluated exactly into ordered value groups.

``log`` is never evaluated: its values live in the multiplicative group of
positive rationals, so ``log x + log y - log z`` is represented by ``x*y/z``
and comparisons of logs are comparisons of rationals.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from itertools import combinations
from math import lcm
from typing import Iterable, Optional, Sequence

from . import engine
from .errors import DomainError, ParseError
from .fields import RATIONAL_KIND, FieldElement
from .setops import FiniteSet


class ValueGroup:
    """A totally ordered abelian group of exact rationals."""

    def __init__(self, name: str, identity: Fraction):
        self.name = name
        self.identity = identity

    def __repr__(self):
        return f"ValueGroup({self.name})"

    def op(self, x, y):
        raise NotImplementedError

    def inv(self, x):
        raise NotImplementedError

    def sub(self, x, y):
        return self.op(x, self.inv(y))

    def power(self, x, n: int):
        raise NotImplementedError

    def signed_sumset(self, values: Iterable[Fraction], n: int, m: int, cap: int = engine.DEFAULT_CAP) -> list:
        """Ascending, deduplicated list of signed combinations."""
        raise NotImplementedError

    def format(self, x) -> str:
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class _Additive(ValueGroup):
    def op(self, x, y):
        return x + y

    def inv(self, x):
        return -x

    def power(self, x, n):
        return x * n

    def signed_sumset(self, values, n, m, cap=engine.DEFAULT_CAP):
        vals = [Fraction(v) for v in values]
        scale = reduce(lcm, (v.denominator for v in vals), 1)
        ints = [int(v * scale) for v in vals]
        return [Fraction(v, scale) for v in engine.int_signed_sumset(ints, n, m, cap)]


class _Multiplicative(ValueGroup):
    def op(self, x, y):
        return x * y

    def inv(self, x):
        return 1 / x

    def power(self, x, n):
        return x**n

    def signed_sumset(self, values, n, m, cap=engine.DEFAULT_CAP):
        return engine.ratio_signed_product(values, n, m, cap)


ADDITIVE = _Additive("additive", Fraction(0))
MULTIPLICATIVE = _Multiplicative("multiplicative", Fraction(1))


class ValueSet:
    """Sorted, deduplicated finite subset of a value group."""

    def __init__(self, group: ValueGroup, values: Iterable, cap: int = engine.DEFAULT_CAP):
        self.group = group
        self.values = tuple(sorted(set(Fraction(v) for v in values)))
        self.cap = cap

    @classmethod
    def _from_sorted(cls, group: ValueGroup, values, cap: int = engine.DEFAULT_CAP) -> "ValueSet":
        """Trusted constructor for Fractions already deduplicated and ascending."""
        obj = cls.__new__(cls)
        obj.group = group
        obj.values = tuple(values)
        obj.cap = cap
        return obj

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __contains__(self, x):
        i = bisect.bisect_left(self.values, x)
        return i < len(self.values) and self.values[i] == x

    def __eq__(self, other):
        if not isinstance(other, ValueSet):
            return NotImplemented
        return self.group is other.group and self.values == other.values

    def __repr__(self):
        return f"ValueSet({self.group.name}, {[self.group.format(v) for v in self.values[:8]]})"

    def min(self):
        return self.values[0]

    def max(self):
        return self.values[-1]

    def signed_sumset(self, n: int, m: int, cap: Optional[int] = None) -> "ValueSet":
        cap = self.cap if cap is None else cap
        return ValueSet._from_sorted(self.group, self.group.signed_sumset(self.values, n, m, cap), cap)

    @cached_property
    def plus_plus_minus(self) -> "ValueSet":
        return self.signed_sumset(2, 1)

    def count_in_interval(self, lo, hi) -> int:
        """|(X+X-X) ∩ (lo, hi]| in the group order."""
        if lo > hi:
            raise ValueError("interval bounds are out of order")
        s = self.plus_plus_minus.values
        return bisect.bisect_right(s, hi) - bisect.bisect_right(s, lo)

    def count_strictly_between(self, lo, hi) -> int:
        return bisect.bisect_left(self.values, hi) - bisect.bisect_right(self.values, lo)

    @cached_property
    def positive_differences(self) -> tuple:
        """Distinct group differences x - y above the identity, ascending."""
        diffs = self.signed_sumset(1, 1).values
        e = self.group.identity
        return tuple(d for d in diffs if d > e)


def _as_rational(x) -> Fraction:
    if isinstance(x, FieldElement):
        if x.field.kind != RATIONAL_KIND:
            raise TypeError("convex functions take rational arguments")
        return x.raw
    return Fraction(x)


class ConvexFn:
    """Base class; subclasses are immutable dataclasses."""

    group: ValueGroup = ADDITIVE

    def in_domain(self, x: Fraction) -> bool:
        raise NotImplementedError

    def _eval(self, x: Fraction) -> Fraction:
        raise NotImplementedError

    def __call__(self, x) -> Fraction:
        x = _as_rational(x)
        if not self.in_domain(x):
            raise DomainError(f"{x} is outside the domain of {self}")
        return self._eval(x)

    eval = __call__

    @property
    def convexity_order(self) -> Optional[int]:
        """Claimed k; ``None`` means every order."""
        raise NotImplementedError


@dataclass(frozen=True)
class ShiftedPower(ConvexFn):
    """(x + shift) ** exponent on x >= -shift."""

    exponent: int
    shift: Fraction = Fraction(0)

    def __post_init__(self):
        if int(self.exponent) != self.exponent or self.exponent < 1:
            raise ValueError("exponent must be an integer >= 1")
        object.__setattr__(self, "shift", Fraction(self.shift))

    def in_domain(self, x):
        return x >= -self.shift

    def _eval(self, x):
        return (x + self.shift) ** self.exponent

    @property
    def convexity_order(self):
        return self.exponent - 1

    def __str__(self):
        return f"pow({self.exponent}, {ADDITIVE.format(self.shift)})"


@dataclass(frozen=True)
class Log(ConvexFn):
    """log x on x > 0, valued in the multiplicative group (log x ↦ x)."""

    group = MULTIPLICATIVE

    def in_domain(self, x):
        return x > 0

    def _eval(self, x):
        return x

    @property
    def convexity_order(self):
        return None

    def __str__(self):
        return "log"


@dataclass(frozen=True)
class Reflect(ConvexFn):
    """F(x) = -f(-x): negates both argument and value."""

    inner: ConvexFn

    @property
    def group(self):
        return self.inner.group

    def in_domain(self, x):
        return self.inner.in_domain(-x)

    def _eval(self, x):
        return self.group.inv(self.inner._eval(-x))

    @property
    def convexity_order(self):
        return self.inner.convexity_order

    def __str__(self):
        return f"reflect({self.inner})"


@dataclass(frozen=True)
class Composite(ConvexFn):
    """constant ⊕ Δ_{d_r} ... Δ_{d_1} base, the functions g = f(a) + Δ_d f."""

    base: ConvexFn
    constant: Fraction
    deltas: tuple = field(default=())

    @property
    def group(self):
        return self.base.group

    def _points(self, x):
        """(sign, shifted point) pairs of the iterated difference expansion."""
        r = len(self.deltas)
        for size in range(r + 1):
            for subset in combinations(self.deltas, size):
                yield (1 if (r - size) % 2 == 0 else -1), x + sum(subset, Fraction(0))

    def in_domain(self, x):
        return all(self.base.in_domain(p) for _, p in self._points(x))

    def _eval(self, x):
        g = self.group
        acc = self.constant
        for sign, p in self._points(x):
            v = self.base._eval(p)
            acc = g.op(acc, v) if sign > 0 else g.sub(acc, v)
        return acc

    @property
    def convexity_order(self):
        k = self.base.convexity_order
        return None if k is None else k - len(self.deltas)

    def __str__(self):
        ds = ",".join(ADDITIVE.format(d) for d in self.deltas)
        return f"{self.group.format(self.constant)}+D[{ds}]{self.base}"


def delta_d(f: ConvexFn, d) -> Composite:
    """The d-derivative x ↦ f(x+d) ⊖ f(x); lowers the convexity order by one."""
    d = Fraction(d)
    if d <= 0:
        raise ValueError("d must be positive")
    if isinstance(f, Composite):
        return Composite(f.base, f.group.identity, f.deltas + (d,))
    return Composite(f, f.group.identity, (d,))


def shifted_by_constant(f: ConvexFn, constant) -> Composite:
    """constant ⊕ f, keeping any difference structure of f."""
    if isinstance(f, Composite):
        return Composite(f.base, f.group.op(Fraction(constant), f.constant), f.deltas)
    return Composite(f, Fraction(constant), ())


def apply_fn(f: ConvexFn, A) -> ValueSet:
    """f(A) as a set in f's value group."""
    if isinstance(A, FiniteSet):
        if A.field.kind != RATIONAL_KIND:
            raise TypeError("apply_fn needs a rational set")
        pts = A.raw
    else:
        pts = [_as_rational(x) for x in A]
    cap = A.cap if isinstance(A, FiniteSet) else engine.DEFAULT_CAP
    return ValueSet(f.group, (f(x) for x in pts), cap)


@dataclass(frozen=True)
class ConvexityReport:
    passed: bool
    k: int
    failed_order: Optional[int] = None
    at: Optional[Fraction] = None
    detail: str = ""


def discrete_k_convexity_check(
    f: ConvexFn,
    points,
    k: int,
    deltas: Sequence = (),
    mode: str = "increasing",
) -> ConvexityReport:
    """Check Δ_{d_j}∘...∘Δ_{d_1} f is strictly monotone on ``points``, j = 0..k.

    ``mode="increasing"`` demands strictly increasing at every order;
    ``mode="monotone"`` accepts either direction independently per order.
    """
    if len(deltas) != k:
        raise ValueError("need exactly k deltas")
    if mode not in ("increasing", "monotone"):
        raise ValueError(f"unknown mode {mode!r}")
    if isinstance(points, FiniteSet):
        pts = list(points.raw)
    else:
        pts = sorted({_as_rational(p) for p in points})
    h: ConvexFn = f
    for j in range(k + 1):
        if j > 0:
            h = delta_d(h, deltas[j - 1])
        vals = [h(x) for x in pts]
        steps = list(zip(vals, vals[1:]))
        up = all(a < b for a, b in steps)
        down = all(a > b for a, b in steps)
        if up or (mode == "monotone" and down):
            continue
        bad = next(i for i, (a, b) in enumerate(steps) if not a < b)
        return ConvexityReport(
            False, k, j, pts[bad], f"order-{j} difference not strictly increasing at {pts[bad]}"
        )
    return ConvexityReport(True, k)


_FN_RE = re.compile(r"pow\((\d+)(?:,([^)]*))?\)")


def parse_fn(text: str) -> ConvexFn:
    """Parse ``pow(p, c)``, ``pow(p)``, ``log`` and ``reflect(<fn>)``."""
    s = "".join(text.split())
    if s == "log":
        return Log()
    if s.startswith("reflect(") and s.endswith(")"):
        return Reflect(parse_fn(s[len("reflect(") : -1]))
    m = _FN_RE.fullmatch(s)
    if m:
        shift = Fraction(0)
        if m.group(2) is not None:
            try:
                shift = Fraction(m.group(2))
            except ValueError:
                raise ParseError("bad shift", text, m.start(2)) from None
        return ShiftedPower(int(m.group(1)), shift)
    raise ParseError("expected pow(p, c), log or reflect(...)", text, 0)
