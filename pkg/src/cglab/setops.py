"""Canonical finite sets and the sumset / product / gap-counting machinery."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from math import lcm
from pathlib import Path
from typing import Iterable, Optional

from . import engine
from .errors import FieldMismatchError, ParseError
from .fields import (
    GAUSSIAN_KIND,
    RATIONAL,
    RATIONAL_KIND,
    FieldDescriptor,
    FieldElement,
    NormKey,
    parse_field_header,
)


class FiniteSet:
    """A deduplicated, canonically ordered finite set over one field.

    ``raw`` holds the raw payloads sorted by the field's canonical order
    (the usual order for rationals).
    """

    def __init__(self, field: FieldDescriptor, elements: Iterable = (), *, cap: int = engine.DEFAULT_CAP):
        self.field = field
        self.cap = cap
        raw = set()
        for x in elements:
            if isinstance(x, FieldElement):
                if x.field != field:
                    raise FieldMismatchError(f"{x.field} element in a {field} set")
                raw.add(x.raw)
            else:
                raw.add(field.coerce(x))
        self.raw = tuple(sorted(raw, key=field.sort_key))
        self._members = frozenset(raw)

    @classmethod
    def _from_raw(cls, field, raw_iter, cap=engine.DEFAULT_CAP):
        obj = cls.__new__(cls)
        obj.field = field
        obj.cap = cap
        members = frozenset(raw_iter)
        obj.raw = tuple(sorted(members, key=field.sort_key))
        obj._members = members
        return obj

    @classmethod
    def _from_sorted(cls, field, raw_sorted, cap=engine.DEFAULT_CAP):
        """Trusted constructor for payloads already deduplicated and in canonical order."""
        obj = cls.__new__(cls)
        obj.field = field
        obj.cap = cap
        obj.raw = tuple(raw_sorted)
        obj._members = frozenset(obj.raw)
        return obj

    def __len__(self):
        return len(self.raw)

    def __iter__(self):
        f = self.field
        return (FieldElement(f, x) for x in self.raw)

    def __getitem__(self, i) -> FieldElement:
        return FieldElement(self.field, self.raw[i])

    def __contains__(self, x):
        if isinstance(x, FieldElement):
            return x.field == self.field and x.raw in self._members
        try:
            return self.field.coerce(x) in self._members
        except (TypeError, ParseError):
            return False

    def contains_raw(self, x) -> bool:
        return x in self._members

    def __eq__(self, other):
        if not isinstance(other, FiniteSet):
            return NotImplemented
        return self.field == other.field and self._members == other._members

    def __hash__(self):
        return hash((self.field, self._members))

    def __repr__(self):
        shown = ", ".join(self.field.format_raw(x) for x in self.raw[:8])
        more = ", ..." if len(self.raw) > 8 else ""
        return f"FiniteSet({self.field}, {{{shown}{more}}})"

    def elements(self) -> list[FieldElement]:
        return list(self)

    def to_strings(self) -> list[str]:
        return [self.field.format_raw(x) for x in self.raw]

    def with_cap(self, cap: int) -> "FiniteSet":
        return FiniteSet._from_raw(self.field, self.raw, cap)

    @cached_property
    def plus_plus_minus(self) -> "FiniteSet":
        """A+A-A, computed once and shared."""
        return signed_sumset(self, 2, 1)

    @cached_property
    def _ppm_sorted(self):
        return list(self.plus_plus_minus.raw)

    @cached_property
    def differences(self) -> "DifferenceList":
        return positive_differences(self)


def make_set(field: FieldDescriptor, elements: Iterable) -> FiniteSet:
    return FiniteSet(field, elements)


def rational_set(values: Iterable) -> FiniteSet:
    return FiniteSet(RATIONAL, values)


def _same_field(*sets):
    f = sets[0].field
    for s in sets[1:]:
        if s.field != f:
            raise FieldMismatchError(f"sets over {f} and {s.field}")
    return f


# --- integer encodings used by the fold engine --------------------------------


def _rational_scale(raw):
    return reduce(lcm, (x.denominator for x in raw), 1)


def _gaussian_pack(raw, summands):
    """Encode gaussian rationals as ints so that signed sums stay decodable."""
    scale = reduce(lcm, (c.denominator for z in raw for c in z), 1)
    pairs = [(int(z[0] * scale), int(z[1] * scale)) for z in raw]
    bound = summands * max(abs(b) for _, b in pairs)
    width = 2 * bound + 1
    packed = [a * width + b for a, b in pairs]

    def unpack(v):
        b = (v + bound) % width - bound
        a = (v - b) // width
        return (Fraction(a, scale), Fraction(b, scale))

    return packed, unpack


def signed_sumset(A: FiniteSet, n: int, m: int, cap: Optional[int] = None) -> FiniteSet:
    """nA - mA as an exact set."""
    if n < 0 or m < 0 or n + m < 1:
        raise ValueError("need n, m >= 0 and n + m >= 1")
    cap = A.cap if cap is None else cap
    f = A.field
    if not A.raw:
        return FiniteSet._from_raw(f, (), cap)
    if f.kind == RATIONAL_KIND:
        scale = _rational_scale(A.raw)
        ints = [int(x * scale) for x in A.raw]
        out = engine.int_signed_sumset(ints, n, m, cap)
        return FiniteSet._from_sorted(f, (Fraction(v, scale) for v in out), cap)
    if f.kind == GAUSSIAN_KIND:
        packed, unpack = _gaussian_pack(A.raw, n + m)
        out = engine.int_signed_sumset(packed, n, m, cap)
        return FiniteSet._from_raw(f, (unpack(v) for v in out), cap)
    out = engine.generic_signed_fold(A.raw, n, m, f.add, f.sub, f.neg, cap)
    return FiniteSet._from_raw(f, out, cap)


def sumset(A: FiniteSet, B: FiniteSet) -> FiniteSet:
    f = _same_field(A, B)
    return FiniteSet._from_raw(f, {f.add(x, y) for x in A.raw for y in B.raw}, A.cap)


def difference_set(A: FiniteSet, B: FiniteSet) -> FiniteSet:
    f = _same_field(A, B)
    return FiniteSet._from_raw(f, {f.sub(x, y) for x in A.raw for y in B.raw}, A.cap)


def product_power(A: FiniteSet, m: int, cap: Optional[int] = None) -> FiniteSet:
    """The m-fold product set A^(m)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    cap = A.cap if cap is None else cap
    f = A.field
    if f.kind == RATIONAL_KIND:
        scale = _rational_scale(A.raw)
        ints = [int(x * scale) for x in A.raw]
        out = sorted(engine.int_product_power(ints, m, cap))
        den = scale**m
        return FiniteSet._from_sorted(f, (Fraction(v, den) for v in out), cap)
    return FiniteSet._from_raw(f, engine.generic_fold(A.raw, m, f.mul, cap), cap)


# --- differences --------------------------------------------------------------


@dataclass(frozen=True)
class DifferenceList:
    """Distinct nonzero differences d_1, d_2, ... with non-decreasing norm.

    For rationals these are the positive elements of A - A in increasing
    order.  Ties in norm (gaussian/laurent) are ordered canonically; the
    Z-th key is what gap-lemma comparisons use.
    """

    field: FieldDescriptor
    raw: tuple
    raw_keys: tuple

    def __len__(self):
        return len(self.raw)

    def element(self, z: int) -> FieldElement:
        """d_z, 1-indexed."""
        return FieldElement(self.field, self.raw[z - 1])

    def key(self, z: int) -> NormKey:
        return NormKey.from_raw(self.field.kind, self.raw_keys[z - 1])

    @property
    def keys(self) -> list[NormKey]:
        return [NormKey.from_raw(self.field.kind, k) for k in self.raw_keys]

    def elements(self) -> list[FieldElement]:
        return [FieldElement(self.field, x) for x in self.raw]


def positive_differences(A: FiniteSet) -> DifferenceList:
    if len(A) < 2:
        raise ValueError("positive_differences needs at least two elements")
    f = A.field
    diffs = signed_sumset(A, 1, 1)
    if f.kind == RATIONAL_KIND:
        pos = tuple(x for x in diffs.raw if x > 0)
        return DifferenceList(f, pos, pos)
    nz = [x for x in diffs.raw if x != f.zero()]
    nz.sort(key=lambda x: (f.raw_key(x), f.sort_key(x)))
    return DifferenceList(f, tuple(nz), tuple(f.raw_key(x) for x in nz))


def min_gap(A: FiniteSet):
    """Smallest positive difference d_0 = b - b' and its witness (b, b')."""
    if A.field.kind != RATIONAL_KIND:
        raise TypeError("min_gap is defined for rational sets")
    if len(A) < 2:
        raise ValueError("min_gap needs at least two elements")
    best = None
    for lo, hi in zip(A.raw, A.raw[1:]):
        gap = hi - lo
        if best is None or gap < best[0]:
            best = (gap, hi, lo)
    d0, b, b_prime = best
    f = A.field
    return FieldElement(f, d0), (FieldElement(f, b), FieldElement(f, b_prime))


# --- gap counting -------------------------------------------------------------


def _raw_of(A, x):
    if isinstance(x, FieldElement):
        if x.field != A.field:
            raise FieldMismatchError("element and set are over different fields")
        return x.raw
    return A.field.coerce(x)


def count_in_interval(A: FiniteSet, lo, hi) -> int:
    """|(A+A-A) ∩ (lo, hi]| for a rational set."""
    if A.field.kind != RATIONAL_KIND:
        raise TypeError("count_in_interval is defined for rational sets")
    lo, hi = _raw_of(A, lo), _raw_of(A, hi)
    if lo > hi:
        raise ValueError("interval bounds are out of order")
    s = A._ppm_sorted
    return bisect.bisect_right(s, hi) - bisect.bisect_right(s, lo)


def count_in_ball(A: FiniteSet, center, radius: NormKey) -> int:
    """|(A+A-A) ∩ B(center, radius)|."""
    f = A.field
    c = _raw_of(A, center)
    if radius.kind != f.kind:
        raise FieldMismatchError("radius key is for a different field kind")
    r = radius.to_raw()
    return sum(1 for x in A.plus_plus_minus.raw if f.raw_key(f.sub(x, c)) <= r)


@dataclass(frozen=True)
class GapLemmaReport:
    Z: int
    d_Z: Optional[FieldElement]
    distance_key: NormKey
    passed: bool


def gap_lemma_check(A: FiniteSet, a, a_prime) -> GapLemmaReport:
    """Check that a - a' is no larger than the Z-th smallest difference.

    Z is the number of elements of A+A-A in (a', a] (rational) or in the
    closed ball B(a, ||a - a'||) (normed fields).
    """
    f = A.field
    x, y = _raw_of(A, a), _raw_of(A, a_prime)
    if x not in A._members or y not in A._members:
        raise ValueError("both points must belong to A")
    if x == y:
        raise ValueError("the two points must differ")
    diff = f.sub(x, y)
    if f.kind == RATIONAL_KIND:
        if not y < x:
            raise ValueError("rational gap lemma needs a' < a")
        Z = count_in_interval(A, y, x)
    else:
        Z = count_in_ball(A, x, f.key(diff))
    D = A.differences
    dist = f.key(diff)
    if Z > len(D):
        # d_Z is past the end of D: every difference qualifies.
        return GapLemmaReport(Z, None, dist, True)
    dz_key = D.raw_keys[Z - 1]
    return GapLemmaReport(Z, D.element(Z), dist, f.raw_key(diff) <= dz_key)


def gap_lemma_violations(A: FiniteSet) -> list[tuple[FieldElement, FieldElement]]:
    """Every ordered pair (a, a') for which the gap lemma fails (should be none).

    Uses per-center sorted distance profiles instead of one ball scan per pair.
    """
    f = A.field
    D = A.differences if len(A) >= 2 else None
    bad = []
    if D is None:
        return bad
    ppm = A._ppm_sorted
    for x in A.raw:
        if f.kind == RATIONAL_KIND:
            pairs = [(y, x) for y in A.raw if y < x]
            for lo, hi in pairs:
                Z = bisect.bisect_right(ppm, hi) - bisect.bisect_right(ppm, lo)
                if Z <= len(D) and hi - lo > D.raw_keys[Z - 1]:
                    bad.append((FieldElement(f, hi), FieldElement(f, lo)))
            continue
        profile = sorted(f.raw_key(f.sub(v, x)) for v in ppm)
        for y in A.raw:
            if y == x:
                continue
            dist = f.raw_key(f.sub(x, y))
            Z = bisect.bisect_right(profile, dist)
            if Z <= len(D) and dist > D.raw_keys[Z - 1]:
                bad.append((FieldElement(f, x), FieldElement(f, y)))
    return bad


# --- plumbing -----------------------------------------------------------------


def union(A: FiniteSet, B: FiniteSet) -> FiniteSet:
    f = _same_field(A, B)
    return FiniteSet._from_raw(f, A._members | B._members, A.cap)


def intersect(A: FiniteSet, B: FiniteSet) -> FiniteSet:
    f = _same_field(A, B)
    return FiniteSet._from_raw(f, A._members & B._members, A.cap)


def translate(A: FiniteSet, c) -> FiniteSet:
    f = A.field
    c = _raw_of(A, c)
    return FiniteSet._from_raw(f, (f.add(x, c) for x in A.raw), A.cap)


def dilate(A: FiniteSet, lam) -> FiniteSet:
    f = A.field
    lam = _raw_of(A, lam)
    if lam == f.zero():
        raise ValueError("dilation factor must be nonzero")
    return FiniteSet._from_raw(f, (f.mul(lam, x) for x in A.raw), A.cap)


def read_set_file(path) -> FiniteSet:
    """Read a set file: ``field: ...`` header, one element per line, ``#`` comments."""
    text = Path(path).read_text(encoding="utf-8")
    field = None
    elements = []
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if field is None:
            key, sep, value = body.partition(":")
            if not sep or key.strip().lower() != "field":
                raise ParseError(f"line {lineno}: expected 'field: <kind>' header", body, 0)
            field = parse_field_header(value)
            continue
        try:
            elements.append(field.parse_raw(body))
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
    if field is None:
        raise ParseError("set file has no field header")
    return FiniteSet._from_raw(field, elements)


def format_set_file(A: FiniteSet) -> str:
    lines = [f"field: {A.field.header()}"]
    lines.extend(A.to_strings())
    return "\n".join(lines) + "\n"


def write_set_file(A: FiniteSet, path) -> None:
    Path(path).write_text(format_set_file(A), encoding="utf-8")


__all__ = [
    "DifferenceList",
    "FiniteSet",
    "GapLemmaReport",
    "count_in_ball",
    "count_in_interval",
    "difference_set",
    "dilate",
    "format_set_file",
    "gap_lemma_check",
    "gap_lemma_violations",
    "intersect",
    "make_set",
    "min_gap",
    "positive_differences",
    "product_power",
    "rational_set",
    "read_set_file",
    "signed_sumset",
    "sumset",
    "translate",
    "union",
    "write_set_file",
]
