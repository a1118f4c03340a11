"""Exact iterated-fold engines for signed sumsets and ratio sets.

Two representations are used for sets of integers:

* a Python int used as a bitset, when the value range of the result is small
  enough (integer families such as ``[N]`` and ``f([N])``);
* a plain ``set`` otherwise (geometric progressions, random subsets of huge
  ranges).

Both fold the base set in one summand at a time, additions first, and dedup
after every fold.  Exceeding ``cap`` raises :class:`ResourceLimitError`.
"""

from __future__ import annotations

import operator
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from .errors import ResourceLimitError

DEFAULT_CAP = 10_000_000
BITSET_MAX_BITS = 1 << 27


def _bits_to_offsets(bits: int) -> np.ndarray:
    if bits == 0:
        return np.empty(0, dtype=np.int64)
    nbytes = (bits.bit_length() + 7) // 8
    raw = np.frombuffer(bits.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.flatnonzero(np.unpackbits(raw, bitorder="little")).astype(np.int64)


def _bitset_fold(values: Sequence[int], n: int, m: int, cap: int) -> list[int]:
    lo = min(values)
    shifted = sorted({v - lo for v in values})
    top = shifted[-1]
    neg = [top - v for v in shifted]
    base = 0
    for v in shifted:
        base |= 1 << v

    def fold(cur, offsets):
        out = 0
        for off in offsets:
            out |= cur << off
        size = out.bit_count()
        if size > cap:
            raise ResourceLimitError(size, cap)
        return out

    if n > 0:
        cur = base
        for _ in range(n - 1):
            cur = fold(cur, shifted)
        for _ in range(m):
            cur = fold(cur, neg)
    else:
        cur = 0
        for v in neg:
            cur |= 1 << v
        for _ in range(m - 1):
            cur = fold(cur, neg)
    # value = offset + (n - m) * lo - m_neg * top, with each negative summand
    # stored as top - v.
    origin = (n - m) * lo - m * top
    return [o + origin for o in _bits_to_offsets(cur).tolist()]


def int_signed_sumset(values: Sequence[int], n: int, m: int, cap: int = DEFAULT_CAP) -> list[int]:
    """Sorted list of ``{a_1+...+a_n - b_1-...-b_m}`` over integer ``values``."""
    if n < 0 or m < 0 or n + m < 1:
        raise ValueError("need n, m >= 0 and n + m >= 1")
    values = list(values)
    if not values:
        return []
    span = (max(values) - min(values)) * (n + m)
    if span <= BITSET_MAX_BITS:
        return _bitset_fold(values, n, m, cap)
    return sorted(generic_signed_fold(values, n, m, operator.add, operator.sub, operator.neg, cap))


def int_product_power(values: Sequence[int], m: int, cap: int = DEFAULT_CAP) -> set[int]:
    if m < 1:
        raise ValueError("m must be >= 1")
    vals = list(set(values))
    if vals and max(abs(v) for v in vals) ** m < 2**62:
        return _int64_product_power(vals, m, cap)
    cur = set(vals)
    for _ in range(m - 1):
        nxt = set()
        for x in cur:
            for a in vals:
                nxt.add(x * a)
            if len(nxt) > cap:
                raise ResourceLimitError(len(nxt), cap)
        cur = nxt
    return cur


def _int64_product_power(vals: list[int], m: int, cap: int) -> set[int]:
    # every partial product is bounded by max|v|^m, so int64 cannot overflow
    base = np.array(sorted(vals), dtype=np.int64)
    rows = max(1, (1 << 20) // len(base))
    flush = 2 * cap + (1 << 20)
    cur = base
    for _ in range(m - 1):
        acc = np.empty(0, dtype=np.int64)
        pending, held = [], 0
        for i in range(0, len(cur), rows):
            chunk = np.unique(cur[i : i + rows, None] * base[None, :])
            pending.append(chunk)
            held += len(chunk)
            if held > flush:
                acc = np.unique(np.concatenate([acc] + pending))
                pending, held = [], len(acc)
                if len(acc) > cap:
                    raise ResourceLimitError(len(acc), cap)
        cur = np.unique(np.concatenate([acc] + pending))
        if len(cur) > cap:
            raise ResourceLimitError(len(cur), cap)
    return set(cur.tolist())


def generic_fold(values: Iterable, m: int, op, cap: int = DEFAULT_CAP) -> set:
    """m-fold combination ``{x_1 op x_2 op ... op x_m}`` of hashable values."""
    vals = list(set(values))
    cur = set(vals)
    for _ in range(m - 1):
        nxt = set()
        for x in cur:
            for a in vals:
                nxt.add(op(x, a))
            if len(nxt) > cap:
                raise ResourceLimitError(len(nxt), cap)
        cur = nxt
    return cur


def generic_signed_fold(values: Iterable, n: int, m: int, add, sub, neg, cap: int = DEFAULT_CAP) -> set:
    vals = list(set(values))
    if n > 0:
        cur = set(vals)
        steps = [add] * (n - 1) + [sub] * m
    else:
        cur = {neg(v) for v in vals}
        steps = [sub] * (m - 1)
    for op in steps:
        nxt = set()
        for x in cur:
            for a in vals:
                nxt.add(op(x, a))
            if len(nxt) > cap:
                raise ResourceLimitError(len(nxt), cap)
        cur = nxt
    return cur


def ratio_signed_product(values: Sequence[Fraction], n: int, m: int, cap: int = DEFAULT_CAP) -> list[Fraction]:
    """Sorted ``{x_1...x_n / (y_1...y_m)}`` over positive rationals."""
    if n < 0 or m < 0 or n + m < 1:
        raise ValueError("need n, m >= 0 and n + m >= 1")
    vals = sorted(set(Fraction(v) for v in values))
    if not vals:
        return []
    if any(v <= 0 for v in vals):
        raise ValueError("ratio sets need positive values")
    if all(v.denominator == 1 for v in vals):
        ints = [v.numerator for v in vals]
        if n > 0:
            nums = int_product_power(ints, n, cap)
            cur = {(x, 1) for x in nums}
            steps = m
        else:
            cur = {(1, x) for x in ints}
            steps = m - 1
        for _ in range(steps):
            nxt = set()
            for num, den in cur:
                for a in ints:
                    d = den * a
                    g = gcd(num, d)
                    nxt.add((num // g, d // g))
                if len(nxt) > cap:
                    raise ResourceLimitError(len(nxt), cap)
            cur = nxt
        return [Fraction(num, den) for num, den in _sort_ratios(cur)]
    return sorted(generic_signed_fold(vals, n, m, operator.mul, operator.truediv, _inverse, cap))


def _sort_ratios(pairs) -> list:
    # float order, then an exact adjacent check by cross-multiplication
    try:
        out = sorted(pairs, key=lambda p: p[0] / p[1])
    except OverflowError:
        return sorted(pairs, key=lambda p: Fraction(*p))
    for (a, b), (c, d) in zip(out, out[1:]):
        if a * d >= c * b:
            return sorted(pairs, key=lambda p: Fraction(*p))
    return out


def _inverse(x):
    return 1 / x
