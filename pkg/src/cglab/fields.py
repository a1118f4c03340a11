"""Exact arithmetic in the three normed ground fields.

Every element carries its field descriptor and a raw payload:

* ``rational``  -- a :class:`fractions.Fraction`.
* ``gaussian``  -- a pair ``(re, im)`` of Fractions.
* ``laurent``   -- a tuple of ``(degree, coefficient)`` pairs, degrees strictly
  decreasing, coefficients in ``1..q-1``.  Zero is the empty tuple.

Bulk algorithms (sumsets, chains) work directly on raw payloads through the
descriptor's methods; :class:`FieldElement` is the public, operator-friendly
wrapper.

Norm keys are exact and order-isomorphic to the true norm: ``|x|`` for
rationals, the squared modulus for Gaussian rationals, and the degree for
Laurent polynomials (``||x|| = q**deg x``), with a distinguished bottom key
for zero.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Any

from .errors import FieldMismatchError, InexactDivisionError, ParseError

RATIONAL_KIND = "rational"
GAUSSIAN_KIND = "gaussian"
LAURENT_KIND = "laurent"

# Comparison-only stand-in for the degree of zero inside raw Laurent keys.
# It never leaks into public NormKey values (those use ``None``).
_NEG_INF = float("-inf")


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@total_ordering
@dataclass(frozen=True)
class NormKey:
    """Comparable stand-in for a norm value.

    ``value`` is a nonnegative Fraction for rational/gaussian keys, and an int
    degree (or ``None`` for the bottom key) for laurent keys.
    """

    kind: str
    value: Any

    @property
    def is_bottom(self) -> bool:
        if self.kind == LAURENT_KIND:
            return self.value is None
        return self.value == 0

    def _cmp_value(self):
        if self.kind == LAURENT_KIND:
            return _NEG_INF if self.value is None else self.value
        return self.value

    def _check(self, other):
        if not isinstance(other, NormKey):
            return NotImplemented
        if other.kind != self.kind:
            raise FieldMismatchError(f"cannot compare {self.kind} and {other.kind} norm keys")
        return None

    def __lt__(self, other):
        bad = self._check(other)
        if bad is NotImplemented:
            return bad
        return self._cmp_value() < other._cmp_value()

    def __eq__(self, other):
        if not isinstance(other, NormKey):
            return NotImplemented
        return self.kind == other.kind and self._cmp_value() == other._cmp_value()

    def __hash__(self):
        return hash((self.kind, self._cmp_value()))

    def __str__(self):
        if self.kind == LAURENT_KIND:
            return "bottom" if self.value is None else f"deg {self.value}"
        return str(self.value)

    @classmethod
    def from_raw(cls, kind, raw):
        if kind == LAURENT_KIND and raw == _NEG_INF:
            return cls(kind, None)
        return cls(kind, raw)

    def to_raw(self):
        return self._cmp_value()


def _parse_fraction(text: str, full: str, offset: int) -> Fraction:
    m = re.fullmatch(r"(\d+)(?:/(\d+))?", text)
    if not m:
        raise ParseError("malformed number", full, offset)
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ParseError("zero denominator", full, offset + text.index("/") + 1)
    return Fraction(int(m.group(1)), den)


def _format_fraction(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class FieldDescriptor:
    """Common interface of the three concrete fields.

    Subclasses are frozen dataclasses, so two descriptors compare equal
    exactly when they describe the same field.
    """

    kind: str = ""
    is_ultrametric = False

    # raw-payload arithmetic -------------------------------------------------
    def zero(self):
        raise NotImplementedError

    def one(self):
        raise NotImplementedError

    def add(self, x, y):
        raise NotImplementedError

    def sub(self, x, y):
        raise NotImplementedError

    def neg(self, x):
        raise NotImplementedError

    def mul(self, x, y):
        raise NotImplementedError

    def div(self, x, y):
        raise NotImplementedError

    def raw_key(self, x):
        """Raw comparable key; see :class:`NormKey`."""
        raise NotImplementedError

    def sort_key(self, x):
        """Canonical storage order (not a field order for gaussian/laurent)."""
        return x

    def coerce(self, value):
        """Turn ints, Fractions, strings or raw payloads into a raw payload."""
        raise NotImplementedError

    def parse_raw(self, text: str):
        raise NotImplementedError

    def format_raw(self, x) -> str:
        raise NotImplementedError

    # conveniences -----------------------------------------------------------
    def key(self, x) -> NormKey:
        return NormKey.from_raw(self.kind, self.raw_key(x))

    def element(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            if value.field != self:
                raise FieldMismatchError(f"{value.field} element given where {self} expected")
            return value
        return FieldElement(self, self.coerce(value))

    def bottom_key(self) -> NormKey:
        return self.key(self.zero())

    def key_of(self, value) -> NormKey:
        """Build a NormKey of this field from a bare value (degree or squared norm)."""
        if self.kind == LAURENT_KIND:
            return NormKey(self.kind, None if value is None else int(value))
        return NormKey(self.kind, Fraction(value))

    def header(self) -> str:
        return self.kind


@dataclass(frozen=True)
class RationalField(FieldDescriptor):
    kind = RATIONAL_KIND

    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def add(self, x, y):
        return x + y

    def sub(self, x, y):
        return x - y

    def neg(self, x):
        return -x

    def mul(self, x, y):
        return x * y

    def div(self, x, y):
        if y == 0:
            raise ZeroDivisionError("division by zero")
        return x / y

    def raw_key(self, x):
        return abs(x)

    def coerce(self, value):
        if isinstance(value, str):
            return self.parse_raw(value)
        if isinstance(value, (int, Fraction)):
            return Fraction(value)
        raise TypeError(f"cannot make a rational from {value!r}")

    def parse_raw(self, text):
        s = "".join(text.split())
        if not s:
            raise ParseError("empty rational", text, 0)
        sign = 1
        body, off = s, 0
        if s[0] in "+-":
            sign = -1 if s[0] == "-" else 1
            body, off = s[1:], 1
        return sign * _parse_fraction(body, s, off)

    def format_raw(self, x):
        return _format_fraction(x)

    def __str__(self):
        return "rational"


@dataclass(frozen=True)
class GaussianField(FieldDescriptor):
    kind = GAUSSIAN_KIND

    def zero(self):
        return (Fraction(0), Fraction(0))

    def one(self):
        return (Fraction(1), Fraction(0))

    def add(self, x, y):
        return (x[0] + y[0], x[1] + y[1])

    def sub(self, x, y):
        return (x[0] - y[0], x[1] - y[1])

    def neg(self, x):
        return (-x[0], -x[1])

    def mul(self, x, y):
        a, b = x
        c, d = y
        return (a * c - b * d, a * d + b * c)

    def div(self, x, y):
        c, d = y
        n = c * c + d * d
        if n == 0:
            raise ZeroDivisionError("division by zero")
        a, b = x
        return ((a * c + b * d) / n, (b * c - a * d) / n)

    def raw_key(self, x):
        return x[0] * x[0] + x[1] * x[1]

    def coerce(self, value):
        if isinstance(value, str):
            return self.parse_raw(value)
        if isinstance(value, (int, Fraction)):
            return (Fraction(value), Fraction(0))
        if isinstance(value, complex):
            raise TypeError("floating complex values are not exact; pass a (re, im) pair")
        if isinstance(value, tuple) and len(value) == 2:
            return (Fraction(value[0]), Fraction(value[1]))
        raise TypeError(f"cannot make a gaussian rational from {value!r}")

    def parse_raw(self, text):
        s = "".join(text.split())
        if not s:
            raise ParseError("empty gaussian rational", text, 0)
        re_part = Fraction(0)
        im_part = Fraction(0)
        seen_re = seen_im = False
        pos = 0
        term = re.compile(r"([+-]?)(\d+(?:/\d+)?)?(i?)")
        while pos < len(s):
            m = term.match(s, pos)
            if m is None or m.end() == pos or (m.group(2) is None and not m.group(3)):
                raise ParseError("unexpected character", s, pos)
            if pos > 0 and not m.group(1):
                raise ParseError("expected '+' or '-'", s, pos)
            sign = -1 if m.group(1) == "-" else 1
            num_start = pos + len(m.group(1))
            if m.group(3):
                if seen_im:
                    raise ParseError("duplicate imaginary part", s, pos)
                coef = _parse_fraction(m.group(2), s, num_start) if m.group(2) else Fraction(1)
                im_part = sign * coef
                seen_im = True
            else:
                if seen_re or seen_im:
                    raise ParseError("real part must come first and only once", s, pos)
                re_part = sign * _parse_fraction(m.group(2), s, num_start)
                seen_re = True
            pos = m.end()
        return (re_part, im_part)

    def format_raw(self, x):
        a, b = x
        if b == 0:
            return _format_fraction(a)
        if abs(b) == 1:
            imag = "i"
        else:
            imag = _format_fraction(abs(b)) + "i"
        if a == 0:
            return imag if b > 0 else "-" + imag
        return _format_fraction(a) + ("+" if b > 0 else "-") + imag

    def __str__(self):
        return "gaussian"


@dataclass(frozen=True)
class LaurentField(FieldDescriptor):
    """Finite-support Laurent series over F_q, q prime.

    Division truncates the quotient below ``truncation_floor``; it is only
    allowed to be inexact when ``truncated_division`` is set.
    """

    q: int = 2
    truncation_floor: int = -64
    truncated_division: bool = False
    kind = LAURENT_KIND
    is_ultrametric = True

    def __post_init__(self):
        if not is_prime(self.q):
            raise ValueError(f"q must be prime, got {self.q}")
        if self.truncation_floor > 0:
            raise ValueError("truncation_floor must be <= 0")

    def zero(self):
        return ()

    def one(self):
        return ((0, 1),)

    @staticmethod
    def _pack(d):
        return tuple(sorted(((e, c) for e, c in d.items() if c), reverse=True))

    def add(self, x, y):
        q = self.q
        d = dict(x)
        for e, c in y:
            d[e] = (d.get(e, 0) + c) % q
        return self._pack(d)

    def neg(self, x):
        q = self.q
        return tuple((e, (-c) % q) for e, c in x)

    def sub(self, x, y):
        return self.add(x, self.neg(y))

    def mul(self, x, y):
        q = self.q
        d = {}
        for e1, c1 in x:
            for e2, c2 in y:
                e = e1 + e2
                d[e] = (d.get(e, 0) + c1 * c2) % q
        return self._pack(d)

    def divmod_truncated(self, x, y):
        """Long division in t^-1; returns (quotient, exact)."""
        if not y:
            raise ZeroDivisionError("division by zero")
        q = self.q
        ey, cy = y[0]
        inv = pow(cy, -1, q)
        rem = dict(x)
        quot = {}
        while True:
            live = [e for e, c in rem.items() if c]
            if not live:
                break
            top = max(live)
            shift = top - ey
            if shift < self.truncation_floor:
                break
            c = rem[top] * inv % q
            quot[shift] = c
            for e2, c2 in y:
                e = e2 + shift
                rem[e] = (rem.get(e, 0) - c * c2) % q
        exact = not any(rem.values())
        return self._pack(quot), exact

    def div(self, x, y):
        quot, exact = self.divmod_truncated(x, y)
        if not exact and not self.truncated_division:
            raise InexactDivisionError(
                f"{self.format_raw(x)} / {self.format_raw(y)} is not a Laurent polynomial"
            )
        return quot

    def raw_key(self, x):
        return x[0][0] if x else _NEG_INF

    def coerce(self, value):
        if isinstance(value, str):
            return self.parse_raw(value)
        if isinstance(value, int):
            c = value % self.q
            return ((0, c),) if c else ()
        if isinstance(value, dict):
            return self._pack({e: c % self.q for e, c in value.items()})
        if isinstance(value, tuple):
            return self._pack({e: c % self.q for e, c in value})
        raise TypeError(f"cannot make a Laurent element from {value!r}")

    def monomial(self, coef: int, degree: int):
        c = coef % self.q
        return ((degree, c),) if c else ()

    def _reduce_coef(self, value: Fraction, text, pos):
        if value.denominator % self.q == 0:
            raise ParseError(f"coefficient not reducible mod {self.q}", text, pos)
        return value.numerator * pow(value.denominator, -1, self.q) % self.q

    def parse_raw(self, text):
        s = "".join(text.split())
        if not s:
            raise ParseError("empty Laurent element", text, 0)
        term = re.compile(r"([+-]?)(?:(\d+(?:/\d+)?)(?:\*(t)(?:\^(-?\d+))?)?|(t)(?:\^(-?\d+))?)")
        d = {}
        pos = 0
        while pos < len(s):
            m = term.match(s, pos)
            if m is None or m.end() == pos or (m.group(2) is None and m.group(5) is None):
                raise ParseError("unexpected character", s, pos)
            if pos > 0 and not m.group(1):
                raise ParseError("expected '+' or '-'", s, pos)
            sign = -1 if m.group(1) == "-" else 1
            num_start = pos + len(m.group(1))
            if m.group(2) is not None:
                coef = _parse_fraction(m.group(2), s, num_start)
                if m.group(3):
                    exp = int(m.group(4)) if m.group(4) is not None else 1
                else:
                    exp = 0
            else:
                coef = Fraction(1)
                exp = int(m.group(6)) if m.group(6) is not None else 1
            c = self._reduce_coef(sign * coef, s, num_start)
            d[exp] = (d.get(exp, 0) + c) % self.q
            pos = m.end()
        return self._pack(d)

    def format_raw(self, x):
        if not x:
            return "0"
        parts = []
        for e, c in x:
            if e == 0:
                parts.append(str(c))
                continue
            mono = "t" if e == 1 else f"t^{e}"
            parts.append(mono if c == 1 else f"{c}*{mono}")
        return "+".join(parts)

    def header(self):
        return f"laurent q={self.q}"

    def __str__(self):
        return f"laurent(q={self.q})"


RATIONAL = RationalField()
GAUSSIAN = GaussianField()


def laurent(q: int, truncation_floor: int = -64, truncated_division: bool = False) -> LaurentField:
    return LaurentField(q, truncation_floor, truncated_division)


def parse_field_header(text: str) -> FieldDescriptor:
    """Parse ``rational``, ``gaussian`` or ``laurent q=<p>``."""
    s = text.strip().lower()
    if s == RATIONAL_KIND:
        return RATIONAL
    if s == GAUSSIAN_KIND:
        return GAUSSIAN
    m = re.fullmatch(r"laurent\s+q\s*=\s*(\d+)", s)
    if m:
        return laurent(int(m.group(1)))
    raise ParseError("unknown field", text, 0)


class FieldElement:
    """An immutable element of one of the normed fields."""

    __slots__ = ("field", "raw")

    def __init__(self, field: FieldDescriptor, raw):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "raw", raw)

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    def _other(self, other):
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatchError(f"cannot combine {self.field} and {other.field} elements")
            return other.raw
        if isinstance(other, (int, Fraction)):
            return self.field.coerce(other)
        return NotImplemented

    def _binary(op):
        def method(self, other):
            o = self._other(other)
            if o is NotImplemented:
                return o
            return FieldElement(self.field, getattr(self.field, op)(self.raw, o))

        def rmethod(self, other):
            o = self._other(other)
            if o is NotImplemented:
                return o
            return FieldElement(self.field, getattr(self.field, op)(o, self.raw))

        return method, rmethod

    __add__, __radd__ = _binary("add")
    __sub__, __rsub__ = _binary("sub")
    __mul__, __rmul__ = _binary("mul")
    __truediv__, __rtruediv__ = _binary("div")
    del _binary

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.raw))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.raw == other.raw
        if isinstance(other, (int, Fraction)):
            return self.raw == self.field.coerce(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.field.kind, self.raw))

    def __bool__(self):
        return self.raw != self.field.zero()

    def norm_key(self) -> NormKey:
        return self.field.key(self.raw)

    def __str__(self):
        return self.field.format_raw(self.raw)

    def __repr__(self):
        return f"FieldElement({str(self)!r}, {self.field})"


def arith(x: FieldElement, y: FieldElement, op: str) -> FieldElement:
    """Apply ``op`` in {'+', '-', '*', '/'} (also '×', '÷', '−')."""
    ops = {"+": "add", "-": "sub", "−": "sub", "*": "mul", "×": "mul", "/": "div", "÷": "div"}
    if op not in ops:
        raise ValueError(f"unknown operation {op!r}")
    if x.field != y.field:
        raise FieldMismatchError(f"cannot combine {x.field} and {y.field} elements")
    return FieldElement(x.field, getattr(x.field, ops[op])(x.raw, y.raw))


def laurent_divide(x: FieldElement, y: FieldElement):
    """Truncated Laurent division returning ``(quotient, exact)``."""
    if x.field != y.field:
        raise FieldMismatchError("cannot divide elements of different fields")
    if x.field.kind != LAURENT_KIND:
        raise TypeError("laurent_divide needs Laurent elements")
    quot, exact = x.field.divmod_truncated(x.raw, y.raw)
    return FieldElement(x.field, quot), exact


def norm_key(x: FieldElement) -> NormKey:
    return x.norm_key()


def ball_contains(center: FieldElement, radius: NormKey, x: FieldElement) -> bool:
    if center.field != x.field:
        raise FieldMismatchError("ball center and point are in different fields")
    if radius.kind != center.field.kind:
        raise FieldMismatchError("radius key is for a different field kind")
    return center.field.raw_key(center.field.sub(x.raw, center.raw)) <= radius.to_raw()


def parse_element(text: str, field: FieldDescriptor) -> FieldElement:
    return FieldElement(field, field.parse_raw(text))


def format_element(x: FieldElement) -> str:
    return x.field.format_raw(x.raw)
