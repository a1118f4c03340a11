import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cglab.errors import FieldMismatchError, InexactDivisionError, ParseError
from cglab.fields import (
    GAUSSIAN,
    RATIONAL,
    FieldElement,
    NormKey,
    arith,
    ball_contains,
    format_element,
    laurent,
    laurent_divide,
    norm_key,
    parse_element,
    parse_field_header,
)

from _gen import all_fields, rand_element

F2, F3 = laurent(2), laurent(3)


def el(field, text):
    return parse_element(text, field)


# --- examples


def test_arith_examples():
    assert arith(el(RATIONAL, "1/2"), el(RATIONAL, "1/3"), "+") == el(RATIONAL, "5/6")
    assert arith(el(GAUSSIAN, "1+i"), el(GAUSSIAN, "1-i"), "×") == el(GAUSSIAN, "2")
    assert arith(el(F2, "t+1"), el(F2, "t"), "+") == el(F2, "1")


def test_norm_key_examples():
    assert norm_key(el(F2, "t^2+1")) == NormKey("laurent", 2)
    assert norm_key(el(GAUSSIAN, "1+i")) == NormKey("gaussian", Fraction(2))
    assert norm_key(el(RATIONAL, "-3/4")) == NormKey("rational", Fraction(3, 4))
    assert norm_key(el(F2, "0")).is_bottom
    assert norm_key(el(F2, "0")) < norm_key(el(F2, "t^-5"))


def test_ball_contains_examples():
    assert ball_contains(el(F2, "t"), NormKey("laurent", 0), el(F2, "t+1"))
    assert not ball_contains(el(GAUSSIAN, "0"), NormKey("gaussian", Fraction(1)), el(GAUSSIAN, "1+i"))
    assert ball_contains(el(RATIONAL, "5"), NormKey("rational", Fraction(2)), el(RATIONAL, "3"))


def test_parse_examples():
    assert el(RATIONAL, "-3/4").raw == Fraction(-3, 4)
    assert el(GAUSSIAN, "1/2+3i").raw == (Fraction(1, 2), Fraction(3))
    assert el(F3, "2*t^3+1+t^-2").raw == ((3, 2), (0, 1), (-2, 1))
    assert el(GAUSSIAN, "-i").raw == (0, -1)
    assert el(F3, "-1").raw == ((0, 2),)


@pytest.mark.parametrize(
    "field,text,pos",
    [
        (GAUSSIAN, "1/2+", 3),
        (RATIONAL, "1/0", 2),
        (GAUSSIAN, "x", 0),
        (F3, "1/3", 0),
        (F3, "2t", 1),
    ],
)
def test_parse_errors_report_position(field, text, pos):
    with pytest.raises(ParseError) as err:
        parse_element(text, field)
    assert err.value.position == pos


def test_field_header():
    assert parse_field_header("rational") == RATIONAL
    assert parse_field_header(" Gaussian ") == GAUSSIAN
    assert parse_field_header("laurent q=5") == laurent(5)
    with pytest.raises(ParseError):
        parse_field_header("reals")


def test_invalid_laurent_fields():
    with pytest.raises(ValueError):
        laurent(4)
    with pytest.raises(ValueError):
        laurent(2, truncation_floor=1)


def test_mismatch_and_division_errors():
    with pytest.raises(FieldMismatchError):
        arith(el(F2, "1"), el(F3, "1"), "+")
    with pytest.raises(FieldMismatchError):
        el(RATIONAL, "1") + el(GAUSSIAN, "1")
    with pytest.raises(FieldMismatchError):
        norm_key(el(F2, "1")) < norm_key(el(RATIONAL, "1"))
    with pytest.raises(ZeroDivisionError):
        el(RATIONAL, "1") / el(RATIONAL, "0")
    with pytest.raises(ZeroDivisionError):
        el(GAUSSIAN, "1") / el(GAUSSIAN, "0")
    with pytest.raises(ZeroDivisionError):
        el(F2, "1") / el(F2, "0")
    with pytest.raises(ValueError):
        arith(el(RATIONAL, "1"), el(RATIONAL, "2"), "^")


def test_laurent_division():
    # (t^2 - 1)/(t + 1) = t - 1 exactly over F_3
    assert el(F3, "t^2+2") / el(F3, "t+1") == el(F3, "t+2")
    with pytest.raises(InexactDivisionError):
        el(F2, "1") / el(F2, "t+1")
    q, exact = laurent_divide(el(F2, "1"), el(F2, "t+1"))
    assert not exact
    # 1/(t+1) = t^-1 + t^-2 + ... in characteristic 2
    assert q.raw[:3] == ((-1, 1), (-2, 1), (-3, 1))
    assert min(e for e, _ in q.raw) >= F2.truncation_floor
    G = laurent(2, truncation_floor=-4, truncated_division=True)
    assert (el(G, "1") / el(G, "t+1")).raw == ((-1, 1), (-2, 1), (-3, 1), (-4, 1))


def test_elements_are_immutable_and_hashable():
    x = el(GAUSSIAN, "1+i")
    with pytest.raises(AttributeError):
        x.raw = (0, 0)
    assert len({x, el(GAUSSIAN, "1+i"), el(GAUSSIAN, "1-i")}) == 2
    assert format_element(x) == "1+i"


# --- properties


def _norm_value(x: FieldElement) -> float:
    """Independent float norm: |x|, |x|^2 or q^deg."""
    f = x.field
    if f.kind == "rational":
        return abs(float(x.raw))
    if f.kind == "gaussian":
        return float(x.raw[0]) ** 2 + float(x.raw[1]) ** 2
    return 0.0 if not x.raw else float(f.q) ** x.raw[0][0]


def test_multiplicativity_100k_pairs():
    r = random.Random(1)
    fields = all_fields()
    for i in range(100_000):
        f = fields[i % len(fields)]
        x, y = rand_element(r, f), rand_element(r, f)
        kx, ky, kxy = norm_key(x).value, norm_key(y).value, norm_key(x * y).value
        if f.kind == "laurent":
            if kx is None or ky is None:
                assert kxy is None
            else:
                assert kxy == kx + ky
        else:
            assert kxy == kx * ky


def test_parse_format_round_trip_10k():
    r = random.Random(2)
    fields = all_fields()
    for i in range(10_000):
        f = fields[i % len(fields)]
        x = rand_element(r, f)
        assert parse_element(format_element(x), f) == x


def test_order_isomorphism_10k():
    r = random.Random(3)
    fields = all_fields()
    checked = 0
    for i in range(10_000):
        f = fields[i % len(fields)]
        x, y = rand_element(r, f), rand_element(r, f)
        nx, ny = _norm_value(x), _norm_value(y)
        if math.isclose(nx, ny, rel_tol=1e-12):
            continue
        assert (norm_key(x) < norm_key(y)) == (nx < ny)
        checked += 1
    assert checked > 5_000


@given(st.data())
def test_ultrametric_inequality(data):
    q = data.draw(st.sampled_from([2, 3, 5]))
    f = laurent(q)
    seed = data.draw(st.integers(0, 2**32))
    r = random.Random(seed)
    x, y = rand_element(r, f), rand_element(r, f)
    assert norm_key(x + y) <= max(norm_key(x), norm_key(y))


@given(st.integers(0, 2**32))
def test_field_axioms(seed):
    r = random.Random(seed)
    for f in all_fields():
        x, y, z = (rand_element(r, f) for _ in range(3))
        assert (x + y) * z == x * z + y * z
        assert x - x == FieldElement(f, f.zero())
        if y:
            assert (x * y) / y == x
