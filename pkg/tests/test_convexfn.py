import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cglab.convexfn import (
    ADDITIVE,
    MULTIPLICATIVE,
    Composite,
    Log,
    Reflect,
    ShiftedPower,
    ValueSet,
    apply_fn,
    delta_d,
    discrete_k_convexity_check,
    parse_fn,
    shifted_by_constant,
)
from cglab.errors import DomainError, ParseError
from cglab.fields import GAUSSIAN, RATIONAL, FieldElement
from cglab.setops import make_set, rational_set

sq = ShiftedPower(2, 0)
cube = ShiftedPower(3, 0)


def test_eval_examples():
    assert sq(3) == 9
    assert Log()(8) == 8 and Log().group is MULTIPLICATIVE
    assert Composite(sq, Fraction(25), (Fraction(1),))(3) == 32
    assert ShiftedPower(2, 2)(-1) == 1
    assert sq(FieldElement(RATIONAL, Fraction(1, 2))) == Fraction(1, 4)


def test_domain_errors():
    with pytest.raises(DomainError):
        Log()(0)
    with pytest.raises(DomainError):
        ShiftedPower(2, 1)(-2)
    with pytest.raises(DomainError):
        Reflect(Log())(1)
    with pytest.raises(TypeError):
        sq(FieldElement(GAUSSIAN, (Fraction(1), Fraction(0))))
    with pytest.raises(ValueError):
        ShiftedPower(0)


def test_delta_examples():
    g = delta_d(sq, 1)
    assert [g(x) for x in (0, 1, 2)] == [1, 3, 5]
    h = delta_d(Log(), 1)
    assert h(1) == 2 and h(2) == Fraction(3, 2)
    assert delta_d(cube, 2)(1) == 26
    # iterated differences flatten into one Composite
    gg = delta_d(delta_d(cube, 1), 1)
    assert gg.deltas == (1, 1) and [gg(x) for x in (1, 2)] == [12, 18]
    assert gg.convexity_order == 0
    with pytest.raises(ValueError):
        delta_d(sq, 0)


def test_shifted_by_constant():
    g = shifted_by_constant(delta_d(sq, 1), 25)
    assert g(3) == 32
    L = shifted_by_constant(Log(), 4)
    assert L(3) == 12  # log 4 + log 3


def test_reflect():
    R = Reflect(Log())
    assert R(-2) == Fraction(1, 2)
    assert R.group is MULTIPLICATIVE
    assert Reflect(cube)(-2) == -8
    # -log(-x) is convex increasing on x < 0
    assert discrete_k_convexity_check(R, [-5, -4, -3, -2], 1, [1]).passed


def test_convexity_check_examples():
    assert discrete_k_convexity_check(cube, range(1, 11), 2, [1, 1]).passed
    rep = discrete_k_convexity_check(sq, range(1, 11), 2, [1, 1])
    assert not rep.passed and rep.failed_order == 2
    assert discrete_k_convexity_check(Log(), range(1, 11), 0, []).passed
    # log is concave: increasing mode fails at order 1, monotone mode passes
    assert discrete_k_convexity_check(Log(), range(1, 11), 1, [1]).failed_order == 1
    assert discrete_k_convexity_check(Log(), range(1, 11), 3, [1, 1, 1], mode="monotone").passed
    with pytest.raises(ValueError):
        discrete_k_convexity_check(sq, [1, 2], 2, [1])
    with pytest.raises(ValueError):
        discrete_k_convexity_check(sq, [1, 2], 0, [], mode="sideways")


@given(
    st.integers(2, 6),
    st.integers(0, 5),
    st.fractions(min_value=Fraction(1, 4), max_value=5),
    st.integers(0, 10**6),
)
def test_delta_lowers_order_by_one(p, shift, d, seed):
    """Δ_d f of a (p-1)-convex power is (p-2)-convex on sampled points."""
    f = ShiftedPower(p, shift)
    r = random.Random(seed)
    pts = sorted({Fraction(r.randint(-shift * 4, 40), 4) for _ in range(12)})
    k = p - 2
    deltas = [Fraction(r.randint(1, 8), 4) for _ in range(k)]
    g = delta_d(f, d)
    assert g.convexity_order == k
    assert discrete_k_convexity_check(f, pts, k + 1, [d] + deltas).passed
    assert discrete_k_convexity_check(g, pts, k, deltas).passed


def test_apply_fn_examples():
    assert apply_fn(sq, rational_set([1, 2, 3])).values == (1, 4, 9)
    v = apply_fn(Log(), rational_set([2, 4, 8]))
    assert v.group is MULTIPLICATIVE and v.values == (2, 4, 8)
    assert apply_fn(ShiftedPower(2, 2), [-1, 0, 1]).values == (1, 4, 9)
    with pytest.raises(TypeError):
        apply_fn(sq, make_set(GAUSSIAN, ["1"]))


def test_value_set_operations():
    X = ValueSet(ADDITIVE, [1, 4, 9])
    assert len(X.plus_plus_minus) == 12
    assert X.positive_differences == (3, 5, 8)
    assert X.count_in_interval(0, 9) == 5  # {1, 4, 6, 7, 9}
    assert X.count_strictly_between(1, 9) == 1
    assert 4 in X and 5 not in X
    M = ValueSet(MULTIPLICATIVE, [1, 2, 3])
    # log values: log(xy/z) distinct quotients
    assert M.plus_plus_minus.values == tuple(sorted({Fraction(x * y, z) for x in (1, 2, 3) for y in (1, 2, 3) for z in (1, 2, 3)}))
    assert M.positive_differences == (Fraction(3, 2), 2, 3)
    assert ValueSet(ADDITIVE, [1, 2]) != ValueSet(MULTIPLICATIVE, [1, 2])


def test_parse_fn():
    assert parse_fn("pow(2, 0)") == ShiftedPower(2, 0)
    assert parse_fn("pow(3)") == ShiftedPower(3, 0)
    assert parse_fn("pow(2,1/2)") == ShiftedPower(2, Fraction(1, 2))
    assert parse_fn("log") == Log()
    assert parse_fn("reflect(log)") == Reflect(Log())
    assert str(parse_fn("reflect(pow(2,3))")) == "reflect(pow(2, 3))"
    with pytest.raises(ParseError):
        parse_fn("exp")
    with pytest.raises(ParseError):
        parse_fn("pow(2,x)")
