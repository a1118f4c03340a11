import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cglab import engine
from cglab.errors import ResourceLimitError


def brute_signed(values, n, m):
    vals = sorted(set(values))
    out = set()
    for plus in itertools.product(vals, repeat=n):
        for minus in itertools.product(vals, repeat=m):
            out.add(sum(plus) - sum(minus))
    return sorted(out)


small_ints = st.lists(st.integers(-50, 50), min_size=1, max_size=7)
nm = st.tuples(st.integers(0, 3), st.integers(0, 3)).filter(lambda t: 1 <= t[0] + t[1] <= 4)


@given(small_ints, nm)
def test_int_signed_sumset_matches_bruteforce(values, nm):
    n, m = nm
    assert engine.int_signed_sumset(values, n, m) == brute_signed(values, n, m)


@given(st.lists(st.integers(-10**12, 10**12), min_size=1, max_size=6), nm)
def test_hash_path_for_wide_spans(values, nm):
    n, m = nm
    assert engine.int_signed_sumset(values, n, m) == brute_signed(values, n, m)


def test_bitset_and_hash_paths_agree(monkeypatch):
    r = random.Random(5)
    cases = [([r.randint(-300, 300) for _ in range(12)], n, m) for n, m in [(2, 1), (1, 1), (3, 0), (0, 2)]]
    fast = [engine.int_signed_sumset(v, n, m) for v, n, m in cases]
    monkeypatch.setattr(engine, "BITSET_MAX_BITS", 0)
    slow = [engine.int_signed_sumset(v, n, m) for v, n, m in cases]
    assert fast == slow


def test_cap_raises_resource_limit():
    with pytest.raises(ResourceLimitError) as err:
        engine.int_signed_sumset(range(0, 1000, 7), 2, 1, cap=100)
    assert err.value.cap == 100 and err.value.size > 100
    with pytest.raises(ResourceLimitError):
        engine.int_signed_sumset([10**15 * i for i in range(30)], 2, 0, cap=50)
    with pytest.raises(ResourceLimitError):
        engine.int_product_power(range(2, 60), 2, cap=100)


def test_argument_validation():
    with pytest.raises(ValueError):
        engine.int_signed_sumset([1], 0, 0)
    assert engine.int_signed_sumset([], 2, 1) == []


def brute_ratio(values, n, m):
    out = set()
    for plus in itertools.product(values, repeat=n):
        for minus in itertools.product(values, repeat=m):
            x = Fraction(1)
            for p in plus:
                x *= p
            for q in minus:
                x /= q
            out.add(x)
    return sorted(out)


@given(st.lists(st.fractions(min_value=Fraction(1, 8), max_value=20), min_size=1, max_size=5), nm)
def test_ratio_signed_product_matches_bruteforce(values, nm):
    n, m = nm
    values = [v for v in values if v > 0] or [Fraction(1)]
    assert engine.ratio_signed_product(values, n, m) == brute_ratio(values, n, m)


@given(st.lists(st.integers(1, 40), min_size=1, max_size=6), nm)
def test_ratio_integer_path(values, nm):
    n, m = nm
    assert engine.ratio_signed_product(values, n, m) == brute_ratio(values, n, m)


def test_ratio_rejects_nonpositive():
    with pytest.raises(ValueError):
        engine.ratio_signed_product([1, 0], 1, 1)
