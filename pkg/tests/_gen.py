"""Random element and set generators shared by the tests."""

from fractions import Fraction

from cglab.fields import GAUSSIAN, RATIONAL, FieldElement, laurent
from cglab.setops import FiniteSet

LAURENT_Q = (2, 3, 5)


def rand_fraction(r, num=20, den=6):
    return Fraction(r.randint(-num, num), r.randint(1, den))


def rand_raw(r, field):
    if field.kind == "rational":
        return rand_fraction(r)
    if field.kind == "gaussian":
        return (rand_fraction(r), rand_fraction(r))
    lo = r.randint(-3, 2)
    hi = lo + r.randint(0, 4)
    return field.coerce({e: r.randrange(field.q) for e in range(lo, hi + 1)})


def rand_element(r, field):
    return FieldElement(field, rand_raw(r, field))


def all_fields():
    return [RATIONAL, GAUSSIAN] + [laurent(q) for q in LAURENT_Q]


def rand_set(r, field, size):
    """A set of at most ``size`` elements with small integer-ish entries."""
    if field.kind == "rational":
        pts = [Fraction(r.randint(-30, 30), r.choice((1, 1, 2))) for _ in range(size)]
    elif field.kind == "gaussian":
        pts = [(Fraction(r.randint(-6, 6)), Fraction(r.randint(-6, 6))) for _ in range(size)]
    else:
        pts = [
            field.coerce({e: r.randrange(field.q) for e in range(-1, 4)})
            for _ in range(size)
        ]
    return FiniteSet(field, [FieldElement(field, p) for p in pts])
