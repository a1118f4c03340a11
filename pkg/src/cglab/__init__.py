"""Exact sum-product and convexity experiments over Q, Q(i) and F_q((1/t))."""

from .convexfn import (
    ADDITIVE,
    MULTIPLICATIVE,
    Composite,
    ConvexFn,
    Log,
    Reflect,
    ShiftedPower,
    ValueSet,
    apply_fn,
    delta_d,
    discrete_k_convexity_check,
    parse_fn,
)
from .errors import (
    CglabError,
    ConstructionError,
    ConvexityError,
    DomainError,
    FieldMismatchError,
    InexactDivisionError,
    ParseError,
    ResourceLimitError,
)
from .fields import (
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
from .setops import (
    FiniteSet,
    count_in_ball,
    count_in_interval,
    difference_set,
    gap_lemma_check,
    make_set,
    min_gap,
    positive_differences,
    product_power,
    rational_set,
    read_set_file,
    signed_sumset,
    sumset,
    write_set_file,
)

__version__ = "0.1.0"
