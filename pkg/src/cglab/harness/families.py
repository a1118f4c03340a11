"""Deterministic set families for experiments."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from ..convexfn import ADDITIVE, parse_fn
from ..fields import GAUSSIAN, RATIONAL, laurent
from ..setops import FiniteSet, read_set_file

FAMILIES = (
    "interval",
    "ap",
    "gp",
    "convex_image",
    "random_subset",
    "gaussian_grid",
    "gaussian_random",
    "laurent_constants",
    "laurent_random",
    "from_file",
)

PRNG_ID = f"numpy-{np.__version__}/PCG64/SeedSequence([seed,N,replicate])"

ROTATION = (Fraction(3, 5), Fraction(4, 5))


@dataclass(frozen=True)
class FamilySpec:
    """A named family plus its parameters.

    ``sizes`` are the N values; for ``gaussian_grid`` they are side lengths
    and for ``laurent_constants`` they are ignored (the set is F_q).
    """

    name: str
    sizes: tuple = ()
    seed: int = 0
    q: int = 2
    g: Fraction = Fraction(2)
    start: Fraction = Fraction(1)
    step: Fraction = Fraction(1)
    scale: Fraction = Fraction(1)
    fn: str = "pow(2,0)"
    M: int = 10_000
    max_degree: int = 8
    rotate: bool = False
    replicates: int = 1
    path: Optional[str] = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.name not in FAMILIES:
            raise ValueError(f"unknown family {self.name!r}; expected one of {', '.join(FAMILIES)}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if any(int(n) != n or n < 0 for n in self.sizes):
            raise ValueError("sizes must be nonnegative integers")

    def with_(self, **kw) -> "FamilySpec":
        return replace(self, **kw)


@dataclass(frozen=True)
class Instance:
    family: str
    param: int
    replicate: int
    A: FiniteSet

    @property
    def label(self) -> str:
        return self.family if self.replicate == 0 else f"{self.family}#{self.replicate}"


def rng_for(seed: int, n: int, replicate: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, n, replicate])))


def _rational(values, scale=1):
    return FiniteSet(RATIONAL, (Fraction(v) * scale for v in values))


def _one(spec: FamilySpec, n: int, rep: int) -> FiniteSet:
    name = spec.name
    if name == "interval":
        return _rational(range(1, n + 1), spec.scale)
    if name == "ap":
        return _rational((spec.start + i * spec.step for i in range(n)), spec.scale)
    if name == "gp":
        if spec.g <= 0 or spec.g == 1:
            raise ValueError("gp ratio must be positive and not 1")
        return _rational((spec.start * spec.g**i for i in range(n)), spec.scale)
    if name == "convex_image":
        f = parse_fn(spec.fn)
        if f.group is not ADDITIVE:
            raise ValueError("convex_image needs an additively valued function")
        return _rational((f(i) for i in range(1, n + 1)), spec.scale)
    if name == "random_subset":
        if n > spec.M:
            raise ValueError("random_subset needs N <= M")
        rng = rng_for(spec.seed, n, rep)
        picks = rng.choice(spec.M, size=n, replace=False) + 1
        return _rational(sorted(int(x) for x in picks), spec.scale)
    if name == "gaussian_grid":
        pts = [(Fraction(a), Fraction(b)) for a in range(n) for b in range(n)]
        if spec.rotate:
            c, s = ROTATION
            pts = [(a * c - b * s, a * s + b * c) for a, b in pts]
        return FiniteSet(GAUSSIAN, pts)
    if name == "gaussian_random":
        R = spec.M
        if n > (2 * R + 1) ** 2:
            raise ValueError("gaussian_random needs N <= (2M+1)^2")
        rng = rng_for(spec.seed, n, rep)
        codes = rng.choice((2 * R + 1) ** 2, size=n, replace=False)
        pts = [(Fraction(int(c) // (2 * R + 1) - R), Fraction(int(c) % (2 * R + 1) - R)) for c in codes]
        return FiniteSet(GAUSSIAN, pts)
    if name == "laurent_constants":
        F = laurent(spec.q)
        return FiniteSet(F, range(spec.q))
    if name == "laurent_random":
        F = laurent(spec.q)
        space = spec.q ** (spec.max_degree + 1)
        if n > space:
            raise ValueError("laurent_random needs N <= q^(max_degree+1)")
        rng = rng_for(spec.seed, n, rep)
        codes = rng.choice(space, size=n, replace=False)
        out = []
        for c in codes:
            c = int(c)
            terms = {}
            for e in range(spec.max_degree + 1):
                c, r = divmod(c, spec.q)
                if r:
                    terms[e] = r
            out.append(terms)
        return FiniteSet(F, out)
    if name == "from_file":
        if not spec.path:
            raise ValueError("from_file needs a path")
        return read_set_file(spec.path)
    raise ValueError(f"unknown family {name!r}")


def gen_family(spec: FamilySpec) -> list[Instance]:
    """All instances of a family, ordered by (size, replicate)."""
    if spec.name in ("laurent_constants", "from_file"):
        sizes = (0,)
    else:
        sizes = tuple(sorted(set(int(n) for n in spec.sizes)))
        if not sizes:
            raise ValueError("no sizes given")
    reps = spec.replicates if spec.name in ("random_subset", "gaussian_random", "laurent_random") else 1
    out = []
    for n in sizes:
        for r in range(reps):
            out.append(Instance(spec.name, n, r, _one(spec, n, r)))
    return out


def parse_sizes(text: str) -> tuple:
    """``a..b`` (doubling), ``a..b,step`` (arithmetic) or a comma list."""
    s = text.replace(" ", "")
    if ".." in s:
        lo, rest = s.split("..", 1)
        if "," in rest:
            hi, step = rest.split(",", 1)
            lo, hi, step = int(lo), int(hi), int(step)
            if step <= 0:
                raise ValueError("step must be positive")
            return tuple(range(lo, hi + 1, step))
        lo, hi = int(lo), int(rest)
        if lo <= 0:
            raise ValueError("doubling ladders start at a positive size")
        out = []
        n = lo
        while n <= hi:
            out.append(n)
            n *= 2
        return tuple(out)
    return tuple(int(x) for x in s.split(",") if x)
