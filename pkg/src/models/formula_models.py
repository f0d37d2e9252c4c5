"""
Formula AST for the bounded STL fragment

Nodes are immutable and hashable so they can be shared between pipeline stages
and used as dictionary keys by the planner's compiled-proposition cache.
"""

import math
from dataclasses import dataclass
from typing import Tuple, Union

from src.exceptions import InvalidIntervalError

COMPARISONS = (">=", ">", "<=", "<")
_FLIPPED = {">=": "<=", ">": "<", "<=": ">=", "<": ">"}


@dataclass(frozen=True)
class Interval:
    """Closed integer interval of time steps"""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo < 0:
            raise InvalidIntervalError(f"interval lower bound {self.lo} is negative")
        if self.lo > self.hi:
            raise InvalidIntervalError(f"interval lo > hi: [{self.lo},{self.hi}]")

    def __str__(self) -> str:
        return f"[{self.lo},{self.hi}]"

    @property
    def width(self) -> int:
        return self.hi - self.lo


@dataclass(frozen=True)
class Linear:
    """Affine predicate sum(coef * channel) <op> bound.

    A halfplane over the position channels is the special case
    ``a1*px + a2*py >= b``.
    """

    terms: Tuple[Tuple[str, float], ...]
    op: str
    bound: float

    def __post_init__(self):
        if self.op not in COMPARISONS:
            raise ValueError(f"unknown comparison {self.op!r}")
        if not self.terms:
            raise ValueError("linear predicate needs at least one term")
        if not math.isfinite(self.bound) or not all(math.isfinite(c) for _, c in self.terms):
            raise ValueError("linear predicate coefficients must be finite")

    @property
    def is_lower(self) -> bool:
        """True for >= / > (robustness is lhs - bound)"""
        return self.op in (">=", ">")

    def negated(self) -> "Linear":
        return Linear(self.terms, _FLIPPED[self.op], self.bound)


@dataclass(frozen=True)
class RegionRef:
    """Membership in a named environment region"""

    name: str


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Eventually:
    interval: Interval
    arg: "Formula"


@dataclass(frozen=True)
class Always:
    interval: Interval
    arg: "Formula"


@dataclass(frozen=True)
class Until:
    """Parsed so that fragment validation can name it; never evaluated"""

    interval: Interval
    left: "Formula"
    right: "Formula"


Atom = Union[Linear, RegionRef, Const]
Formula = Union[Linear, RegionRef, Const, Not, And, Or, Eventually, Always, Until]
TEMPORAL_NODES = (Eventually, Always, Until)
ATOM_NODES = (Linear, RegionRef, Const)

TRUE = Const(True)
FALSE = Const(False)


def children(f: Formula) -> Tuple[Formula, ...]:
    """Direct subformulas in left-to-right order"""
    if isinstance(f, (Not, Eventually, Always)):
        return (f.arg,)
    if isinstance(f, (And, Or, Until)):
        return (f.left, f.right)
    return ()


def conjoin(*parts: Formula) -> Formula:
    """Left-nested conjunction; drops literal true and repeats, empty input gives true"""
    kept = []
    for p in parts:
        if p != TRUE and p not in kept:
            kept.append(p)
    if not kept:
        return TRUE
    result = kept[0]
    for p in kept[1:]:
        result = And(result, p)
    return result
