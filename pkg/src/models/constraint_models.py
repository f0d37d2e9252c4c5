"""
Reachability / invariance constraints with symbolic time bounds
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Mapping, Optional, Tuple, Union

from src.exceptions import UnboundVariableError
from src.models.formula_models import Formula


class ConstraintKind(str, Enum):
    REACH = "reach"
    INV = "inv"


@dataclass(frozen=True)
class SymVar:
    """Symbolic time variable introduced by an eventually node.

    Identity is the name; origin/depth/copy record where it came from and
    drive the bottom-up resolution order.
    """

    name: str
    origin: Tuple[int, ...] = field(default=(), compare=False)
    depth: int = field(default=0, compare=False)
    copy: Tuple[int, ...] = field(default=(), compare=False)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class SatVar:
    """Satisfaction time of the constraint with id ``constraint``"""

    name: str
    constraint: str = field(default="", compare=False)

    def __str__(self) -> str:
        return self.name


Var = Union[SymVar, SatVar]


def _var_key(v: Var) -> Tuple[int, str]:
    return (0 if isinstance(v, SymVar) else 1, v.name)


@dataclass(frozen=True)
class SymExpr:
    """Affine integer expression const + sum(coef * var)"""

    const: int = 0
    terms: Tuple[Tuple[Var, int], ...] = ()

    @classmethod
    def of(cls, value: Union[int, Var, "SymExpr"]) -> "SymExpr":
        if isinstance(value, SymExpr):
            return value
        if isinstance(value, int):
            return cls(const=value)
        return cls(terms=((value, 1),))

    @staticmethod
    def _normalize(const: int, coefs: Dict[Var, int]) -> "SymExpr":
        terms = tuple(sorted(((v, c) for v, c in coefs.items() if c != 0), key=lambda vc: _var_key(vc[0])))
        return SymExpr(const=const, terms=terms)

    def coefficients(self) -> Dict[Var, int]:
        return dict(self.terms)

    def __add__(self, other) -> "SymExpr":
        other = SymExpr.of(other)
        coefs = self.coefficients()
        for v, c in other.terms:
            coefs[v] = coefs.get(v, 0) + c
        return SymExpr._normalize(self.const + other.const, coefs)

    __radd__ = __add__

    def __neg__(self) -> "SymExpr":
        return SymExpr(const=-self.const, terms=tuple((v, -c) for v, c in self.terms))

    def __sub__(self, other) -> "SymExpr":
        return self + (-SymExpr.of(other))

    @property
    def vars(self) -> Tuple[Var, ...]:
        return tuple(v for v, _ in self.terms)

    def sym_vars(self) -> Tuple[SymVar, ...]:
        return tuple(v for v in self.vars if isinstance(v, SymVar))

    def sat_vars(self) -> Tuple[SatVar, ...]:
        return tuple(v for v in self.vars if isinstance(v, SatVar))

    def coefficient(self, v: Var) -> int:
        return self.coefficients().get(v, 0)

    def mentions(self, v: Var) -> bool:
        return self.coefficient(v) != 0

    @property
    def is_concrete(self) -> bool:
        return not self.terms

    def without(self, v: Var) -> "SymExpr":
        """Drop the term for v"""
        coefs = self.coefficients()
        coefs.pop(v, None)
        return SymExpr._normalize(self.const, coefs)

    def substitute(self, mapping: Mapping[Var, Union[int, "SymExpr"]]) -> "SymExpr":
        result = SymExpr(const=self.const)
        for v, c in self.terms:
            if v in mapping:
                replacement = SymExpr.of(mapping[v])
                scaled = SymExpr(const=replacement.const * c,
                                 terms=tuple((w, k * c) for w, k in replacement.terms))
                result = result + scaled
            else:
                result = result + SymExpr(terms=((v, c),))
        return result

    def rename(self, mapping: Mapping[Var, Var]) -> "SymExpr":
        return self.substitute({old: SymExpr.of(new) for old, new in mapping.items()})

    def evaluate(self, assignment: Mapping[Var, int]) -> int:
        total = self.const
        for v, c in self.terms:
            if v not in assignment:
                raise UnboundVariableError(f"no value for {v.name}")
            total += c * assignment[v]
        return total

    def bounds(self, ranges: Mapping[Var, Tuple[int, int]]) -> Tuple[int, int]:
        """Interval-arithmetic range under per-variable ranges"""
        lo = hi = self.const
        for v, c in self.terms:
            if v not in ranges:
                raise UnboundVariableError(f"no range for {v.name}")
            vlo, vhi = ranges[v]
            if c >= 0:
                lo += c * vlo
                hi += c * vhi
            else:
                lo += c * vhi
                hi += c * vlo
        return lo, hi

    def __str__(self) -> str:
        parts = []
        for v, c in self.terms:
            if c == 1:
                parts.append(f"+{v.name}")
            elif c == -1:
                parts.append(f"-{v.name}")
            else:
                parts.append(f"{c:+d}*{v.name}")
        if self.const or not parts:
            parts.append(f"{self.const:+d}")
        text = "".join(parts)
        return text[1:] if text.startswith("+") else text


@dataclass(frozen=True)
class TimeVarBound:
    """Interval record (lo, hi, var) housing one symbolic variable"""

    lo: int
    hi: int
    var: SymVar

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi:
            raise ValueError(f"invalid bound ({self.lo}, {self.hi}) for {self.var.name}")

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def __str__(self) -> str:
        return f"({self.lo}, {self.hi}, {self.var.name})"


@dataclass(frozen=True)
class TaskConstraint:
    """Reachability or invariance tuple (lo, hi, prop)"""

    id: str
    kind: ConstraintKind
    lo: SymExpr
    hi: SymExpr
    prop: Formula
    # reach half id for the stay half of a reach-and-stay rewrite
    pair: Optional[str] = None

    def vars(self) -> Tuple:
        seen = []
        for v in self.lo.vars + self.hi.vars:
            if v not in seen:
                seen.append(v)
        return tuple(seen)

    def mentions(self, v: Var) -> bool:
        return self.lo.mentions(v) or self.hi.mentions(v)

    @property
    def is_concrete(self) -> bool:
        return self.lo.is_concrete and self.hi.is_concrete

    def with_bounds(self, lo: SymExpr, hi: SymExpr, id: Optional[str] = None,
                    kind: Optional[ConstraintKind] = None) -> "TaskConstraint":
        return TaskConstraint(id=id or self.id, kind=kind or self.kind, lo=lo, hi=hi, prop=self.prop,
                              pair=self.pair)


@dataclass(frozen=True)
class FlattenOutput:
    """Reachability set, invariance set and interval records"""

    reach: Tuple[TaskConstraint, ...]
    inv: Tuple[TaskConstraint, ...]
    tc: Tuple[TimeVarBound, ...]
    variable_mode: str = "fresh"

    @property
    def constraints(self) -> Tuple[TaskConstraint, ...]:
        return tuple(sorted(self.reach + self.inv, key=lambda c: constraint_sort_key(c.id)))

    def bound_of(self, var: SymVar) -> TimeVarBound:
        for b in self.tc:
            if b.var == var:
                return b
        raise KeyError(var.name)

    def ranges(self) -> Dict[Var, Tuple[int, int]]:
        return {b.var: (b.lo, b.hi) for b in self.tc}


@dataclass(frozen=True)
class SatWindow:
    """Element of TC': lo <= var <= hi"""

    lo: SymExpr
    hi: SymExpr
    var: SatVar
    rule: str = "applyFF"

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def __str__(self) -> str:
        return f"({self.lo}, {self.hi}, {self.var.name})"


@dataclass(frozen=True)
class ResolveOutput:
    """Constraints after symbolic time resolution"""

    reach: Tuple[TaskConstraint, ...]
    inv: Tuple[TaskConstraint, ...]
    tc_prime: Tuple[SatWindow, ...]
    tc: Tuple[TimeVarBound, ...] = ()
    sat_vars: Tuple[Tuple[str, SatVar], ...] = ()
    variable_mode: str = "fresh"

    @property
    def constraints(self) -> Tuple[TaskConstraint, ...]:
        return tuple(sorted(self.reach + self.inv, key=lambda c: constraint_sort_key(c.id)))

    def constraint(self, cid: str) -> TaskConstraint:
        for c in self.reach + self.inv:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def sat_var(self, cid: str) -> SatVar:
        return dict(self.sat_vars)[cid]

    def windows_of(self, var: SatVar) -> Tuple[SatWindow, ...]:
        return tuple(w for w in self.tc_prime if w.var == var)

    def ranges(self) -> Dict[Var, Tuple[int, int]]:
        return {b.var: (b.lo, b.hi) for b in self.tc}


@dataclass(frozen=True)
class ConcreteConstraint:
    """Instantiated constraint with integer bounds"""

    id: str
    kind: ConstraintKind
    lo: int
    hi: int
    prop: Formula


def constraint_sort_key(cid: str) -> Tuple[int, str]:
    """c2 < c10 < c10r"""
    digits = "".join(ch for ch in cid[1:] if ch.isdigit())
    return (int(digits) if digits else 0, cid)

