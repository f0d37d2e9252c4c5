"""
Flatten Service

Decomposes a fragment formula into reachability constraints, invariance
constraints and the interval records (TC) of the symbolic time variables
they mention.

Rules, applied once per node:
  proposition       -> reach (0, 0, p)
  f1 & f2           -> union of both sides
  F[a,b] f          -> fresh t with (a, b, t); t added to every bound below
  G[a,b] f          -> child reach copies shifted by every k in [a, b];
                       child inv shifted to (lo + a, hi + b)

A variable-free point reach (c, c, p) under G[a,b] is the invariance
(a + c, b + c, p). In fresh mode each unrolled copy gets its own clones of
the child's variables; in shared mode the copies share them.
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

import structlog

from src.exceptions import EnumerationCapError, FragmentViolationError, UnrollCapError
from src.models.constraint_models import (
    ConcreteConstraint, ConstraintKind, FlattenOutput, SymExpr, SymVar, TaskConstraint, TimeVarBound,
    Var,
)
from src.models.formula_models import Always, And, Eventually, Formula
from src.services.fragment_service import ensure_fragment, is_propositional, to_nnf
from src.startup import get_settings

logger = structlog.get_logger(__name__)

VARIABLE_MODES = ("fresh", "shared")


@dataclass
class _Raw:
    """Constraint before ids are assigned"""
    kind: ConstraintKind
    lo: SymExpr
    hi: SymExpr
    prop: Formula

    def shifted(self, lo: SymExpr, hi: SymExpr) -> "_Raw":
        return _Raw(self.kind, self.lo + lo, self.hi + hi, self.prop)

    def renamed(self, mapping: Mapping[Var, Var]) -> "_Raw":
        return _Raw(self.kind, self.lo.rename(mapping), self.hi.rename(mapping), self.prop)

    @property
    def symbolic(self) -> bool:
        return not (self.lo.is_concrete and self.hi.is_concrete)


@dataclass
class _Partial:
    constraints: List[_Raw] = field(default_factory=list)
    tc: List[TimeVarBound] = field(default_factory=list)


class FlattenService:
    """Recursive flattener with a per-run variable counter"""

    def __init__(self, variable_mode: Optional[str] = None, max_unroll: Optional[int] = None):
        settings = get_settings()
        self.variable_mode = (variable_mode or settings.variable_mode).lower()
        if self.variable_mode not in VARIABLE_MODES:
            raise ValueError(f"variable mode must be one of {VARIABLE_MODES}")
        self.max_unroll = max_unroll or settings.max_unroll
        self._next_var = 0

    def _fresh_var(self, path: Tuple[int, ...], depth: int, copy: Tuple[int, ...] = ()) -> SymVar:
        self._next_var += 1
        return SymVar(f"t{self._next_var}", origin=path, depth=depth, copy=copy)

    def flatten(self, f: Formula) -> FlattenOutput:
        """Flatten a fragment formula.

        Returns:
            FlattenOutput with ids c1, c2, ... in generation order
        """
        ensure_fragment(f)
        self._next_var = 0
        partial = self._flatten(f, (), 0)

        reach, inv = [], []
        for i, raw in enumerate(partial.constraints, start=1):
            c = TaskConstraint(id=f"c{i}", kind=raw.kind, lo=raw.lo, hi=raw.hi, prop=raw.prop)
            (reach if raw.kind == ConstraintKind.REACH else inv).append(c)

        out = FlattenOutput(reach=tuple(reach), inv=tuple(inv), tc=tuple(partial.tc),
                            variable_mode=self.variable_mode)
        logger.info("flatten_complete", reach=len(reach), inv=len(inv), tc=len(partial.tc),
                    variable_mode=self.variable_mode)
        return out

    def _flatten(self, f: Formula, path: Tuple[int, ...], depth: int) -> _Partial:
        if is_propositional(f):
            zero = SymExpr()
            return _Partial([_Raw(ConstraintKind.REACH, zero, zero, to_nnf(f))])

        if isinstance(f, And):
            left = self._flatten(f.left, path + (0,), depth + 1)
            right = self._flatten(f.right, path + (1,), depth + 1)
            return _Partial(left.constraints + right.constraints, left.tc + right.tc)

        if isinstance(f, Eventually):
            child = self._flatten(f.arg, path + (0,), depth + 1)
            # created after the child so inner variables get lower numbers
            t = self._fresh_var(path, depth)
            shift = SymExpr.of(t)
            constraints = [c.shifted(shift, shift) for c in child.constraints]
            return _Partial(constraints, child.tc + [TimeVarBound(f.interval.lo, f.interval.hi, t)])

        if isinstance(f, Always):
            return self._unroll(f, path, depth)

        raise FragmentViolationError(f"unexpected node {type(f).__name__} during flattening")

    def _unroll(self, f: Always, path: Tuple[int, ...], depth: int) -> _Partial:
        child = self._flatten(f.arg, path + (0,), depth + 1)
        a, b = f.interval.lo, f.interval.hi
        copies = range(a, b + 1)
        fresh = self.variable_mode == "fresh"

        symbolic = [c for c in child.constraints if c.symbolic]
        symbolic_copies = sum(
            len(copies) if (c.kind == ConstraintKind.REACH or fresh) else 1 for c in symbolic
        )
        if len(child.constraints) + symbolic_copies > self.max_unroll:
            raise UnrollCapError(
                f"G[{a},{b}] would produce {symbolic_copies} constraints (cap {self.max_unroll})"
            )

        # per-copy variable clones; copy a keeps the child's own variables
        clones: Dict[int, Dict[Var, Var]] = {}
        tc: List[TimeVarBound] = []
        if fresh and symbolic:
            for k in copies:
                mapping: Dict[Var, Var] = {}
                for bound in child.tc:
                    if k == a:
                        mapping[bound.var] = bound.var
                    else:
                        v = bound.var
                        mapping[v] = self._fresh_var(v.origin, v.depth, v.copy + (k,))
                    tc.append(TimeVarBound(bound.lo, bound.hi, mapping[bound.var]))
                clones[k] = mapping
        else:
            tc = list(child.tc)

        out: List[_Raw] = []
        for c in child.constraints:
            if not c.symbolic:
                # variable-free: a point reach (c, c, p) holds at every a+c .. b+c
                out.append(_Raw(ConstraintKind.INV, c.lo + a, c.hi + b, c.prop))
            elif fresh:
                for k in copies:
                    out.append(c.renamed(clones[k]).shifted(SymExpr.of(k), SymExpr.of(k)))
            elif c.kind == ConstraintKind.REACH:
                for k in copies:
                    out.append(c.shifted(SymExpr.of(k), SymExpr.of(k)))
            else:
                out.append(c.shifted(SymExpr.of(a), SymExpr.of(b)))
        return _Partial(out, tc)


def flatten(f: Formula, variable_mode: Optional[str] = None, max_unroll: Optional[int] = None) -> FlattenOutput:
    """Flatten with a fresh per-run service"""
    return FlattenService(variable_mode=variable_mode, max_unroll=max_unroll).flatten(f)


def assignment_space(tc) -> int:
    size = 1
    for bound in tc:
        size *= bound.size
    return size


def enumerate_assignments(tc, cap: Optional[int] = None) -> Iterator[Dict[Var, int]]:
    """Every assignment of each variable to an integer within its bound.

    Raises:
        EnumerationCapError: product of the interval sizes exceeds cap
    """
    cap = cap or get_settings().max_enum
    tc = list(tc)
    size = assignment_space(tc)
    if size > cap:
        raise EnumerationCapError(size, cap)
    variables = [b.var for b in tc]
    for values in itertools.product(*(range(b.lo, b.hi + 1) for b in tc)):
        yield dict(zip(variables, values))


def instantiate(x: TaskConstraint, assignment: Mapping[Var, int]) -> ConcreteConstraint:
    """Evaluate both bounds of x under a full assignment"""
    return ConcreteConstraint(id=x.id, kind=x.kind, lo=x.lo.evaluate(assignment),
                              hi=x.hi.evaluate(assignment), prop=x.prop)
