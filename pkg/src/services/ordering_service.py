"""
Ordering Service

Precedence between resolved constraints, plus the interval propagation that
keeps satisfaction windows consistent while satisfaction times get bound.

x1 precedes x2 when
  * x1's completion is provably before x2's earliest satisfaction
    (interval arithmetic after cancelling shared symbolic variables), or
  * x2's bounds mention x1's satisfaction time, or
  * x1's satisfaction time is pinned by symbolic variables that are a strict
    subset of the ones pinning x2, and x2 can neither happen before x1 nor is
    forced to coincide with it (added only when acyclic)
"""

import math
from typing import Dict, Iterable, List, Optional, Set, Tuple

import structlog

from src.exceptions import InconsistentWindowsError, ScheduleOrderError, UnboundVariableError
from src.models.constraint_models import (
    ConstraintKind, ResolveOutput, SatVar, SymExpr, TaskConstraint, Var,
)
from src.models.schedule_models import PrecedenceOrder

logger = structlog.get_logger(__name__)

Range = Tuple[int, int]


def _point_substitution(r: ResolveOutput) -> Dict[Var, SymExpr]:
    """SatVars whose value is an expression of symbolic variables"""
    sub: Dict[Var, SymExpr] = {}
    for w in r.tc_prime:
        if w.is_point and w.var not in sub:
            sub[w.var] = w.lo
    # invariance constraints complete at their upper bound
    for c in r.inv:
        sv = r.sat_var(c.id)
        if sv not in sub:
            sub[sv] = c.hi.substitute(sub)
    return sub


def _order_ranges(r: ResolveOutput, sub: Dict[Var, SymExpr]) -> Dict[Var, Range]:
    ranges: Dict[Var, Range] = r.ranges()
    for cid, sv in r.sat_vars:
        if sv in sub:
            continue
        c = r.constraint(cid)
        lo, hi = (c.lo.const, c.hi.const) if c.is_concrete else (0, math.inf)
        for w in r.windows_of(sv):
            lo = max(lo, w.lo.bounds(ranges)[0])
            hi = min(hi, w.hi.bounds(ranges)[1])
        ranges[sv] = (lo, hi)
    return ranges


def _starts_ends(r: ResolveOutput, c: TaskConstraint, sub: Dict[Var, SymExpr]) -> Tuple[List[SymExpr], List[SymExpr]]:
    """Lower / upper expressions for when c is satisfied"""
    if c.kind == ConstraintKind.INV:
        return [c.lo.substitute(sub)], [c.hi.substitute(sub)]
    starts, ends = [c.lo.substitute(sub)], [c.hi.substitute(sub)]
    for w in r.windows_of(r.sat_var(c.id)):
        starts.append(w.lo)
        ends.append(w.hi)
    return starts, ends


def _closure(ids: List[str], edges: Set[Tuple[str, str]]) -> Set[Tuple[str, str]]:
    succ: Dict[str, Set[str]] = {i: set() for i in ids}
    for a, b in edges:
        succ[a].add(b)
    closed: Set[Tuple[str, str]] = set()
    for start in ids:
        stack, seen = list(succ[start]), set()
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            stack.extend(succ[node])
        closed.update((start, n) for n in seen)
    return closed


def _add_closed(closed: Set[Tuple[str, str]], ids: Iterable[str], a: str, b: str) -> None:
    """Insert a -> b into a transitively closed relation"""
    ids = list(ids)
    before = [x for x in ids if (x, a) in closed] + [a]
    after = [y for y in ids if (b, y) in closed] + [b]
    closed.update((x, y) for x in before for y in after)


def compute_order(r: ResolveOutput) -> PrecedenceOrder:
    """Partial order of necessary precedence between constraints.

    Raises:
        ScheduleOrderError: the relation has a cycle
    """
    sub = _point_substitution(r)
    ranges = _order_ranges(r, sub)
    constraints = list(r.constraints)
    ids = [c.id for c in constraints]
    bounds = {c.id: _starts_ends(r, c, sub) for c in constraints}
    sat_owner = {sv: cid for cid, sv in r.sat_vars}

    edges: Set[Tuple[str, str]] = set()
    for x1 in constraints:
        _, ends1 = bounds[x1.id]
        for x2 in constraints:
            if x1.id == x2.id:
                continue
            starts2, _ = bounds[x2.id]
            if any((e - s).bounds(ranges)[1] < 0 for e in ends1 for s in starts2):
                edges.add((x1.id, x2.id))
        for v in x1.vars():
            owner = sat_owner.get(v)
            if isinstance(v, SatVar) and owner is not None and owner != x1.id:
                edges.add((owner, x1.id))

    closed = _closure(ids, edges)
    cyclic = sorted(a for a, b in closed if a == b)
    if cyclic:
        raise ScheduleOrderError(f"precedence cycle through {', '.join(cyclic)}")

    points = {}
    for c in r.reach:
        for w in r.windows_of(r.sat_var(c.id)):
            if w.is_point and w.lo.sym_vars():
                points[c.id] = w.lo
                break

    for x1 in r.reach:
        p1 = points.get(x1.id)
        if p1 is None:
            continue
        vars1 = set(p1.sym_vars())
        for x2 in r.reach:
            if x2.id == x1.id or (x1.id, x2.id) in closed or (x2.id, x1.id) in closed:
                continue
            starts2, ends2 = bounds[x2.id]
            not_before = any(
                set(s.sym_vars()) > vars1 and (s - p1).bounds(ranges)[0] >= 0 for s in starts2
            )
            can_follow = all((e - p1).bounds(ranges)[1] >= 1 for e in ends2)
            if not_before and can_follow:
                _add_closed(closed, ids, x1.id, x2.id)

    logger.info("order_computed", constraints=len(ids), pairs=len(closed))
    return PrecedenceOrder(frozenset(closed))


class WindowState:
    """Symbolic variable ranges narrowed by bound satisfaction times"""

    def __init__(self, r: ResolveOutput):
        self.r = r
        self.ranges: Dict[Var, Range] = r.ranges()
        self.bindings: Dict[SatVar, int] = {}

    def copy(self) -> "WindowState":
        other = WindowState.__new__(WindowState)
        other.r = self.r
        other.ranges = dict(self.ranges)
        other.bindings = dict(self.bindings)
        return other

    def bind(self, sat: SatVar, value: int) -> None:
        """Record sat = value and propagate.

        Raises:
            InconsistentWindowsError: value lies outside a window or a range empties
        """
        for w in self.r.windows_of(sat):
            lo, hi = w.lo.bounds(self.ranges)[0], w.hi.bounds(self.ranges)[1]
            if not lo <= value <= hi:
                raise InconsistentWindowsError(
                    f"{sat.name}={value} outside window [{w.lo}, {w.hi}] = [{lo}, {hi}]"
                )
        self.bindings[sat] = value
        self._propagate()

    def _narrow(self, expr: SymExpr, value: int, upper: bool) -> bool:
        """Enforce expr <= value (upper) or expr >= value; True if a range moved"""
        changed = False
        for v, c in expr.terms:
            rest_lo, rest_hi = expr.without(v).bounds(self.ranges)
            lo, hi = self.ranges[v]
            if upper:
                limit = value - rest_lo
                new_lo, new_hi = (lo, min(hi, math.floor(limit / c))) if c > 0 else (max(lo, math.ceil(limit / c)), hi)
            else:
                limit = value - rest_hi
                new_lo, new_hi = (max(lo, math.ceil(limit / c)), hi) if c > 0 else (lo, min(hi, math.floor(limit / c)))
            if (new_lo, new_hi) != (lo, hi):
                if new_lo > new_hi:
                    raise InconsistentWindowsError(f"range of {v.name} became empty")
                self.ranges[v] = (new_lo, new_hi)
                changed = True
        return changed

    def _propagate(self) -> None:
        for _ in range(10_000):
            changed = False
            for sat, value in self.bindings.items():
                for w in self.r.windows_of(sat):
                    changed |= self._narrow(w.lo, value, upper=True)
                    changed |= self._narrow(w.hi, value, upper=False)
            if not changed:
                return
        logger.warning("window_propagation_not_converged")

    def concrete(self, expr: SymExpr) -> Optional[int]:
        """Value of expr once every SatVar in it is bound, else None"""
        if expr.sym_vars():
            return None
        try:
            return expr.evaluate(self.bindings)
        except UnboundVariableError:
            return None

    def effective_interval(self, c: TaskConstraint) -> Optional[Range]:
        """Own interval intersected with every window hull; None if not concrete"""
        lo, hi = self.concrete(c.lo), self.concrete(c.hi)
        if lo is None or hi is None:
            return None
        if c.kind == ConstraintKind.REACH:
            for w in self.r.windows_of(self.r.sat_var(c.id)):
                lo = max(lo, w.lo.bounds(self.ranges)[0])
                hi = min(hi, w.hi.bounds(self.ranges)[1])
        return lo, hi
