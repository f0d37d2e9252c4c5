"""
Resolve Service

Symbolic time resolution: eliminates symbolic time variables from constraint
bounds, innermost variables first, using two rewrite rules.

  applyFG  inv (t+l, t+h, p) with (a, b, t)
           -> reach (a+l, b+l, p) and inv (s, s + (h-l), p), s = sat time of the reach
  applyFF  reach (t+l, t+h, p) with (a, b, t)
           -> reach (l+a, h+b, p)

Each rewrite records satisfaction windows (TC') that tie the new satisfaction
variables back to the eliminated symbolic ones.
"""

from typing import Dict, List, Mapping, Optional, Tuple

import structlog

from src.exceptions import MalformedBoundError, UnboundVariableError, UnknownVariableError
from src.models.constraint_models import (
    ConstraintKind, FlattenOutput, ResolveOutput, SatVar, SatWindow, SymExpr, SymVar, TaskConstraint,
    TimeVarBound, Var, constraint_sort_key,
)

logger = structlog.get_logger(__name__)


def sat_var_for(cid: str) -> SatVar:
    return SatVar(f"s_{cid}", constraint=cid)


def _split(x: TaskConstraint, t: SymVar) -> Tuple[SymExpr, SymExpr]:
    """Return (l, h) for x = (t + l, t + h)"""
    if x.lo.coefficient(t) != 1 or x.hi.coefficient(t) != 1:
        raise MalformedBoundError(
            f"constraint {x.id} bounds [{x.lo}, {x.hi}] do not carry {t.name} with coefficient 1"
        )
    return x.lo.without(t), x.hi.without(t)


def apply_fg(x: TaskConstraint, tc: TimeVarBound) -> Tuple[TaskConstraint, TaskConstraint, Tuple[SatWindow, ...]]:
    """Reach-and-stay rewrite of an invariance constraint.

    Returns:
        (reach, inv, windows); the reach gets id ``<x.id>r``, the inv keeps x.id
    """
    if x.kind != ConstraintKind.INV:
        raise MalformedBoundError(f"applyFG expects an invariance constraint, got {x.id} ({x.kind.value})")
    t = tc.var
    l, h = _split(x, t)
    width = h - l
    if not width.is_concrete or width.const < 0:
        raise MalformedBoundError(f"constraint {x.id} has a non-constant width {width}")

    reach = TaskConstraint(id=f"{x.id}r", kind=ConstraintKind.REACH, lo=l + tc.lo, hi=l + tc.hi, prop=x.prop)
    s_reach, s_inv = sat_var_for(reach.id), sat_var_for(x.id)
    inv = TaskConstraint(id=x.id, kind=ConstraintKind.INV, lo=SymExpr.of(s_reach),
                         hi=SymExpr.of(s_reach) + width.const, prop=x.prop, pair=reach.id)

    start = SymExpr.of(t) + l
    end = SymExpr.of(t) + h
    # the stay part completes after the witness unless it is a single step
    inv_start = start + 1 if width.const > 0 else start
    windows = (
        SatWindow(start, start, s_reach, rule="applyFG-reach"),
        SatWindow(inv_start, end, s_inv, rule="applyFG-inv"),
    )
    return reach, inv, windows


def apply_ff(x: TaskConstraint, tc: TimeVarBound) -> Tuple[TaskConstraint, SatWindow]:
    """Interval-sum rewrite of a reachability constraint"""
    if x.kind != ConstraintKind.REACH:
        raise MalformedBoundError(f"applyFF expects a reachability constraint, got {x.id} ({x.kind.value})")
    t = tc.var
    l, h = _split(x, t)
    reach = x.with_bounds(l + tc.lo, h + tc.hi)
    window = SatWindow(SymExpr.of(t) + l, SymExpr.of(t) + h, sat_var_for(x.id), rule="applyFF")
    return reach, window


def resolution_order(tc) -> List[TimeVarBound]:
    """Deepest introducing node first, ties by pre-order position then copy index"""
    def key(b: TimeVarBound):
        digits = "".join(ch for ch in b.var.name if ch.isdigit())
        return (-b.var.depth, b.var.origin, b.var.copy, int(digits) if digits else 0)
    return sorted(tc, key=key)


class ResolveService:
    """Symbolic time resolution over a flatten output"""

    def resolve(self, flat: FlattenOutput) -> ResolveOutput:
        housed = {b.var for b in flat.tc}
        for c in flat.constraints:
            for v in c.vars():
                if isinstance(v, SymVar) and v not in housed:
                    raise UnknownVariableError(f"constraint {c.id} mentions {v.name} with no interval record")

        current: List[TaskConstraint] = list(flat.constraints)
        windows: List[SatWindow] = []

        for bound in resolution_order(flat.tc):
            t = bound.var
            rewritten: List[TaskConstraint] = []
            for c in current:
                if not c.mentions(t):
                    rewritten.append(c)
                elif c.kind == ConstraintKind.INV:
                    reach, inv, new_windows = apply_fg(c, bound)
                    rewritten.extend([reach, inv])
                    windows.extend(new_windows)
                else:
                    reach, window = apply_ff(c, bound)
                    rewritten.append(reach)
                    windows.append(window)
            current = rewritten
            logger.debug("resolved_variable", var=t.name, constraints=len(current))

        current.sort(key=lambda c: constraint_sort_key(c.id))
        reach = tuple(c for c in current if c.kind == ConstraintKind.REACH)
        inv = tuple(c for c in current if c.kind == ConstraintKind.INV)
        out = ResolveOutput(
            reach=reach,
            inv=inv,
            tc_prime=tuple(windows),
            tc=flat.tc,
            sat_vars=tuple((c.id, sat_var_for(c.id)) for c in current),
            variable_mode=flat.variable_mode,
        )
        logger.info("resolve_complete", reach=len(reach), inv=len(inv), tc_prime=len(windows))
        return out


def resolve(flat: FlattenOutput) -> ResolveOutput:
    return ResolveService().resolve(flat)


def point_window(r: ResolveOutput, cid: str) -> Optional[SatWindow]:
    """The point window that pins a constraint's satisfaction time, if any"""
    for w in r.windows_of(r.sat_var(cid)):
        if w.is_point:
            return w
    return None


def sat_assignment(r: ResolveOutput, sym: Mapping[Var, int]) -> Dict[Var, int]:
    """Satisfaction times induced by an assignment of the symbolic variables.

    Reach constraints take the value of their point window; invariance
    constraints take their completion step.
    """
    values: Dict[Var, int] = dict(sym)
    for c in r.reach:
        w = point_window(r, c.id)
        if w is not None:
            values[r.sat_var(c.id)] = w.lo.evaluate(sym)
    for c in r.inv:
        try:
            values[r.sat_var(c.id)] = c.hi.evaluate(values)
        except UnboundVariableError:
            continue
    return values
