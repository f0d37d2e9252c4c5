"""
Brute-force reference semantics.

Evaluates formulas straight from the recursive definitions, one step at a
time, with plain Python floats. Used to cross-check the vectorized monitor
and the flatten / resolve rewrites.
"""

import math

from src.models.constraint_models import ConcreteConstraint, ConstraintKind
from src.models.environment_models import RegionShape
from src.models.formula_models import Always, And, Const, Eventually, Linear, Not, Or, RegionRef


def _linear_lhs(p: Linear, s, t: int) -> float:
    return sum(coef * s.value(name, t) for name, coef in p.terms)


def _region_margin(p: RegionRef, s, t: int, env) -> float:
    region = env.region(p.name)
    x, y = s.value("px", t), s.value("py", t)
    if region.shape == RegionShape.CIRCLE:
        cx, cy = region.center
        return region.radius ** 2 - ((x - cx) ** 2 + (y - cy) ** 2)
    r = region.rect
    return min(x - r.xmin, r.xmax - x, y - r.ymin, r.ymax - y)


def oracle_robustness(f, s, t: int, env=None) -> float:
    if isinstance(f, Const):
        return math.inf if f.value else -math.inf
    if isinstance(f, Linear):
        lhs = _linear_lhs(f, s, t)
        return lhs - f.bound if f.is_lower else f.bound - lhs
    if isinstance(f, RegionRef):
        return _region_margin(f, s, t, env)
    if isinstance(f, Not):
        return -oracle_robustness(f.arg, s, t, env)
    if isinstance(f, And):
        return min(oracle_robustness(f.left, s, t, env), oracle_robustness(f.right, s, t, env))
    if isinstance(f, Or):
        return max(oracle_robustness(f.left, s, t, env), oracle_robustness(f.right, s, t, env))
    steps = range(t + f.interval.lo, t + f.interval.hi + 1)
    values = [oracle_robustness(f.arg, s, k, env) for k in steps]
    if isinstance(f, Eventually):
        return max(values)
    if isinstance(f, Always):
        return min(values)
    raise TypeError(f)


def oracle_satisfies(f, s, t: int, env=None) -> bool:
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Linear):
        lhs = _linear_lhs(f, s, t)
        return lhs > f.bound if f.is_lower else lhs < f.bound
    if isinstance(f, RegionRef):
        return _region_margin(f, s, t, env) > 0
    if isinstance(f, Not):
        return not oracle_satisfies(f.arg, s, t, env)
    if isinstance(f, And):
        return oracle_satisfies(f.left, s, t, env) and oracle_satisfies(f.right, s, t, env)
    if isinstance(f, Or):
        return oracle_satisfies(f.left, s, t, env) or oracle_satisfies(f.right, s, t, env)
    steps = range(t + f.interval.lo, t + f.interval.hi + 1)
    if isinstance(f, Eventually):
        return any(oracle_satisfies(f.arg, s, k, env) for k in steps)
    if isinstance(f, Always):
        return all(oracle_satisfies(f.arg, s, k, env) for k in steps)
    raise TypeError(f)


def constraint_holds(c: ConcreteConstraint, s, env=None) -> bool:
    """Direct scan of an instantiated constraint (empty intervals never hold)"""
    if c.lo > c.hi:
        return False
    steps = [oracle_satisfies(c.prop, s, k, env) for k in range(c.lo, c.hi + 1)]
    return any(steps) if c.kind == ConstraintKind.REACH else all(steps)
