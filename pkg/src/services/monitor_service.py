"""
Monitor Service

Quantitative (robustness) and Boolean semantics over discrete-time signals.

``robustness`` evaluates bottom-up over whole signals with numpy sliding
windows; ``satisfies`` is an independent recursive Boolean evaluator. The two
agree in sign whenever the robustness is nonzero.
"""

from typing import Optional

import numpy as np
import structlog
from numpy.lib.stride_tricks import sliding_window_view

from src.exceptions import FragmentViolationError, SignalTooShortError, UnknownRegionError
from src.models.constraint_models import ConcreteConstraint, ConstraintKind
from src.models.environment_models import Environment, RegionShape
from src.models.formula_models import (
    Always, And, Const, Eventually, Formula, Linear, Not, Or, RegionRef, Until,
)
from src.models.trajectory_models import Trajectory
from src.services.fragment_service import horizon

logger = structlog.get_logger(__name__)


def _require_coverage(f: Formula, s: Trajectory, t: int) -> None:
    h = horizon(f)
    if not s.covers(t, t + h):
        raise SignalTooShortError(
            f"signal covers [{s.t0}, {s.end}] but evaluation at {t} needs [{t}, {t + h}]"
        )


def _region(env: Optional[Environment], name: str):
    if env is None:
        raise UnknownRegionError(f"region {name!r} used without an environment")
    return env.region(name)


def _linear_signal(p: Linear, s: Trajectory) -> np.ndarray:
    acc = np.zeros(len(s))
    for name, coef in p.terms:
        acc = acc + coef * s.channel(name)
    return acc - p.bound if p.is_lower else p.bound - acc


def _region_signal(p: RegionRef, s: Trajectory, env: Optional[Environment]) -> np.ndarray:
    region = _region(env, p.name)
    x, y = s.channel("px"), s.channel("py")
    if region.shape == RegionShape.CIRCLE:
        cx, cy = region.center
        return region.radius * region.radius - ((x - cx) * (x - cx) + (y - cy) * (y - cy))
    r = region.rect
    return np.minimum(np.minimum(x - r.xmin, r.xmax - x), np.minimum(y - r.ymin, r.ymax - y))


def _window(values: np.ndarray, lo: int, hi: int, reducer) -> np.ndarray:
    """out[i] = reducer(values[i+lo .. i+hi]); NaN where the window runs off the end"""
    n = len(values)
    padded = np.concatenate([values, np.full(hi, np.nan)])
    return reducer(sliding_window_view(padded[lo:], hi - lo + 1)[:n], axis=1)


def robustness_signal(f: Formula, s: Trajectory, env: Optional[Environment] = None) -> np.ndarray:
    """Robustness of f at every step of s (NaN where s is too short)"""
    if isinstance(f, Linear):
        return _linear_signal(f, s)
    if isinstance(f, RegionRef):
        return _region_signal(f, s, env)
    if isinstance(f, Const):
        return np.full(len(s), np.inf if f.value else -np.inf)
    if isinstance(f, Not):
        return -robustness_signal(f.arg, s, env)
    if isinstance(f, And):
        return np.minimum(robustness_signal(f.left, s, env), robustness_signal(f.right, s, env))
    if isinstance(f, Or):
        return np.maximum(robustness_signal(f.left, s, env), robustness_signal(f.right, s, env))
    if isinstance(f, Eventually):
        return _window(robustness_signal(f.arg, s, env), f.interval.lo, f.interval.hi, np.max)
    if isinstance(f, Always):
        return _window(robustness_signal(f.arg, s, env), f.interval.lo, f.interval.hi, np.min)
    if isinstance(f, Until):
        raise FragmentViolationError("until cannot be monitored")
    raise TypeError(f"not a formula node: {f!r}")


def robustness(f: Formula, s: Trajectory, t: int = 0, env: Optional[Environment] = None) -> float:
    """Quantitative satisfaction of f by s at absolute step t.

    Raises:
        SignalTooShortError: s does not cover [t, t + horizon(f)]
    """
    _require_coverage(f, s, t)
    return float(robustness_signal(f, s, env)[t - s.t0])


def _atom_holds(f: Formula, s: Trajectory, i: int, env: Optional[Environment]) -> bool:
    if isinstance(f, Linear):
        lhs = 0.0
        for name, coef in f.terms:
            lhs = lhs + coef * float(s.channel(name)[i])
        return lhs > f.bound if f.is_lower else lhs < f.bound
    if isinstance(f, RegionRef):
        region = _region(env, f.name)
        x, y = float(s.channel("px")[i]), float(s.channel("py")[i])
        if region.shape == RegionShape.CIRCLE:
            cx, cy = region.center
            return (x - cx) * (x - cx) + (y - cy) * (y - cy) < region.radius * region.radius
        r = region.rect
        return r.xmin < x < r.xmax and r.ymin < y < r.ymax
    return f.value


def _holds(f: Formula, s: Trajectory, t: int, env: Optional[Environment]) -> bool:
    if isinstance(f, (Linear, RegionRef, Const)):
        return _atom_holds(f, s, t - s.t0, env)
    if isinstance(f, Not):
        return not _holds(f.arg, s, t, env)
    if isinstance(f, And):
        return _holds(f.left, s, t, env) and _holds(f.right, s, t, env)
    if isinstance(f, Or):
        return _holds(f.left, s, t, env) or _holds(f.right, s, t, env)
    if isinstance(f, Eventually):
        return any(_holds(f.arg, s, k, env) for k in range(t + f.interval.lo, t + f.interval.hi + 1))
    if isinstance(f, Always):
        return all(_holds(f.arg, s, k, env) for k in range(t + f.interval.lo, t + f.interval.hi + 1))
    if isinstance(f, Until):
        raise FragmentViolationError("until cannot be monitored")
    raise TypeError(f"not a formula node: {f!r}")


def satisfies(f: Formula, s: Trajectory, t: int = 0, env: Optional[Environment] = None) -> bool:
    """Boolean satisfaction of f by s at absolute step t (atoms hold strictly)"""
    _require_coverage(f, s, t)
    return _holds(f, s, t, env)


def check_constraint(c: ConcreteConstraint, s: Trajectory, env: Optional[Environment] = None) -> bool:
    """Direct scan of an instantiated reachability / invariance constraint"""
    if not s.covers(c.lo, c.hi):
        raise SignalTooShortError(f"constraint {c.id} spans [{c.lo}, {c.hi}] beyond the signal")
    steps = (_holds(c.prop, s, k, env) for k in range(c.lo, c.hi + 1))
    return any(steps) if c.kind == ConstraintKind.REACH else all(steps)


def first_witness(prop: Formula, s: Trajectory, lo: int, hi: int,
                  env: Optional[Environment] = None) -> Optional[int]:
    """Earliest step in [lo, hi] (clipped to s) where prop holds"""
    for k in range(max(lo, s.t0), min(hi, s.end) + 1):
        if _holds(prop, s, k, env):
            return k
    return None


def holds_at(prop: Formula, s: Trajectory, t: int, env: Optional[Environment] = None) -> bool:
    """Boolean value of a propositional formula at one absolute step"""
    if not s.covers(t, t):
        raise SignalTooShortError(f"step {t} lies outside [{s.t0}, {s.end}]")
    return _holds(prop, s, t, env)
