"""
Slicing Service

Splits the currently active constraints into time slices with a constant set
of active constraints, and picks the next atomic task from them.
"""

from typing import List, Sequence

import structlog

from src.models.constraint_models import ConstraintKind, constraint_sort_key
from src.models.formula_models import Interval, conjoin
from src.models.schedule_models import ActiveConstraint, AtomicTask, TimeSlice

logger = structlog.get_logger(__name__)


def _make_slice(lo: int, hi: int, active: List[ActiveConstraint]) -> TimeSlice:
    active = sorted(active, key=lambda c: constraint_sort_key(c.id))
    reach = [c for c in active if c.kind == ConstraintKind.REACH]
    inv = [c for c in active if c.kind == ConstraintKind.INV]
    return TimeSlice(
        interval=Interval(lo, hi),
        reach_sources=tuple(c.id for c in reach),
        inv_sources=tuple(c.id for c in inv),
        reach_prop=conjoin(*(c.prop for c in reach)) if reach else None,
        inv_prop=conjoin(*(c.prop for c in inv)) if inv else None,
    )


def slice_constraints(active: Sequence[ActiveConstraint]) -> List[TimeSlice]:
    """Partition [t_min, t_max] into maximal slices with a constant active set.

    Steps covered by no constraint form empty slices, so the result is a
    partition of the whole range.
    """
    if not active:
        return []
    t_min = min(c.lo for c in active)
    t_max = max(c.hi for c in active)

    slices: List[TimeSlice] = []
    start = t_min
    current = frozenset(c.id for c in active if c.lo <= t_min <= c.hi)
    for k in range(t_min + 1, t_max + 1):
        at_k = frozenset(c.id for c in active if c.lo <= k <= c.hi)
        if at_k != current:
            slices.append(_make_slice(start, k - 1, [c for c in active if c.id in current]))
            start, current = k, at_k
    slices.append(_make_slice(start, t_max, [c for c in active if c.id in current]))

    logger.debug("sliced", constraints=len(active), slices=len(slices), t_min=t_min, t_max=t_max)
    return slices


def next_atomic(slices: Sequence[TimeSlice]) -> AtomicTask:
    """Earliest non-empty slice as an atomic task (ties: end, then lowest id).

    Raises:
        ValueError: no slice carries a constraint
    """
    candidates = [s for s in slices if not s.empty]
    if not candidates:
        raise ValueError("no active constraints to build an atomic task from")
    chosen = min(candidates, key=lambda s: (s.interval.lo, s.interval.hi,
                                            min(constraint_sort_key(cid) for cid in s.sources)))
    sources = tuple((cid, "reach") for cid in chosen.reach_sources) + \
        tuple((cid, "inv") for cid in chosen.inv_sources)
    return AtomicTask(interval=chosen.interval, reach_prop=chosen.reach_prop,
                      inv_prop=chosen.inv_prop, sources=sources)
