"""Tests for time slicing and atomic task selection"""

import pytest
from hypothesis import given, settings

from src.models.formula_models import TRUE, And, Interval, Not, RegionRef, conjoin
from src.models.schedule_models import ActiveConstraint
from src.services.slicing_service import next_atomic, slice_constraints
from tests.strategies import active_constraints

R1, R3 = RegionRef("R1"), RegionRef("R3")


def test_running_example_slices():
    active = [
        ActiveConstraint("c1r", "reach", 2, 21, R1),
        ActiveConstraint("c3", "inv", 1, 35, Not(R3)),
    ]
    slices = slice_constraints(active)
    assert [(s.interval.lo, s.interval.hi) for s in slices] == [(1, 1), (2, 21), (22, 35)]
    assert [s.sources for s in slices] == [("c3",), ("c1r", "c3"), ("c3",)]
    assert slices[1].reach_prop == R1
    assert slices[1].inv_prop == Not(R3)


def test_first_atomic_task_is_the_earliest_slice():
    active = [
        ActiveConstraint("c1r", "reach", 2, 21, R1),
        ActiveConstraint("c3", "inv", 1, 35, Not(R3)),
    ]
    task = next_atomic(slice_constraints(active))
    assert task.interval == Interval(1, 1)
    assert task.reach_prop is None
    assert task.inv_prop == Not(R3)
    assert task.sources == (("c3", "inv"),)
    assert task.describe() == "G[1,1](!R3)"


def test_gaps_become_empty_slices():
    active = [
        ActiveConstraint("c1", "reach", 0, 2, R1),
        ActiveConstraint("c2", "reach", 5, 6, R3),
    ]
    slices = slice_constraints(active)
    assert [(s.interval.lo, s.interval.hi, s.empty) for s in slices] == [(0, 2, False), (3, 4, True), (5, 6, False)]


def test_co_active_constraints_are_conjoined():
    active = [
        ActiveConstraint("c2", "reach", 0, 3, R3),
        ActiveConstraint("c1", "reach", 0, 3, R1),
    ]
    (only,) = slice_constraints(active)
    assert only.reach_sources == ("c1", "c2")
    assert only.reach_prop == And(R1, R3)


def test_repeated_propositions_are_conjoined_once():
    assert conjoin(R1, R1, R3, TRUE, R1) == And(R1, R3)
    assert conjoin(R1, R1) == R1
    active = [
        ActiveConstraint("c1", "reach", 0, 3, R1),
        ActiveConstraint("c2", "reach", 0, 3, R1),
        ActiveConstraint("c3", "inv", 0, 3, Not(R3)),
        ActiveConstraint("c4", "inv", 0, 3, Not(R3)),
    ]
    task = next_atomic(slice_constraints(active))
    assert task.reach_sources == ("c1", "c2")
    assert task.describe() == "F[0,3](R1) & G[0,3](!R3)"


def test_tie_on_start_prefers_the_earlier_end():
    active = [
        ActiveConstraint("c1", "reach", 0, 5, R1),
        ActiveConstraint("c2", "inv", 0, 2, R3),
    ]
    task = next_atomic(slice_constraints(active))
    assert task.interval == Interval(0, 2)
    assert task.sources == (("c1", "reach"), ("c2", "inv"))


def test_no_active_constraints():
    assert slice_constraints([]) == []
    with pytest.raises(ValueError):
        next_atomic([])


@pytest.mark.property_based
@given(active_constraints())
@settings(max_examples=500, deadline=None, derandomize=True)
def test_slices_partition_the_range_with_constant_active_sets(active):
    slices = slice_constraints(active)
    t_min, t_max = min(c.lo for c in active), max(c.hi for c in active)
    assert slices[0].interval.lo == t_min
    assert slices[-1].interval.hi == t_max
    for left, right in zip(slices, slices[1:]):
        assert right.interval.lo == left.interval.hi + 1
    for s in slices:
        expected = {c.id for c in active if c.lo <= s.interval.lo <= c.hi}
        for k in range(s.interval.lo, s.interval.hi + 1):
            assert {c.id for c in active if c.lo <= k <= c.hi} == expected
        assert set(s.sources) == expected
    for left, right in zip(slices, slices[1:]):
        assert set(left.sources) != set(right.sources)


@pytest.mark.property_based
@given(active_constraints())
@settings(max_examples=200, deadline=None, derandomize=True)
def test_next_atomic_starts_at_the_earliest_constraint(active):
    task = next_atomic(slice_constraints(active))
    assert task.interval.lo == min(c.lo for c in active)
