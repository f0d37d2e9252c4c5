"""Tests for robustness and Boolean satisfaction"""

import math

import numpy as np
import pytest
from hypothesis import given, settings

from src.exceptions import FragmentViolationError, SignalTooShortError, UnknownRegionError
from src.models.constraint_models import ConcreteConstraint, ConstraintKind
from src.models.formula_models import Linear
from src.models.trajectory_models import Trajectory
from src.parsers.spec_parser import parse
from src.services.monitor_service import (
    check_constraint, first_witness, holds_at, robustness, robustness_signal, satisfies,
)
from tests.oracles import oracle_robustness, oracle_satisfies
from tests.strategies import formulas_with_signals, stl_formulas

ABOVE_THREE = Linear((("x", 1.0),), ">=", 3.0)


def test_always_over_distance_signal():
    f = parse("G[0,3](x >= 3.0)")
    s = Trajectory.from_values([3.0, 2.5, 3.0, 3.5])
    assert robustness(f, s, 0) == -0.5
    assert not satisfies(f, s, 0)


def test_eventually_takes_the_best_step():
    f = parse("F[0,3](x >= 3.0)")
    s = Trajectory.from_values([3.0, 2.5, 3.0, 3.5])
    assert robustness(f, s, 0) == 0.5
    assert satisfies(f, s, 0)


def test_evaluation_at_a_later_step():
    f = parse("F[0,1](x > 3.0)")
    s = Trajectory.from_values([1.0, 2.0, 3.25, 4.0], t0=10)
    assert robustness(f, s, 11) == 0.25
    assert robustness(f, s, 10) == -1.0


def test_robustness_signal_is_nan_past_the_end():
    f = parse("G[0,2](x > 0)")
    values = robustness_signal(f, Trajectory.from_values([1.0, 2.0, 3.0, 4.0]))
    assert values[:2].tolist() == [1.0, 2.0]
    assert np.isnan(values[2:]).all()


def test_region_robustness(env):
    s = Trajectory.from_columns({"px": [2.0, 5.0], "py": [5.0, 5.0]})
    assert robustness(parse("R1"), s, 0, env) == 1.0
    assert robustness(parse("!O1"), s, 1, env) == -1.0


def test_constants_are_infinite():
    s = Trajectory.from_values([0.0])
    assert robustness(parse("true"), s, 0) == math.inf
    assert robustness(parse("false"), s, 0) == -math.inf


def test_short_signal_raises():
    with pytest.raises(SignalTooShortError):
        robustness(parse("G[0,5](x > 0)"), Trajectory.from_values([1.0, 1.0]), 0)
    with pytest.raises(SignalTooShortError):
        satisfies(parse("F[0,1](x > 0)"), Trajectory.from_values([1.0, 1.0]), 1)


def test_until_cannot_be_monitored():
    with pytest.raises(FragmentViolationError):
        robustness(parse("a U[0,1] b"), Trajectory.from_values([1.0, 1.0]), 0)


def test_region_without_environment_raises():
    s = Trajectory.from_columns({"px": [2.0], "py": [5.0]})
    with pytest.raises(UnknownRegionError):
        robustness(parse("R1"), s, 0)


def test_atoms_hold_strictly():
    s = Trajectory.from_values([3.0])
    assert robustness(ABOVE_THREE, s, 0) == 0.0
    assert not satisfies(ABOVE_THREE, s, 0)


def test_check_constraint_scans_its_interval():
    s = Trajectory.from_values([1.0, 4.0, 4.0, 1.0])
    assert check_constraint(ConcreteConstraint("c1", ConstraintKind.REACH, 0, 3, ABOVE_THREE), s)
    assert check_constraint(ConcreteConstraint("c2", ConstraintKind.INV, 1, 2, ABOVE_THREE), s)
    assert not check_constraint(ConcreteConstraint("c3", ConstraintKind.INV, 1, 3, ABOVE_THREE), s)
    with pytest.raises(SignalTooShortError):
        check_constraint(ConcreteConstraint("c4", ConstraintKind.INV, 2, 4, ABOVE_THREE), s)


def test_first_witness_and_holds_at():
    s = Trajectory.from_values([1.0, 4.0, 4.0, 1.0])
    assert first_witness(ABOVE_THREE, s, 0, 3) == 1
    assert first_witness(ABOVE_THREE, s, 3, 9) is None
    assert holds_at(ABOVE_THREE, s, 2)
    with pytest.raises(SignalTooShortError):
        holds_at(ABOVE_THREE, s, 4)


@pytest.mark.property_based
@given(formulas_with_signals(stl_formulas()))
@settings(max_examples=1000, deadline=None, derandomize=True)
def test_robustness_matches_reference(case):
    f, s = case
    assert robustness(f, s, 0) == pytest.approx(oracle_robustness(f, s, 0), abs=1e-9)


@pytest.mark.property_based
@given(formulas_with_signals(stl_formulas()))
@settings(max_examples=1000, deadline=None, derandomize=True)
def test_satisfaction_matches_reference(case):
    f, s = case
    assert satisfies(f, s, 0) == oracle_satisfies(f, s, 0)


@pytest.mark.property_based
@given(formulas_with_signals(stl_formulas()))
@settings(max_examples=500, deadline=None, derandomize=True)
def test_robustness_sign_agrees_with_satisfaction(case):
    f, s = case
    rho = robustness(f, s, 0)
    if rho > 0:
        assert satisfies(f, s, 0)
    elif rho < 0:
        assert not satisfies(f, s, 0)
