"""Tests for symbolic time resolution"""

import itertools

import pytest
from hypothesis import assume, given, settings

from src.exceptions import MalformedBoundError, UnknownVariableError
from src.models.constraint_models import (
    ConcreteConstraint, ConstraintKind, FlattenOutput, SatVar, SymExpr, SymVar, TaskConstraint, TimeVarBound,
)
from src.models.formula_models import Not, RegionRef
from src.parsers.spec_parser import parse
from src.services.flatten_service import assignment_space, enumerate_assignments, flatten, instantiate
from src.services.resolve_service import apply_ff, apply_fg, resolve, sat_assignment
from tests.oracles import constraint_holds, oracle_satisfies
from tests.strategies import formulas_with_signals

P, Q = RegionRef("p"), RegionRef("q")
T = SymVar("t")
ASSIGNMENT_LIMIT = 512
COMBINATION_LIMIT = 256


def tvar(name="t"):
    return SymExpr.of(SymVar(name))


def test_apply_fg_reach_and_stay():
    x = TaskConstraint("c1", ConstraintKind.INV, tvar() + 1, tvar() + 5, RegionRef("r1"))
    reach, inv, windows = apply_fg(x, TimeVarBound(1, 20, T))
    s_reach = SatVar("s_c1r")
    assert (reach.id, reach.kind, reach.lo, reach.hi) == ("c1r", ConstraintKind.REACH, SymExpr(2), SymExpr(21))
    assert (inv.id, inv.lo, inv.hi) == ("c1", SymExpr.of(s_reach), SymExpr.of(s_reach) + 4)
    assert [(w.var.name, str(w.lo), str(w.hi)) for w in windows] == [
        ("s_c1r", "t+1", "t+1"),
        ("s_c1", "t+2", "t+5"),
    ]


def test_apply_fg_point_interval():
    x = TaskConstraint("c1", ConstraintKind.INV, tvar(), tvar(), P)
    reach, inv, windows = apply_fg(x, TimeVarBound(4, 4, T))
    assert (reach.lo, reach.hi) == (SymExpr(4), SymExpr(4))
    assert inv.lo == inv.hi
    assert windows[1].lo == windows[1].hi == tvar()


def test_apply_fg_offset_window():
    x = TaskConstraint("c1", ConstraintKind.INV, tvar() + 2, tvar() + 7, Q)
    reach, inv, _ = apply_fg(x, TimeVarBound(0, 3, T))
    assert (reach.lo, reach.hi) == (SymExpr(2), SymExpr(5))
    assert inv.hi - inv.lo == SymExpr(5)


def test_apply_ff_interval_sum():
    x = TaskConstraint("c2", ConstraintKind.REACH, tvar() + 5, tvar() + 15, RegionRef("r2"))
    reach, window = apply_ff(x, TimeVarBound(1, 20, T))
    assert (reach.lo, reach.hi) == (SymExpr(6), SymExpr(35))
    assert (str(window.lo), str(window.hi), window.var.name) == ("t+5", "t+15", "s_c2")


def test_apply_ff_zero_width_variable_is_a_shift():
    x = TaskConstraint("c1", ConstraintKind.REACH, tvar() + 1, tvar() + 2, P)
    reach, _ = apply_ff(x, TimeVarBound(0, 0, T))
    assert (reach.lo, reach.hi) == (SymExpr(1), SymExpr(2))


def test_rules_reject_the_wrong_kind_and_coefficient():
    reach = TaskConstraint("c1", ConstraintKind.REACH, tvar(), tvar(), P)
    inv = TaskConstraint("c2", ConstraintKind.INV, tvar() + tvar(), tvar() + tvar(), P)
    with pytest.raises(MalformedBoundError):
        apply_fg(reach, TimeVarBound(0, 1, T))
    with pytest.raises(MalformedBoundError):
        apply_fg(inv, TimeVarBound(0, 1, T))


def test_running_example():
    r = resolve(flatten(parse("F[1,20](G[1,5](R1) & F[6,15](R2)) & G[1,35](!R3)")))
    c1r, c2 = r.reach
    c1, c3 = r.inv
    assert (c1r.id, c1r.lo, c1r.hi, c1r.prop) == ("c1r", SymExpr(2), SymExpr(21), RegionRef("R1"))
    assert (c2.id, c2.lo, c2.hi, c2.prop) == ("c2", SymExpr(7), SymExpr(35), RegionRef("R2"))
    assert (c3.id, c3.lo, c3.hi, c3.prop) == ("c3", SymExpr(1), SymExpr(35), Not(RegionRef("R3")))
    s = SymExpr.of(SatVar("s_c1r"))
    assert (c1.id, c1.lo, c1.hi) == ("c1", s, s + 4)
    assert {w.var.name for w in r.tc_prime} == {"s_c1r", "s_c1", "s_c2"}


def test_chained_interval_sums():
    r = resolve(flatten(parse("F[1,20](F[5,15](p))")))
    (c,) = r.reach
    assert (c.lo, c.hi) == (SymExpr(6), SymExpr(35))
    assert [(str(w.lo), str(w.hi)) for w in r.windows_of(SatVar("s_c1"))] == [("t1+t2", "t1+t2"), ("t2+5", "t2+15")]


def test_no_variables_is_identity():
    flat = flatten(parse("G[0,4](p) & q"))
    r = resolve(flat)
    assert (r.reach, r.inv, r.tc_prime) == (flat.reach, flat.inv, ())


def test_unknown_variable():
    stray = TaskConstraint("c1", ConstraintKind.REACH, tvar("t9"), tvar("t9"), P)
    with pytest.raises(UnknownVariableError):
        resolve(FlattenOutput(reach=(stray,), inv=(), tc=()))


def test_resolved_bounds_mention_no_symbolic_variables():
    r = resolve(flatten(parse("F[0,3](G[0,2](p) & F[1,2](G[0,1](q))) & G[0,2](F[0,1](p))")))
    for c in r.constraints:
        assert not c.lo.sym_vars() and not c.hi.sym_vars()


def test_apply_fg_pairs_the_stay_half_with_its_reach():
    x = TaskConstraint("c1", ConstraintKind.INV, tvar() + 1, tvar() + 5, P)
    reach, inv, _ = apply_fg(x, TimeVarBound(1, 20, T))
    assert reach.pair is None
    assert inv.pair == "c1r"
    assert inv.with_bounds(SymExpr(3), SymExpr(7)).pair == "c1r"


def test_resolved_invariances_record_their_reach_half():
    r = resolve(flatten(parse("F[0,5](G[0,2](p)) & F[0,9](q)")))
    pairs = {c.id: c.pair for c in r.inv}
    assert pairs == {"c1": "c1r"}
    assert all(c.pair is None for c in r.reach)


def test_sat_assignment_follows_point_windows():
    r = resolve(flatten(parse("F[1,20](G[1,5](R1))")))
    values = sat_assignment(r, {SymVar("t1"): 3})
    assert values[SatVar("s_c1r")] == 4
    assert values[SatVar("s_c1")] == 8


def _reach_candidates(r, c, sym, s):
    """Witness steps for c allowed by its bounds and windows at which its proposition holds"""
    lo, hi = c.lo.evaluate(sym), c.hi.evaluate(sym)
    for w in r.windows_of(r.sat_var(c.id)):
        lo, hi = max(lo, w.lo.evaluate(sym)), min(hi, w.hi.evaluate(sym))
    return [k for k in range(lo, hi + 1) if oracle_satisfies(c.prop, s, k)]


def _resolved_hold(r, sym, witnesses, s):
    values = dict(sym)
    values.update(witnesses)
    for c in r.inv:
        concrete = ConcreteConstraint(c.id, c.kind, c.lo.evaluate(values), c.hi.evaluate(values), c.prop)
        if not constraint_holds(concrete, s):
            return False
    return True


@pytest.mark.property_based
@pytest.mark.parametrize("mode", ["fresh", "shared"])
@given(formulas_with_signals(fine=False))
@settings(max_examples=500, deadline=None, derandomize=True)
def test_resolved_constraints_imply_flattened_ones(mode, case):
    f, s = case
    flat = flatten(f, variable_mode=mode)
    assert flat.variable_mode == mode
    r = resolve(flat)
    assume(assignment_space(flat.tc) <= ASSIGNMENT_LIMIT)
    for sym in enumerate_assignments(flat.tc, cap=ASSIGNMENT_LIMIT):
        candidates = [_reach_candidates(r, c, sym, s) for c in r.reach]
        if not all(candidates):
            continue
        sat_vars = [r.sat_var(c.id) for c in r.reach]
        for combo in itertools.islice(itertools.product(*candidates), COMBINATION_LIMIT):
            witnesses = dict(zip(sat_vars, combo))
            if _resolved_hold(r, sym, witnesses, s):
                for c in flat.constraints:
                    assert constraint_holds(instantiate(c, sym), s), c.id
