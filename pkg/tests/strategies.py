"""Hypothesis strategies for formulas, signals and active constraint sets"""

from hypothesis import strategies as st

from src.models.formula_models import (
    COMPARISONS, Always, And, Const, Eventually, Interval, Linear, Not, Or,
)
from src.models.schedule_models import ActiveConstraint
from src.models.trajectory_models import Trajectory
from src.services.fragment_service import horizon

CHANNELS = ("x", "y")

_TERMS = [(("x", 1.0),), (("y", 1.0),), (("x", 1.0), ("y", -1.0)), (("x", 2.0),)]
_BOUNDS = [-1.0, -0.5, 0.0, 0.5, 1.0]


def linear_predicates():
    return st.builds(Linear, terms=st.sampled_from(_TERMS), op=st.sampled_from(COMPARISONS),
                     bound=st.sampled_from(_BOUNDS))


def propositions(max_leaves: int = 4):
    atoms = st.one_of(linear_predicates(), st.sampled_from([Const(True), Const(False)]))
    return st.recursive(
        atoms,
        lambda inner: st.one_of(
            st.builds(Not, inner),
            st.builds(And, inner, inner),
            st.builds(Or, inner, inner),
        ),
        max_leaves=max_leaves,
    )


def intervals(max_lo: int = 2, max_width: int = 2):
    return st.tuples(st.integers(0, max_lo), st.integers(0, max_width)).map(
        lambda lw: Interval(lw[0], lw[0] + lw[1])
    )


def fragment_formulas(max_depth: int = 3):
    """Formulas whose Not / Or sit below every temporal operator"""
    props = propositions()
    if max_depth == 0:
        return props
    sub = fragment_formulas(max_depth - 1)
    return st.one_of(
        props,
        st.builds(Eventually, intervals(), sub),
        st.builds(Always, intervals(), sub),
        st.builds(And, sub, sub),
    )


def stl_formulas(max_depth: int = 3):
    """Until-free formulas with negation and disjunction anywhere"""
    props = propositions()
    if max_depth == 0:
        return props
    sub = stl_formulas(max_depth - 1)
    return st.one_of(
        props,
        st.builds(Eventually, intervals(), sub),
        st.builds(Always, intervals(), sub),
        st.builds(And, sub, sub),
        st.builds(Or, sub, sub),
        st.builds(Not, sub),
    )


_COARSE = st.sampled_from([-1.5, -0.75, -0.25, 0.25, 0.75, 1.5])
_FINE = st.floats(-2.0, 2.0, allow_nan=False, allow_infinity=False)


@st.composite
def signals(draw, length: int, fine: bool = True):
    values = _FINE if fine else _COARSE
    columns = {ch: draw(st.lists(values, min_size=length, max_size=length)) for ch in CHANNELS}
    return Trajectory.from_columns(columns)


@st.composite
def formulas_with_signals(draw, formulas=None, fine: bool = True):
    """A formula and a signal long enough to evaluate it at step 0"""
    f = draw(formulas if formulas is not None else fragment_formulas())
    length = horizon(f) + 1 + draw(st.integers(0, 2))
    return f, draw(signals(length, fine))


@st.composite
def active_constraints(draw, max_count: int = 6, max_step: int = 30):
    count = draw(st.integers(1, max_count))
    out = []
    for i in range(1, count + 1):
        lo = draw(st.integers(0, max_step))
        hi = draw(st.integers(lo, max_step))
        kind = draw(st.sampled_from(["reach", "inv"]))
        out.append(ActiveConstraint(id=f"c{i}", kind=kind, lo=lo, hi=hi, prop=Linear((("x", 1.0),), ">", float(i))))
    return out
