"""Tests for fragment validation and structural queries"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.exceptions import FragmentViolationError
from src.models.environment_models import Environment
from src.models.formula_models import And, Linear, Not, Or, RegionRef
from src.parsers.spec_parser import parse
from src.services.benchmark_service import BENCHMARKS
from src.services.fragment_service import (
    desugar_regions, ensure_fragment, horizon, nesting_depth, region_names, to_nnf, validate_fragment,
)
from src.services.planner_service import prop_robustness


@pytest.mark.parametrize("text", [
    "F[0,5](!R1 | x >= 2)",
    "F[1,20](G[1,5](R1) & F[6,15](R2)) & G[1,35](!R3)",
    "R1",
    "G[0,3](true)",
])
def test_fragment_accepts(text):
    assert validate_fragment(parse(text)).ok


@pytest.mark.parametrize("text, path, node", [
    ("!F[0,1](p)", "/", "Not"),
    ("F[0,2](p) | q", "/", "Or"),
    ("G[0,4](p & !G[0,1](q))", "/0/1", "Not"),
    ("F[0,3](a U[0,2] b)", "/0", "Until"),
])
def test_fragment_rejects_with_path(text, path, node):
    report = validate_fragment(parse(text))
    assert not report.ok
    assert report.violations[0].path == path
    assert report.violations[0].node == node


def test_ensure_fragment_raises_with_paths():
    with pytest.raises(FragmentViolationError) as exc:
        ensure_fragment(parse("F[0,2](p) | G[0,1](q)"))
    assert exc.value.paths == ["/"]


def test_only_the_outermost_offender_is_reported():
    report = validate_fragment(parse("!(F[0,1](a) | F[0,1](b))"))
    assert [v.path for v in report.violations] == ["/"]


def test_horizon_and_depth_of_running_example():
    f = parse("F[1,20](G[1,5](R1) & F[6,15](R2)) & G[1,35](!R3)")
    assert horizon(f) == 35
    assert nesting_depth(f) == 1


def test_bare_proposition_has_zero_horizon_and_depth():
    f = parse("R1 & x > 2")
    assert horizon(f) == 0
    assert nesting_depth(f) == 0


@pytest.mark.parametrize("name, expected_horizon, expected_depth", [
    ("reach_avoid", 40, 0),
    ("visit_pair_avoid", 40, 1),
    ("visit_chain", 65, 3),
    ("stay_reach_avoid", 40, 1),
    ("visit_then_stay", 45, 2),
])
def test_benchmark_horizon_and_depth(name, expected_horizon, expected_depth):
    spec = next(b for b in BENCHMARKS if b.name == name)
    f = parse(spec.formula)
    assert horizon(f) == expected_horizon
    assert nesting_depth(f) == expected_depth


def test_to_nnf_pushes_negation_to_literals():
    p = parse("!(x >= 1 & (R1 | !y < 2))")
    assert to_nnf(p) == Or(
        Linear((("x", 1.0),), "<=", 1.0),
        And(Not(RegionRef("R1")), Linear((("y", 1.0),), "<", 2.0)),
    )


def test_to_nnf_rejects_temporal_input():
    with pytest.raises(FragmentViolationError):
        to_nnf(parse("F[0,1](p)"))


def test_region_names_are_sorted_and_unique():
    assert region_names(parse("F[0,3](R2 & R1) & G[0,3](!R1)")) == ["R1", "R2"]


def test_desugared_rectangle_is_four_halfplanes(env):
    f = desugar_regions(parse("F[0,3](R1)"), env)
    atoms = [a for a in _atoms(f.arg)]
    assert len(atoms) == 4
    assert all(isinstance(a, Linear) for a in atoms)


def _atoms(p):
    if isinstance(p, (And, Or)):
        yield from _atoms(p.left)
        yield from _atoms(p.right)
    elif isinstance(p, Not):
        yield from _atoms(p.arg)
    else:
        yield p


@given(st.floats(0.0, 10.0), st.floats(0.0, 10.0), st.sampled_from(["R1", "R2", "O1", "!R3"]))
@settings(max_examples=200, deadline=None, derandomize=True)
def test_desugared_regions_keep_robustness(env, px, py, text):
    p = parse(text)
    state = (px, py, 0.0, 0.0)
    assert prop_robustness(desugar_regions(p, env), state, env) == pytest.approx(prop_robustness(p, state, env))


def test_circles_stay_region_references():
    env = Environment.model_validate({
        "bounds": {"xmin": 0, "xmax": 10, "ymin": 0, "ymax": 10},
        "regions": [{"name": "C", "shape": "circle", "center": [5, 5], "radius": 1}],
    })
    assert desugar_regions(RegionRef("C"), env) == RegionRef("C")
