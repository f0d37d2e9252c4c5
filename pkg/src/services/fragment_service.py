"""
Fragment Service

Structural queries over formulas: fragment validation, horizon, nesting depth,
and negation normal form for propositional subformulas.
"""

from dataclasses import dataclass, field
from typing import List, Tuple

import structlog

from src.exceptions import FragmentViolationError
from src.models.environment_models import RegionShape
from src.models.formula_models import (
    ATOM_NODES, TEMPORAL_NODES, Always, And, Const, Eventually, Formula, Linear, Not, Or, RegionRef,
    Until, children,
)

logger = structlog.get_logger(__name__)

Path = Tuple[int, ...]


def format_path(path: Path) -> str:
    """Child-index path, '/' for the root"""
    return "/" + "/".join(str(i) for i in path)


@dataclass
class Violation:
    path: str
    node: str
    reason: str


@dataclass
class FragmentReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(f"{v.path}: {v.reason}" for v in self.violations)


def has_temporal(f: Formula) -> bool:
    if isinstance(f, TEMPORAL_NODES):
        return True
    return any(has_temporal(c) for c in children(f))


def is_propositional(f: Formula) -> bool:
    return not has_temporal(f)


def validate_fragment(f: Formula) -> FragmentReport:
    """Check that Not/Or only sit below all temporal operators and Until is absent"""
    report = FragmentReport()

    def visit(node: Formula, path: Path):
        if isinstance(node, Until):
            report.violations.append(Violation(format_path(path), "Until", "until is not supported"))
        elif isinstance(node, (Not, Or)) and has_temporal(node):
            kind = type(node).__name__
            report.violations.append(
                Violation(format_path(path), kind, f"{kind.lower()} over a temporal subformula")
            )
            # report the outermost offender only
            return
        for i, c in enumerate(children(node)):
            visit(c, path + (i,))

    visit(f, ())
    return report


def ensure_fragment(f: Formula) -> None:
    """Raise FragmentViolationError unless f is in the fragment"""
    report = validate_fragment(f)
    if not report.ok:
        logger.warning("fragment_violation", violations=report.summary())
        raise FragmentViolationError(
            f"formula outside the supported fragment: {report.summary()}",
            [v.path for v in report.violations],
        )


def horizon(f: Formula) -> int:
    """Largest sum of interval upper bounds along any root-to-leaf path"""
    if isinstance(f, (Eventually, Always)):
        return f.interval.hi + horizon(f.arg)
    if isinstance(f, Until):
        return f.interval.hi + max(horizon(f.left), horizon(f.right))
    return max((horizon(c) for c in children(f)), default=0)


def temporal_count(f: Formula) -> int:
    """Most temporal operators on one root-to-leaf path"""
    own = 1 if isinstance(f, TEMPORAL_NODES) else 0
    return own + max((temporal_count(c) for c in children(f)), default=0)


def nesting_depth(f: Formula) -> int:
    """Temporal nesting depth: 0 for non-nested formulas"""
    return max(temporal_count(f) - 1, 0)


def to_nnf(p: Formula, negate: bool = False) -> Formula:
    """Negation normal form of a propositional formula.

    Negated linear predicates flip their comparison; negated region
    references stay as literals.
    """
    if isinstance(p, Not):
        return to_nnf(p.arg, not negate)
    if isinstance(p, And):
        left, right = to_nnf(p.left, negate), to_nnf(p.right, negate)
        return Or(left, right) if negate else And(left, right)
    if isinstance(p, Or):
        left, right = to_nnf(p.left, negate), to_nnf(p.right, negate)
        return And(left, right) if negate else Or(left, right)
    if isinstance(p, Linear):
        return p.negated() if negate else p
    if isinstance(p, Const):
        return Const(not p.value) if negate else p
    if isinstance(p, RegionRef):
        return Not(p) if negate else p
    raise FragmentViolationError(f"not a propositional formula: {type(p).__name__}")


def atoms(f: Formula) -> List[Formula]:
    """Atomic propositions in left-to-right order"""
    if isinstance(f, ATOM_NODES):
        return [f]
    out: List[Formula] = []
    for c in children(f):
        out.extend(atoms(c))
    return out


def region_names(f: Formula) -> List[str]:
    return sorted({a.name for a in atoms(f) if isinstance(a, RegionRef)})


def desugar_regions(f: Formula, env) -> Formula:
    """Replace rectangle references by the conjunction of their four halfplanes.

    Circles have no linear form and stay as references. The result has the
    same robustness as the original at every state.
    """
    if isinstance(f, RegionRef):
        region = env.region(f.name)
        if region.shape == RegionShape.CIRCLE:
            return f
        r = region.rect
        return And(
            And(Linear((("px", 1.0),), ">", r.xmin), Linear((("px", 1.0),), "<", r.xmax)),
            And(Linear((("py", 1.0),), ">", r.ymin), Linear((("py", 1.0),), "<", r.ymax)),
        )
    if isinstance(f, Not):
        return Not(desugar_regions(f.arg, env))
    if isinstance(f, And):
        return And(desugar_regions(f.left, env), desugar_regions(f.right, env))
    if isinstance(f, Or):
        return Or(desugar_regions(f.left, env), desugar_regions(f.right, env))
    if isinstance(f, Eventually):
        return Eventually(f.interval, desugar_regions(f.arg, env))
    if isinstance(f, Always):
        return Always(f.interval, desugar_regions(f.arg, env))
    if isinstance(f, Until):
        return Until(f.interval, desugar_regions(f.left, env), desugar_regions(f.right, env))
    return f
