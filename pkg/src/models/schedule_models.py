"""
Scheduling models: precedence order, time slices, atomic tasks and the
records the scheduler emits while it runs
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Tuple

from pydantic import BaseModel, Field

from src.models.formula_models import Formula, Interval, TRUE, Always, And, Eventually
from src.models.trajectory_models import Trajectory


class PlanStatus(str, Enum):
    """Outcome of a scheduling run"""
    SUCCESS = "success"
    PARTIAL = "partial"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class PrecedenceOrder:
    """Transitively closed strict order over constraint ids"""

    pairs: FrozenSet[Tuple[str, str]] = frozenset()

    def precedes(self, first: str, second: str) -> bool:
        return (first, second) in self.pairs

    def predecessors(self, cid: str) -> List[str]:
        return sorted(a for a, b in self.pairs if b == cid)

    def unordered(self, a: str, b: str) -> bool:
        return not self.precedes(a, b) and not self.precedes(b, a)


@dataclass(frozen=True)
class ActiveConstraint:
    """Constraint with a concrete interval, ready to slice"""

    id: str
    kind: str
    lo: int
    hi: int
    prop: Formula


@dataclass(frozen=True)
class TimeSlice:
    """Maximal sub-interval with a constant set of active constraints"""

    interval: Interval
    reach_sources: Tuple[str, ...] = ()
    inv_sources: Tuple[str, ...] = ()
    reach_prop: Optional[Formula] = None
    inv_prop: Optional[Formula] = None

    @property
    def empty(self) -> bool:
        return not self.reach_sources and not self.inv_sources

    @property
    def sources(self) -> Tuple[str, ...]:
        return self.reach_sources + self.inv_sources


@dataclass(frozen=True)
class AtomicTask:
    """F[a,b](reach_prop) & G[a,b](inv_prop); an absent part reads as true"""

    interval: Interval
    reach_prop: Optional[Formula] = None
    inv_prop: Optional[Formula] = None
    sources: Tuple[Tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.reach_prop is None and self.inv_prop is None:
            raise ValueError("atomic task needs a reach or an invariance part")

    @property
    def reach_sources(self) -> Tuple[str, ...]:
        return tuple(cid for cid, role in self.sources if role == "reach")

    @property
    def inv_sources(self) -> Tuple[str, ...]:
        return tuple(cid for cid, role in self.sources if role == "inv")

    def formula(self, offset: int = 0) -> Formula:
        """The task as a formula, intervals shifted by -offset"""
        iv = Interval(self.interval.lo - offset, self.interval.hi - offset)
        parts = []
        if self.reach_prop is not None:
            parts.append(Eventually(iv, self.reach_prop))
        if self.inv_prop is not None:
            parts.append(Always(iv, self.inv_prop))
        return parts[0] if len(parts) == 1 else And(parts[0], parts[1])

    def describe(self) -> str:
        from src.parsers.spec_parser import format_formula
        return format_formula(self.formula())


def filler_task(lo: int, hi: int) -> AtomicTask:
    """G[lo,hi](true): keeps the trajectory continuous without constraining it"""
    return AtomicTask(interval=Interval(lo, hi), inv_prop=TRUE, sources=())


@dataclass(frozen=True)
class HoldRequirement:
    """After the reach witness w, prop must hold on w .. w + steps"""

    prop: Formula
    steps: int
    source: str = ""


@dataclass(frozen=True)
class ReachGoal:
    """Pending reach constraint a plan must keep reachable by its deadline"""

    prop: Formula
    deadline: int
    source: str = ""


@dataclass
class PlanSegment:
    """Planner output for one atomic task"""

    trajectory: Trajectory
    reach_witness: Optional[int]
    robustness_margin: float
    expansions: int = 0


@dataclass
class PlanFailure:
    """Planner search exhausted or capped"""

    reason: str
    best_margin: float
    expansions: int = 0


class Binding(BaseModel):
    """Satisfaction times bound so far"""
    assignments: Dict[str, int] = Field(default_factory=dict, description="SatVar name -> step")


class ScheduleTraceRecord(BaseModel):
    """One scheduler iteration"""
    iteration: int = Field(..., description="Loop counter")
    task: str = Field(..., description="Atomic task as formula text")
    interval: Tuple[int, int] = Field(..., description="Task interval")
    attempt: str = Field(..., description="merged, relaxed, inv-only, gap or filler")
    sources: List[str] = Field(default_factory=list, description="Constraint ids realized")
    planner_status: str = Field(..., description="ok or failure reason")
    expansions: int = Field(0, description="Planner node expansions")
    committed: Optional[Tuple[int, int]] = Field(None, description="Committed step range")
    witness: Optional[int] = Field(None, description="Reach witness step")
    bindings_added: Dict[str, int] = Field(default_factory=dict)
    satisfied_added: List[str] = Field(default_factory=list)


class FailureReport(BaseModel):
    """Why a run stopped early"""
    reason: str = Field(..., description="Machine-readable failure kind")
    message: str = Field("", description="Human-readable detail")
    failed_task: Optional[str] = Field(None, description="Atomic task text")
    cursor: int = Field(..., description="Last committed step (-1 when nothing is committed)")
    active_constraints: List[str] = Field(default_factory=list)
    best_margin: Optional[float] = Field(None, description="Best partial margin of the planner frontier")


@dataclass
class ScheduleResult:
    """Output of the scheduling loop"""

    status: PlanStatus
    trajectory: Optional[Trajectory]
    bindings: Dict[str, int] = field(default_factory=dict)
    satisfied: List[str] = field(default_factory=list)
    atomic_tasks: List[AtomicTask] = field(default_factory=list)
    trace: List[ScheduleTraceRecord] = field(default_factory=list)
    failure: Optional[FailureReport] = None
    order: PrecedenceOrder = field(default_factory=PrecedenceOrder)

    def trace_jsonl(self) -> str:
        return "".join(record.model_dump_json() + "\n" for record in self.trace)
