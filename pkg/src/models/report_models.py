"""
Report Pydantic Models
Run reports, stage timings and benchmark rows
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from src.models.schedule_models import FailureReport, PlanStatus


class StageTimings(BaseModel):
    """Wall time per pipeline stage, in seconds"""
    parse: float = Field(0.0, description="Parsing and fragment validation")
    flatten: float = Field(0.0, description="Flattening")
    resolve: float = Field(0.0, description="Symbolic time resolution")
    schedule: float = Field(0.0, description="Ordering, scheduling and planning")

    @property
    def solve(self) -> float:
        """Flattener + scheduler + planner time"""
        return self.flatten + self.resolve + self.schedule


class ConstraintCounts(BaseModel):
    """Sizes of the constraint sets"""
    reach: int = Field(..., description="Reachability constraints after resolution")
    inv: int = Field(..., description="Invariance constraints after resolution")
    tc: int = Field(..., description="Symbolic time variable records")
    tc_prime: int = Field(..., description="Satisfaction windows")
    flat_reach: int = Field(0, description="Reachability constraints after flattening")
    flat_inv: int = Field(0, description="Invariance constraints after flattening")


class RunReport(BaseModel):
    """Outcome of one end-to-end run"""
    spec: str = Field(..., description="Formula text")
    environment: str = Field(..., description="Environment name")
    variable_mode: str = Field("fresh", description="Inner-variable mode used by the flattener")
    seed: Optional[int] = Field(None, description="Seed given on the command line (the search itself is deterministic)")
    stages: StageTimings = Field(default_factory=StageTimings)
    solve_time: float = Field(0.0, description="Flatten + resolve + schedule seconds")
    constraint_counts: ConstraintCounts
    atomic_task_count: int = Field(0, description="Atomic tasks committed, fillers included")
    atomic_tasks: List[str] = Field(default_factory=list, description="Atomic tasks as formula text")
    bindings: Dict[str, int] = Field(default_factory=dict, description="Satisfaction times")
    horizon: int = Field(..., description="Formula horizon N")
    nesting_depth: int = Field(..., description="Temporal nesting depth D")
    plan_length: int = Field(0, description="Number of states in the plan")
    robustness: Optional[float] = Field(None, description="Robustness of the formula at step 0")
    status: PlanStatus
    failure: Optional[FailureReport] = None


class BenchmarkSpec(BaseModel):
    """Built-in benchmark formula"""
    label: str = Field(..., description="Short label, phi1 .. phi5")
    name: str = Field(..., description="Benchmark name")
    formula: str = Field(..., description="Formula text")
    pattern: str = Field(..., description="Pattern tags, e.g. R+A or SV+SB")
    reference_horizon: int = Field(..., description="Horizon listed in the benchmark table")
    reference_depth: int = Field(..., description="Nesting depth listed in the benchmark table")


class BenchmarkRow(BaseModel):
    """One row of the benchmark table"""
    label: str = ""
    name: str
    pattern: str
    horizon: int = Field(..., description="Computed horizon N")
    nesting_depth: int = Field(..., description="Computed nesting depth D")
    solve_time: float = Field(0.0, description="Seconds")
    robustness: Optional[float] = None
    status: str = Field(..., description="success, partial, infeasible or error")
    error: Optional[str] = Field(None, description="Error message when the run raised")
