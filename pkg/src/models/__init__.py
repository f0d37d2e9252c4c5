"""
Models package for stlinc
Formula AST, constraints, environments, trajectories, schedules and reports
"""

from .constraint_models import (
    ConcreteConstraint, ConstraintKind, FlattenOutput, ResolveOutput, SatVar, SatWindow, SymExpr, SymVar,
    TaskConstraint, TimeVarBound,
)
from .environment_models import DynamicsConfig, Environment, QuantizationConfig, Rectangle, Region, RegionRole, RegionShape
from .formula_models import (
    FALSE, TRUE, Always, And, Const, Eventually, Formula, Interval, Linear, Not, Or, RegionRef, Until,
)
from .report_models import BenchmarkRow, BenchmarkSpec, ConstraintCounts, RunReport, StageTimings
from .schedule_models import (
    AtomicTask, FailureReport, PlanFailure, PlanSegment, PlanStatus, PrecedenceOrder, ScheduleResult,
    ScheduleTraceRecord,
)
from .trajectory_models import Trajectory

__all__ = [
    # Formulas
    "Formula",
    "Interval",
    "Linear",
    "RegionRef",
    "Const",
    "Not",
    "And",
    "Or",
    "Eventually",
    "Always",
    "Until",
    "TRUE",
    "FALSE",

    # Constraints
    "ConstraintKind",
    "SymVar",
    "SatVar",
    "SymExpr",
    "TimeVarBound",
    "TaskConstraint",
    "ConcreteConstraint",
    "FlattenOutput",
    "SatWindow",
    "ResolveOutput",

    # Environment and signals
    "Environment",
    "Region",
    "RegionRole",
    "RegionShape",
    "Rectangle",
    "DynamicsConfig",
    "QuantizationConfig",
    "Trajectory",

    # Scheduling
    "PrecedenceOrder",
    "AtomicTask",
    "PlanSegment",
    "PlanFailure",
    "PlanStatus",
    "ScheduleTraceRecord",
    "FailureReport",
    "ScheduleResult",

    # Reports
    "StageTimings",
    "ConstraintCounts",
    "RunReport",
    "BenchmarkSpec",
    "BenchmarkRow",
]
