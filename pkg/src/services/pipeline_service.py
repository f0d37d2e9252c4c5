"""
Pipeline Service

End-to-end run: parse -> fragment check -> flatten -> resolve -> schedule/plan,
with per-stage wall times and a run report.
"""

import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator, Optional

import structlog

from src.models.constraint_models import FlattenOutput, ResolveOutput
from src.models.environment_models import Environment
from src.models.formula_models import Formula
from src.models.report_models import ConstraintCounts, RunReport, StageTimings
from src.models.schedule_models import ScheduleResult
from src.models.trajectory_models import State
from src.parsers.spec_parser import format_formula, parse
from src.services.flatten_service import FlattenService
from src.services.fragment_service import ensure_fragment, horizon, nesting_depth
from src.services.monitor_service import robustness
from src.services.resolve_service import ResolveService
from src.services.scheduler_service import SchedulerService
from src.startup import Settings, get_settings

logger = structlog.get_logger(__name__)


@dataclass
class PipelineResult:
    """Every intermediate artifact of a run"""

    formula: Formula
    flat: FlattenOutput
    resolved: ResolveOutput
    schedule: ScheduleResult
    report: RunReport


class PipelineService:
    """Runs the whole pipeline against one environment"""

    def __init__(self, env: Optional[Environment], settings: Optional[Settings] = None,
                 variable_mode: Optional[str] = None):
        self.env = env
        self.settings = settings or get_settings()
        self.variable_mode = variable_mode or self.settings.variable_mode
        self.timings = StageTimings()

    @contextmanager
    def _stage(self, name: str) -> Iterator[None]:
        logger.info("stage_started", stage=name)
        started = time.perf_counter()
        try:
            yield
        except Exception as e:
            logger.error("stage_failed", stage=name, error=str(e))
            raise
        elapsed = time.perf_counter() - started
        setattr(self.timings, name, elapsed)
        logger.info("stage_completed", stage=name, seconds=round(elapsed, 6))

    def parse(self, text: str) -> Formula:
        with self._stage("parse"):
            formula = parse(text)
            ensure_fragment(formula)
        return formula

    def flatten(self, formula: Formula) -> FlattenOutput:
        with self._stage("flatten"):
            return FlattenService(variable_mode=self.variable_mode, max_unroll=self.settings.max_unroll).flatten(formula)

    def resolve(self, flat: FlattenOutput) -> ResolveOutput:
        with self._stage("resolve"):
            return ResolveService().resolve(flat)

    def schedule(self, resolved: ResolveOutput, formula: Optional[Formula] = None,
                 init: Optional[State] = None) -> ScheduleResult:
        with self._stage("schedule"):
            return SchedulerService(resolved, self.env, init=init, settings=self.settings).schedule(formula)

    def run(self, text: str, init: Optional[State] = None, seed: Optional[int] = None) -> PipelineResult:
        """Run every stage on specification text.

        Raises:
            SpecSyntaxError, FragmentViolationError: the text is not a fragment formula
        """
        formula = self.parse(text)
        flat = self.flatten(formula)
        resolved = self.resolve(flat)
        result = self.schedule(resolved, formula, init)

        rho = None
        traj = result.trajectory
        if traj is not None and traj.covers(0, horizon(formula)):
            rho = robustness(formula, traj, 0, self.env)

        report = RunReport(
            spec=format_formula(formula),
            environment=self.env.name,
            variable_mode=self.variable_mode,
            seed=seed,
            stages=self.timings,
            solve_time=self.timings.solve,
            constraint_counts=ConstraintCounts(
                reach=len(resolved.reach), inv=len(resolved.inv), tc=len(resolved.tc),
                tc_prime=len(resolved.tc_prime), flat_reach=len(flat.reach), flat_inv=len(flat.inv),
            ),
            atomic_task_count=len(result.atomic_tasks),
            atomic_tasks=[t.describe() for t in result.atomic_tasks],
            bindings=result.bindings,
            horizon=horizon(formula),
            nesting_depth=nesting_depth(formula),
            plan_length=len(traj) if traj is not None else 0,
            robustness=rho,
            status=result.status,
            failure=result.failure,
        )
        logger.info("run_complete", status=report.status.value, robustness=rho,
                    solve_time=round(report.solve_time, 6))
        return PipelineResult(formula, flat, resolved, result, report)


def run_pipeline(text: str, env: Environment, settings: Optional[Settings] = None,
                 variable_mode: Optional[str] = None, init: Optional[State] = None,
                 seed: Optional[int] = None) -> PipelineResult:
    return PipelineService(env, settings, variable_mode).run(text, init=init, seed=seed)
