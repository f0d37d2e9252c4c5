"""
Scheduler Service

Incremental scheduling of resolved constraints: repeatedly pick the
constraints whose predecessors are done and whose bounds are concrete, slice
them, plan the earliest atomic task, commit the planned segment and bind the
satisfaction times it witnesses.

The committed trajectory only ever grows; a failed atomic task ends the run
with the partial plan and a failure report (no backtracking).
"""

import math
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
import structlog

from src.exceptions import InconsistentWindowsError, PlannerContractError
from src.models.constraint_models import ConstraintKind, ResolveOutput, TaskConstraint, constraint_sort_key
from src.models.environment_models import Environment
from src.models.formula_models import TRUE, Formula, Interval, conjoin
from src.models.schedule_models import (
    ActiveConstraint, AtomicTask, FailureReport, HoldRequirement, PlanFailure, PlanSegment, PlanStatus,
    ReachGoal, ScheduleResult, ScheduleTraceRecord, filler_task,
)
from src.models.trajectory_models import State, Trajectory
from src.services.fragment_service import horizon
from src.services.monitor_service import holds_at, robustness, satisfies
from src.services.ordering_service import WindowState, compute_order
from src.services.planner_service import PlannerService
from src.services.slicing_service import next_atomic, slice_constraints
from src.startup import Settings, get_settings

logger = structlog.get_logger(__name__)

Range = Tuple[int, int]


class _StopRun(Exception):
    """Internal signal carrying the failure report out of the loop"""

    def __init__(self, report: FailureReport):
        self.report = report
        super().__init__(report.message)


class SchedulerService:
    """Runs the scheduling loop for one resolved specification"""

    def __init__(self, r: ResolveOutput, env: Environment, init: Optional[State] = None,
                 settings: Optional[Settings] = None, planner: Optional[PlannerService] = None):
        self.r = r
        self.env = env
        self.settings = settings or get_settings()
        self.init: State = tuple(float(v) for v in (init if init is not None else env.initial_state))
        self.planner = planner or PlannerService(env, self.settings)
        self.max_iterations = self.settings.max_iterations

        self.order = compute_order(r)
        self.windows = WindowState(r)
        self.satisfied: Set[str] = set()
        self.seen_active: Set[str] = set()
        self.coverage: Dict[str, np.ndarray] = {}

        self._states: List[State] = []
        self._inputs: List[Tuple[float, float]] = []
        self._trajectory: Optional[Trajectory] = None
        self.trace: List[ScheduleTraceRecord] = []
        self.atomic_tasks: List[AtomicTask] = []
        self.iteration = 0

    # committed prefix

    @property
    def commit_end(self) -> int:
        """Last committed step (-1 before the first commit)"""
        return len(self._states) - 1

    @property
    def next_free(self) -> int:
        return self.commit_end + 1

    @property
    def trajectory(self) -> Optional[Trajectory]:
        if not self._states:
            return None
        if self._trajectory is None:
            self._trajectory = Trajectory(
                t0=0, states=np.array(self._states, dtype=float),
                inputs=np.array(self._inputs, dtype=float).reshape(len(self._inputs), 2),
            )
        return self._trajectory

    def _commit(self, segment: PlanSegment, cursor: int, through: int) -> Range:
        traj = segment.trajectory
        k = through - cursor
        first = 0 if not self._states else 1
        for i in range(first, k + 1):
            self._states.append(traj.state_at(cursor + i))
        for i in range(k):
            self._inputs.append(tuple(float(u) for u in traj.inputs[i]))
        self._trajectory = None
        return (cursor + first, through)

    # constraint bookkeeping

    def _value(self, c: TaskConstraint) -> Optional[Range]:
        lo, hi = self.windows.concrete(c.lo), self.windows.concrete(c.hi)
        return None if lo is None or hi is None else (lo, hi)

    def next_tasks(self) -> List[TaskConstraint]:
        """Unsatisfied constraints with satisfied predecessors and concrete bounds"""
        ready = []
        for c in self.r.constraints:
            if c.id in self.satisfied:
                continue
            if any(p not in self.satisfied for p in self.order.predecessors(c.id)):
                continue
            if self._value(c) is None:
                continue
            ready.append(c)
        return ready

    def _pending_reach_ok(self, windows: WindowState, exclude: Set[str], next_free: int) -> bool:
        """Every pending concrete reach constraint keeps a non-empty future interval"""
        for c in self.r.reach:
            if c.id in self.satisfied or c.id in exclude:
                continue
            eff = windows.effective_interval(c)
            if eff is not None and max(eff[0], next_free) > eff[1]:
                return False
        return True

    def _bind_earliest(self, c: TaskConstraint, lo: int, hi: int, next_free: int,
                       exclude: Sequence[str] = ()) -> Optional[int]:
        """Bind c to the earliest committed witness in [lo, hi] that keeps the windows consistent"""
        traj = self.trajectory
        if traj is None:
            return None
        sat = self.r.sat_var(c.id)
        for k in range(max(lo, 0), min(hi, traj.end) + 1):
            if not holds_at(c.prop, traj, k, self.env):
                continue
            candidate = self.windows.copy()
            try:
                candidate.bind(sat, k)
            except InconsistentWindowsError:
                continue
            if self._pending_reach_ok(candidate, {c.id, *exclude}, next_free):
                self.windows = candidate
                self.satisfied.add(c.id)
                return k
        return None

    def _scan_inv(self, c: TaskConstraint, bounds: Range) -> bool:
        """Update the coverage of an invariance constraint; True once fully covered.

        Raises:
            _StopRun: a committed step inside the interval violates it
        """
        lo, hi = bounds
        cov = self.coverage.setdefault(c.id, np.zeros(hi - lo + 1, dtype=bool))
        traj = self.trajectory
        if traj is not None:
            for k in range(lo, min(hi, traj.end) + 1):
                if cov[k - lo]:
                    continue
                if not holds_at(c.prop, traj, k, self.env):
                    raise _StopRun(self._failure(
                        "invariance_violated", f"committed step {k} violates {c.id}", None,
                    ))
                cov[k - lo] = True
        if not cov.all():
            return False
        try:
            self.windows.bind(self.r.sat_var(c.id), hi)
        except InconsistentWindowsError as e:
            raise _StopRun(self._failure("inconsistent_windows", str(e), None)) from e
        self.satisfied.add(c.id)
        return True

    def extract_time(self, task: AtomicTask, committed: Range) -> Tuple[Dict[str, int], List[str]]:
        """Bind satisfaction times witnessed by the newly committed steps.

        Task reach sources must be witnessed; other pending reach constraints are
        retired when the committed prefix happens to witness them consistently.

        Returns:
            (bindings added, constraint ids newly satisfied)
        """
        before_bindings = dict(self.windows.bindings)
        before_satisfied = set(self.satisfied)
        start, end = committed
        next_free = end + 1

        for cid in task.reach_sources:
            if cid in self.satisfied:
                continue
            c = self.r.constraint(cid)
            eff = self.windows.effective_interval(c)
            if eff is None or self._bind_earliest(c, max(eff[0], start), min(eff[1], end), next_free,
                                                    exclude=task.reach_sources) is None:
                raise _StopRun(self._failure(
                    "inconsistent_windows", f"no consistent witness for {cid} in [{start}, {end}]", task,
                ))

        for c in self.next_tasks():
            if c.kind == ConstraintKind.REACH:
                eff = self.windows.effective_interval(c)
                if eff is not None and eff[0] <= end:
                    self._bind_earliest(c, max(eff[0], start), min(eff[1], end), next_free)

        self._refresh_invariants()
        added = {sv.name: v for sv, v in self.windows.bindings.items() if sv not in before_bindings}
        newly = sorted(self.satisfied - before_satisfied, key=constraint_sort_key)
        return added, newly

    def _refresh_invariants(self) -> None:
        # satisfying one invariance can make another one concrete
        changed = True
        while changed:
            changed = False
            for c in self.next_tasks():
                if c.kind == ConstraintKind.INV and self._scan_inv(c, self._value(c)):
                    changed = True

    def _past_scan(self) -> None:
        """Newly active constraints are checked against the committed prefix"""
        changed = True
        while changed:
            changed = False
            for c in self.next_tasks():
                if c.id in self.seen_active:
                    continue
                self.seen_active.add(c.id)
                if c.kind == ConstraintKind.INV:
                    changed |= self._scan_inv(c, self._value(c))
                    continue
                eff = self.windows.effective_interval(c)
                if eff[0] <= self.commit_end:
                    bound = self._bind_earliest(c, eff[0], min(eff[1], self.commit_end), self.next_free)
                    if bound is not None:
                        logger.debug("past_witness", constraint=c.id, step=bound)
                        changed = True

    def _active(self, ready: Sequence[TaskConstraint]) -> Tuple[List[ActiveConstraint], Dict[str, Range]]:
        active, effective = [], {}
        for c in ready:
            if c.kind == ConstraintKind.REACH:
                lo, hi = self.windows.effective_interval(c)
            else:
                lo, hi = self._value(c)
            effective[c.id] = (lo, hi)
            lo = max(lo, self.next_free)
            if lo > hi:
                raise _StopRun(self._failure(
                    "inconsistent_windows",
                    f"{c.id} has no steps left: [{effective[c.id][0]}, {hi}] before step {self.next_free}",
                    None,
                ))
            active.append(ActiveConstraint(id=c.id, kind=c.kind.value, lo=lo, hi=hi, prop=c.prop))
        return active, effective

    # planning

    def _holds_for(self, reach_sources: Sequence[str]) -> List[HoldRequirement]:
        """Invariance halves paired with reach sources, as hold requirements"""
        paired = {c.pair: c for c in self.r.inv if c.pair is not None}
        holds = []
        for cid in reach_sources:
            inv = paired.get(cid)
            if inv is None or inv.id in self.satisfied:
                continue
            width = inv.hi - inv.lo
            if width.is_concrete:
                holds.append(HoldRequirement(prop=inv.prop, steps=width.const, source=inv.id))
        return holds

    def _lookahead_for(self, task: AtomicTask) -> List[ReachGoal]:
        """Pending reach constraints left out of a fallback task"""
        goals = []
        for c in self.next_tasks():
            if c.kind != ConstraintKind.REACH or c.id in task.reach_sources:
                continue
            eff = self.windows.effective_interval(c)
            if eff is not None:
                goals.append(ReachGoal(prop=c.prop, deadline=eff[1], source=c.id))
        return goals

    def _attempts(self, task: AtomicTask, effective: Dict[str, Range]) -> List[Tuple[str, AtomicTask]]:
        attempts = [("merged", task)]
        if not task.reach_sources:
            return attempts
        inv_sources = tuple((cid, "inv") for cid in task.inv_sources)
        mandatory = [cid for cid in task.reach_sources if effective[cid][1] <= task.interval.hi]
        if mandatory and len(mandatory) < len(task.reach_sources):
            prop = conjoin(*(self.r.constraint(cid).prop for cid in mandatory))
            attempts.append(("relaxed", AtomicTask(
                interval=task.interval, reach_prop=prop, inv_prop=task.inv_prop,
                sources=tuple((cid, "reach") for cid in mandatory) + inv_sources,
            )))
        if not mandatory:
            attempts.append(("inv-only", AtomicTask(
                interval=task.interval, inv_prop=task.inv_prop if task.inv_prop is not None else TRUE,
                sources=inv_sources,
            )))
        return attempts

    def _cursor_state(self) -> Tuple[int, State]:
        if not self._states:
            return 0, self.init
        return self.commit_end, self._states[-1]

    def _plan(self, task: AtomicTask, holds: Sequence[HoldRequirement],
              lookahead: Sequence[ReachGoal] = ()):
        cursor, start = self._cursor_state()
        result = self.planner.plan(task, start, cursor, holds, lookahead)
        if isinstance(result, PlanSegment):
            try:
                self.planner.validate_segment(result, task)
            except PlannerContractError as e:
                logger.error("planner_contract_violation", task=task.describe(), error=str(e))
                raise _StopRun(self._failure("planner_contract", str(e), task)) from e
        return cursor, result

    def _record(self, task: AtomicTask, attempt: str, status: str, expansions: int = 0,
                committed: Optional[Range] = None, witness: Optional[int] = None,
                bindings: Optional[Dict[str, int]] = None, satisfied: Sequence[str] = ()) -> None:
        record = ScheduleTraceRecord(
            iteration=self.iteration, task=task.describe(),
            interval=(task.interval.lo, task.interval.hi), attempt=attempt,
            sources=[cid for cid, _ in task.sources], planner_status=status, expansions=expansions,
            committed=committed, witness=witness, bindings_added=bindings or {},
            satisfied_added=list(satisfied),
        )
        self.trace.append(record)
        logger.info("schedule_iteration", iteration=self.iteration, attempt=attempt, task=record.task,
                    status=status, committed=committed, bindings=record.bindings_added)

    def _failure(self, reason: str, message: str, task: Optional[AtomicTask],
                 best_margin: Optional[float] = None) -> FailureReport:
        pending = [c.id for c in self.r.constraints if c.id not in self.satisfied]
        return FailureReport(
            reason=reason, message=message, failed_task=task.describe() if task else None,
            cursor=self.commit_end, active_constraints=pending,
            best_margin=best_margin if best_margin is not None and math.isfinite(best_margin) else None,
        )

    def _run_task(self, task: AtomicTask, effective: Dict[str, Range]) -> None:
        gap = filler_task(self.next_free, task.interval.lo - 1) if task.interval.lo > self.next_free else None

        last: Optional[PlanFailure] = None
        for attempt, candidate in self._attempts(task, effective):
            holds = self._holds_for(candidate.reach_sources)
            lookahead = self._lookahead_for(candidate) if attempt != "merged" else ()
            cursor, result = self._plan(candidate, holds, lookahead)
            if isinstance(result, PlanFailure):
                last = result
                self._record(candidate, attempt, result.reason, expansions=result.expansions)
                continue

            if gap is not None:
                self.atomic_tasks.append(gap)
                self._record(gap, "gap", "ok")
            through = result.reach_witness if candidate.reach_prop is not None else candidate.interval.hi
            committed = self._commit(result, cursor, through)
            added, newly = self.extract_time(candidate, committed)
            self.atomic_tasks.append(AtomicTask(
                interval=Interval(candidate.interval.lo, through), reach_prop=candidate.reach_prop,
                inv_prop=candidate.inv_prop, sources=candidate.sources,
            ))
            self._record(candidate, attempt, "ok", expansions=result.expansions, committed=committed,
                         witness=result.reach_witness, bindings=added, satisfied=newly)
            return

        raise _StopRun(self._failure("planner_failure", last.reason, task, last.best_margin))

    def _trailing_filler(self, end: int) -> None:
        if end < self.next_free:
            return
        task = filler_task(self.next_free, end)
        cursor, result = self._plan(task, ())
        if isinstance(result, PlanFailure):
            self._record(task, "filler", result.reason, expansions=result.expansions)
            raise _StopRun(self._failure("trailing_filler", result.reason, task, result.best_margin))
        committed = self._commit(result, cursor, end)
        self.atomic_tasks.append(task)
        self._record(task, "filler", "ok", expansions=result.expansions, committed=committed)

    def _horizon(self, formula: Optional[Formula]) -> int:
        if formula is not None:
            return horizon(formula)
        ends = [self._value(c) for c in self.r.constraints]
        return max((v[1] for v in ends if v is not None), default=0)

    def schedule(self, formula: Optional[Formula] = None) -> ScheduleResult:
        """Run the loop until every constraint is satisfied or a task fails.

        Args:
            formula: when given, the plan is extended to its horizon and checked
                with the monitor before reporting success
        """
        failure: Optional[FailureReport] = None
        try:
            while True:
                self.iteration += 1
                if self.iteration > self.max_iterations:
                    raise _StopRun(self._failure(
                        "iteration_cap", f"scheduler exceeded {self.max_iterations} iterations", None,
                    ))
                self._past_scan()
                ready = self.next_tasks()
                if not ready:
                    if len(self.satisfied) == len(self.r.constraints):
                        break
                    raise _StopRun(self._failure("stuck", "no constraint can be scheduled", None))
                active, effective = self._active(ready)
                task = next_atomic(slice_constraints(active))
                self._run_task(task, effective)
            self._trailing_filler(self._horizon(formula))
        except _StopRun as stop:
            failure = stop.report
            logger.error("schedule_failed", reason=failure.reason, message=failure.message,
                         failed_task=failure.failed_task, cursor=failure.cursor)

        status = self._status(failure, formula)
        if status != PlanStatus.SUCCESS and failure is None:
            failure = self._failure("monitor_rejected", "plan does not satisfy the formula", None)

        result = ScheduleResult(
            status=status, trajectory=self.trajectory,
            bindings={sv.name: v for sv, v in sorted(self.windows.bindings.items(), key=lambda kv: kv[0].name)},
            satisfied=sorted(self.satisfied, key=constraint_sort_key),
            atomic_tasks=list(self.atomic_tasks), trace=list(self.trace), failure=failure, order=self.order,
        )
        logger.info("schedule_complete", status=status.value, iterations=self.iteration,
                    satisfied=len(self.satisfied), constraints=len(self.r.constraints),
                    steps=len(self._states))
        return result

    def _status(self, failure: Optional[FailureReport], formula: Optional[Formula]) -> PlanStatus:
        traj = self.trajectory
        if traj is None:
            return PlanStatus.INFEASIBLE
        if failure is not None:
            return PlanStatus.PARTIAL
        if formula is not None:
            if not satisfies(formula, traj, 0, self.env) or robustness(formula, traj, 0, self.env) < 0:
                return PlanStatus.PARTIAL
        return PlanStatus.SUCCESS


def schedule(r: ResolveOutput, env: Environment, init: Optional[State] = None,
             formula: Optional[Formula] = None, settings: Optional[Settings] = None) -> ScheduleResult:
    """Compute the order and run the scheduling loop once"""
    return SchedulerService(r, env, init=init, settings=settings).schedule(formula)
