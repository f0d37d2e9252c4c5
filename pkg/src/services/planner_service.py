"""
Planner Service

Atomic-task planner for the discrete double integrator. A task
F[a,b](reach) & G[a,b](inv) is solved by best-first search over the
time-expanded graph of (state, step) nodes, ranked by the smallest robustness
margin seen along the path (saturated), then the reach witness time.

Propositions are compiled once per call into closures over a state tuple
(px, py, vx, vy). Quantization only deduplicates visited nodes; every check
runs on the exact state.
"""

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from src.exceptions import PlannerContractError, UnknownChannelError
from src.models.environment_models import Environment, Rectangle, RegionShape
from src.models.formula_models import And, Const, Formula, Linear, Not, Or, RegionRef
from src.models.schedule_models import AtomicTask, HoldRequirement, PlanFailure, PlanSegment, ReachGoal
from src.models.trajectory_models import STATE_CHANNELS, State, Trajectory
from src.services.monitor_service import satisfies
from src.startup import Settings, get_settings

logger = structlog.get_logger(__name__)

MarginFn = Callable[[State], float]
Box = Tuple[float, float, float, float]

# step bound for a box the robot can never enter
NEVER = 1 << 30

_CHANNEL_INDEX = {name: i for i, name in enumerate(STATE_CHANNELS)}


def step(state: State, control: Tuple[float, float], env: Environment) -> State:
    """One double-integrator update with per-axis velocity clamping"""
    dt = env.dynamics.dt
    vmax = env.dynamics.vmax
    px, py, vx, vy = state
    ux, uy = control
    return (
        px + vx * dt + 0.5 * ux * dt * dt,
        py + vy * dt + 0.5 * uy * dt * dt,
        min(max(vx + ux * dt, -vmax), vmax),
        min(max(vy + uy * dt, -vmax), vmax),
    )


def compile_prop(p: Formula, env: Environment) -> MarginFn:
    """Closure computing the robustness of a propositional formula at a state.

    Raises:
        UnknownRegionError: region name not defined in env
        UnknownChannelError: linear predicate over a non-state channel
    """
    if isinstance(p, Const):
        value = math.inf if p.value else -math.inf
        return lambda s: value
    if isinstance(p, Linear):
        try:
            terms = [(_CHANNEL_INDEX[name], coef) for name, coef in p.terms]
        except KeyError as e:
            raise UnknownChannelError(f"planner state has no channel {e.args[0]!r}") from None
        bound, lower = p.bound, p.is_lower

        def linear(s):
            lhs = sum(coef * s[i] for i, coef in terms)
            return lhs - bound if lower else bound - lhs
        return linear
    if isinstance(p, RegionRef):
        region = env.region(p.name)
        if region.shape == RegionShape.CIRCLE:
            (cx, cy), r2 = region.center, region.radius * region.radius
            return lambda s: r2 - ((s[0] - cx) * (s[0] - cx) + (s[1] - cy) * (s[1] - cy))
        r = region.rect
        return lambda s: min(s[0] - r.xmin, r.xmax - s[0], s[1] - r.ymin, r.ymax - s[1])
    if isinstance(p, Not):
        inner = compile_prop(p.arg, env)
        return lambda s: -inner(s)
    if isinstance(p, And):
        left, right = compile_prop(p.left, env), compile_prop(p.right, env)
        return lambda s: min(left(s), right(s))
    if isinstance(p, Or):
        left, right = compile_prop(p.left, env), compile_prop(p.right, env)
        return lambda s: max(left(s), right(s))
    raise TypeError(f"not a propositional formula: {p!r}")


def prop_robustness(p: Formula, state: State, env: Environment) -> float:
    """Robustness of a propositional formula at a single state"""
    return compile_prop(p, env)(tuple(state))


def _intersect(a: Optional[Box], b: Optional[Box]) -> Optional[Box]:
    if a is None or b is None:
        return None
    box = (max(a[0], b[0]), min(a[1], b[1]), max(a[2], b[2]), min(a[3], b[3]))
    return box if box[0] <= box[1] and box[2] <= box[3] else None


def _hull(a: Optional[Box], b: Optional[Box]) -> Optional[Box]:
    if a is None:
        return b
    if b is None:
        return a
    return (min(a[0], b[0]), max(a[1], b[1]), min(a[2], b[2]), max(a[3], b[3]))


def prop_bbox(p: Formula, env: Environment) -> Optional[Box]:
    """Position box containing every state that can satisfy p (None: no state can)"""
    b = env.bounds
    workspace: Box = (b.xmin, b.xmax, b.ymin, b.ymax)

    def visit(f: Formula) -> Optional[Box]:
        if isinstance(f, Const):
            return workspace if f.value else None
        if isinstance(f, RegionRef):
            r: Rectangle = env.region(f.name).bounding_box
            return _intersect(workspace, (r.xmin, r.xmax, r.ymin, r.ymax))
        if isinstance(f, Linear) and len(f.terms) == 1 and f.terms[0][0] in ("px", "py"):
            name, coef = f.terms[0]
            if coef == 0:
                # 0 * x against the bound is a constant truth value
                holds = -f.bound > 0 if f.is_lower else f.bound > 0
                return workspace if holds else None
            limit = f.bound / coef
            # dividing by a negative coefficient flips the comparison
            at_least = f.is_lower == (coef > 0)
            lo, hi = (limit, math.inf) if at_least else (-math.inf, limit)
            box = (lo, hi, -math.inf, math.inf) if name == "px" else (-math.inf, math.inf, lo, hi)
            return _intersect(workspace, box)
        if isinstance(f, And):
            return _intersect(visit(f.left), visit(f.right))
        if isinstance(f, Or):
            return _hull(visit(f.left), visit(f.right))
        return workspace

    return visit(p)


@dataclass
class _Node:
    state: State
    t: int
    done: bool
    witness: Optional[int]
    since: int
    margin: float
    reach_best: float
    effort: float
    parent: Optional["_Node"] = None
    control: Optional[Tuple[float, float]] = None


class PlannerService:
    """Best-first atomic-task planner over one environment"""

    def __init__(self, env: Environment, settings: Optional[Settings] = None):
        self.env = env
        settings = settings or get_settings()
        self.epsilon = settings.planner_epsilon
        self.saturation = settings.margin_saturation
        self.max_expansions = settings.max_expansions
        self.controls = env.control_set()
        self._compiled: Dict[Formula, MarginFn] = {}

    def margin_fn(self, p: Optional[Formula]) -> Optional[MarginFn]:
        if p is None:
            return None
        if p not in self._compiled:
            self._compiled[p] = compile_prop(p, self.env)
        return self._compiled[p]

    def _axis_steps(self, gap: float, v: float) -> int:
        """Fewest steps covering more than gap + epsilon along one axis, starting at speed v toward it"""
        dyn = self.env.dynamics
        dt, amax, vmax = dyn.dt, dyn.amax, dyn.vmax
        need = gap + self.epsilon - 1e-9
        moved, k = 0.0, 0
        while moved <= need:
            gain = v * dt + 0.5 * amax * dt * dt
            if amax == 0.0 or v >= vmax:
                # constant gain from here on
                if gain <= 0.0:
                    return NEVER
                return k + max(math.floor((need - moved) / gain) + 1, 1)
            moved += gain
            v = min(v + amax * dt, vmax)
            k += 1
        return k

    def _steps_lb(self, state: State, box: Box) -> int:
        """Admissible number of steps before the position can lie strictly inside box.

        Each axis is bounded by full acceleration toward the box from the
        current velocity, so a robot moving away pays for braking.
        """
        px, py, vx, vy = state
        lb = 0
        for p, v, lo, hi in ((px, vx, box[0], box[1]), (py, vy, box[2], box[3])):
            if p < lo:
                lb = max(lb, self._axis_steps(lo - p, v))
            elif p > hi:
                lb = max(lb, self._axis_steps(p - hi, -v))
        return lb

    def _key(self, state: State, t: int, done: bool, since: int) -> Tuple:
        q = self.env.quantization
        return (round(state[0] / q.position), round(state[1] / q.position),
                round(state[2] / q.velocity), round(state[3] / q.velocity), t, done, since)

    def _goal_boxes(self, lookahead: Sequence[ReachGoal], start: State,
                    cursor: int) -> List[Tuple[Box, int]]:
        boxes = []
        for g in lookahead:
            box = prop_bbox(g.prop, self.env)
            if box is None or cursor + self._steps_lb(start, box) > g.deadline:
                logger.debug("lookahead_skipped", source=g.source, deadline=g.deadline)
                continue
            boxes.append((box, g.deadline))
        return boxes

    def plan(self, task: AtomicTask, start: State, cursor: int,
             holds: Sequence[HoldRequirement] = (),
             lookahead: Sequence[ReachGoal] = ()) -> Union[PlanSegment, PlanFailure]:
        """Plan a segment over [cursor, b] (longer when a hold runs past b).

        Args:
            holds: propositions to keep for a few steps after the reach witness
            lookahead: pending reach constraints; no planned state may leave one
                of them unreachable by its deadline

        Returns:
            PlanSegment whose trajectory starts at ``cursor`` with ``start``, or
            PlanFailure when the search is exhausted or capped
        """
        a, b = task.interval.lo, task.interval.hi
        if cursor > a:
            raise ValueError(f"cursor {cursor} lies after the task start {a}")
        start = tuple(float(v) for v in start)
        if not self.env.in_bounds(start):
            raise ValueError("start state lies outside the workspace")

        reach_fn = self.margin_fn(task.reach_prop)
        inv_fn = self.margin_fn(task.inv_prop)
        hold_fns = [(self.margin_fn(h.prop), h.steps) for h in holds if task.reach_prop is not None]
        hold_len = max((steps for _, steps in hold_fns), default=0)
        goals = self._goal_boxes(lookahead, start, cursor)
        eps = self.epsilon

        box = None
        if reach_fn is not None:
            box = prop_bbox(task.reach_prop, self.env)
            if task.inv_prop is not None:
                box = _intersect(box, prop_bbox(task.inv_prop, self.env))
            if box is None:
                logger.info("plan_unreachable", task=task.describe())
                return PlanFailure(reason="reach proposition cannot hold anywhere in the workspace",
                                   best_margin=-math.inf, expansions=0)

        def advance(parent: Optional[_Node], state: State, t: int,
                    control: Optional[Tuple[float, float]]) -> Optional[_Node]:
            if not self.env.in_bounds(state):
                return None
            if parent is None:
                done, witness, since, margin, reach_best, effort = False, None, 0, math.inf, -math.inf, 0.0
            else:
                done, witness, since = parent.done, parent.witness, parent.since
                margin, reach_best = parent.margin, parent.reach_best
                effort = parent.effort + abs(control[0]) + abs(control[1])
                if done:
                    since += 1
            if a <= t <= b and inv_fn is not None:
                g = inv_fn(state)
                if g <= eps:
                    return None
                margin = min(margin, g)
            if not done and reach_fn is not None and a <= t <= b:
                r = reach_fn(state)
                reach_best = max(reach_best, r)
                if r > eps:
                    done, witness, since = True, t, 0
                    margin = min(margin, r)
            if done:
                for fn, steps in hold_fns:
                    if since <= steps:
                        h = fn(state)
                        if h <= eps:
                            return None
                        margin = min(margin, h)
            return _Node(state, t, done, witness, min(since, hold_len), margin, reach_best, effort,
                         parent, control)

        def goal(n: _Node) -> bool:
            if reach_fn is None:
                return n.t == b
            return n.done and n.t >= b and n.since >= hold_len

        def horizon_of(n: _Node) -> int:
            if reach_fn is None or not n.done:
                return b
            return max(b, n.witness + hold_len)

        def priority(n: _Node) -> Tuple:
            if reach_fn is None:
                when = 0
            elif n.done:
                when = n.witness
            else:
                when = max(n.t + self._steps_lb(n.state, box), a)
            return (-min(n.margin, self.saturation), when, n.effort, -n.t)

        def strands_goal(n: _Node) -> bool:
            return any(n.t + self._steps_lb(n.state, gbox) > deadline for gbox, deadline in goals)

        counter = itertools.count()
        frontier: List[Tuple] = []
        root = advance(None, start, cursor, None)
        if root is None:
            return PlanFailure(reason="start state violates the task at the cursor",
                               best_margin=-math.inf, expansions=0)
        heapq.heappush(frontier, (priority(root), next(counter), root))

        closed = set()
        expansions = 0
        best_margin = -math.inf
        while frontier:
            _, _, node = heapq.heappop(frontier)
            key = self._key(node.state, node.t, node.done, node.since)
            if key in closed:
                continue
            closed.add(key)

            if goal(node):
                segment = self._segment(node, cursor, expansions)
                logger.debug("plan_found", task=task.describe(), cursor=cursor, witness=node.witness,
                             margin=node.margin, expansions=expansions)
                return segment

            expansions += 1
            progress = node.margin if node.done or reach_fn is None else min(node.margin, node.reach_best)
            best_margin = max(best_margin, progress)
            if expansions >= self.max_expansions:
                logger.warning("plan_expansion_cap", task=task.describe(), expansions=expansions)
                return PlanFailure(reason=f"expansion cap {self.max_expansions} reached",
                                   best_margin=best_margin, expansions=expansions)
            if node.t >= horizon_of(node):
                continue

            t = node.t + 1
            for control in self.controls:
                child = advance(node, step(node.state, control, self.env), t, control)
                if child is None:
                    continue
                if reach_fn is not None and not child.done:
                    if t >= b or t + self._steps_lb(child.state, box) > b:
                        continue
                if goals and strands_goal(child):
                    continue
                heapq.heappush(frontier, (priority(child), next(counter), child))

        logger.info("plan_exhausted", task=task.describe(), expansions=expansions)
        return PlanFailure(reason="search space exhausted", best_margin=best_margin, expansions=expansions)

    @staticmethod
    def _segment(goal: _Node, cursor: int, expansions: int) -> PlanSegment:
        states, inputs = [], []
        node = goal
        while node is not None:
            states.append(node.state)
            if node.control is not None:
                inputs.append(node.control)
            node = node.parent
        states.reverse()
        inputs.reverse()
        trajectory = Trajectory(t0=cursor, states=np.array(states, dtype=float),
                                inputs=np.array(inputs, dtype=float).reshape(len(inputs), 2))
        return PlanSegment(trajectory=trajectory, reach_witness=goal.witness,
                           robustness_margin=goal.margin, expansions=expansions)

    def validate_segment(self, segment: PlanSegment, task: AtomicTask) -> None:
        """Replay the dynamics and re-check the task with the monitor.

        Raises:
            PlannerContractError: first dynamics or task violation found
        """
        traj = segment.trajectory
        alphabet = set(self.env.dynamics.accelerations)
        for i in range(len(traj) - 1):
            t = traj.t0 + i
            control = tuple(float(u) for u in traj.inputs[i])
            if control[0] not in alphabet or control[1] not in alphabet:
                raise PlannerContractError(f"control {control} at step {t} is not in the alphabet")
            expected = np.array(step(traj.state_at(t), control, self.env))
            if not np.allclose(expected, traj.states[i + 1], rtol=0.0, atol=1e-9):
                raise PlannerContractError(f"dynamics violation between steps {t} and {t + 1}")
        for t in traj.times():
            if not self.env.in_bounds(traj.state_at(t)):
                raise PlannerContractError(f"state at step {t} leaves the workspace")

        a, b = task.interval.lo, task.interval.hi
        if not traj.covers(a, b):
            raise PlannerContractError(f"segment [{traj.t0}, {traj.end}] does not cover the task [{a}, {b}]")
        if not satisfies(task.formula(offset=traj.t0), traj, t=traj.t0, env=self.env):
            raise PlannerContractError(f"segment does not satisfy {task.describe()}")
        if task.reach_prop is not None:
            w = segment.reach_witness
            if w is None or not a <= w <= b:
                raise PlannerContractError(f"reach witness {w} outside [{a}, {b}]")
            if prop_robustness(task.reach_prop, traj.state_at(w), self.env) <= 0.0:
                raise PlannerContractError(f"reach proposition does not hold at the witness {w}")
