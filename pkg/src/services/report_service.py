"""
Report Service

Human-readable constraint reports, JSON documents for every stage, the
benchmark table and an SVG rendering of the workspace with the planned path.
"""

from io import StringIO
from typing import Any, Dict, List, Optional

import matplotlib
matplotlib.use('Agg')  # Use non-interactive backend
import matplotlib.pyplot as plt
from matplotlib.patches import Circle, Rectangle as RectPatch

import structlog

from src.models.constraint_models import FlattenOutput, ResolveOutput, TaskConstraint
from src.models.environment_models import Environment, RegionRole, RegionShape
from src.models.report_models import BenchmarkRow
from src.models.schedule_models import ScheduleResult
from src.models.trajectory_models import Trajectory
from src.parsers.spec_parser import format_formula

logger = structlog.get_logger(__name__)

_REGION_COLOR = "#1976D2"
_OBSTACLE_COLOR = "#C62828"


def _constraint_line(c: TaskConstraint) -> str:
    return f"{c.id} {c.kind.value} [{c.lo}, {c.hi}] {format_formula(c.prop)}"


def _constraint_doc(c: TaskConstraint) -> Dict[str, Any]:
    doc = {"id": c.id, "kind": c.kind.value, "lo": str(c.lo), "hi": str(c.hi),
           "prop": format_formula(c.prop)}
    if c.pair is not None:
        doc["pair"] = c.pair
    return doc


class ReportService:
    """Serializes pipeline artifacts"""

    def constraint_report(self, out) -> str:
        """One line per constraint ``id kind [lo, hi] prop``, then TC (and TC')"""
        lines = [f"# variable mode: {out.variable_mode}"]
        lines.extend(_constraint_line(c) for c in out.constraints)
        lines.append("TC:")
        lines.extend(f"  {b}" for b in out.tc)
        if isinstance(out, ResolveOutput):
            lines.append("TC':")
            lines.extend(f"  {w}  [{w.rule}]" for w in out.tc_prime)
        return "\n".join(lines) + "\n"

    def flatten_document(self, flat: FlattenOutput) -> Dict[str, Any]:
        return {
            "variable_mode": flat.variable_mode,
            "reach": [_constraint_doc(c) for c in flat.reach],
            "inv": [_constraint_doc(c) for c in flat.inv],
            "tc": [{"lo": b.lo, "hi": b.hi, "var": b.var.name} for b in flat.tc],
        }

    def resolve_document(self, r: ResolveOutput) -> Dict[str, Any]:
        doc = {
            "variable_mode": r.variable_mode,
            "reach": [_constraint_doc(c) for c in r.reach],
            "inv": [_constraint_doc(c) for c in r.inv],
            "tc": [{"lo": b.lo, "hi": b.hi, "var": b.var.name} for b in r.tc],
            "tc_prime": [{"lo": str(w.lo), "hi": str(w.hi), "var": w.var.name, "rule": w.rule}
                         for w in r.tc_prime],
            "sat_vars": {cid: sv.name for cid, sv in r.sat_vars},
        }
        return doc

    def schedule_document(self, result: ScheduleResult) -> Dict[str, Any]:
        return {
            "status": result.status.value,
            "order": sorted([a, b] for a, b in result.order.pairs),
            "bindings": result.bindings,
            "satisfied": result.satisfied,
            "atomic_tasks": [t.describe() for t in result.atomic_tasks],
            "plan_length": len(result.trajectory) if result.trajectory is not None else 0,
            "failure": result.failure.model_dump() if result.failure else None,
        }

    def schedule_report(self, result: ScheduleResult) -> str:
        lines = [f"status: {result.status.value}"]
        if result.order.pairs:
            lines.append("order: " + ", ".join(f"{a} < {b}" for a, b in sorted(result.order.pairs)))
        lines.append("atomic tasks:")
        lines.extend(f"  {t.describe()}" for t in result.atomic_tasks)
        lines.append("bindings: " + ", ".join(f"{k}={v}" for k, v in result.bindings.items()))
        if result.failure is not None:
            lines.append(f"failure: {result.failure.reason}: {result.failure.message}")
        return "\n".join(lines) + "\n"

    def bench_table(self, rows: List[BenchmarkRow]) -> str:
        header = (f"{'id':<5} {'name':<17} {'pattern':<8} {'N':>4} {'D':>3} "
                  f"{'time[s]':>9} {'robustness':>11}  status")
        lines = [header, "-" * len(header)]
        for row in rows:
            rho = f"{row.robustness:.3f}" if row.robustness is not None else "-"
            status = row.status if row.error is None else f"{row.status} ({row.error})"
            lines.append(f"{row.label:<5} {row.name:<17} {row.pattern:<8} {row.horizon:>4} "
                         f"{row.nesting_depth:>3} {row.solve_time:>9.3f} {rho:>11}  {status}")
        return "\n".join(lines) + "\n"

    def render_svg(self, env: Environment, trajectory: Optional[Trajectory], title: str = "") -> str:
        """Workspace, regions and the planned path as SVG text"""
        plt.rcParams["svg.hashsalt"] = "stlinc"
        fig, ax = plt.subplots(figsize=(6, 6))
        try:
            b = env.bounds
            ax.set_xlim(b.xmin, b.xmax)
            ax.set_ylim(b.ymin, b.ymax)
            ax.set_aspect("equal")
            for region in env.regions:
                color = _OBSTACLE_COLOR if region.role == RegionRole.OBSTACLE else _REGION_COLOR
                if region.shape == RegionShape.CIRCLE:
                    patch = Circle(region.center, region.radius, alpha=0.3, color=color)
                    cx, cy = region.center
                else:
                    r = region.rect
                    patch = RectPatch((r.xmin, r.ymin), r.xmax - r.xmin, r.ymax - r.ymin, alpha=0.3, color=color)
                    cx, cy = (r.xmin + r.xmax) / 2, (r.ymin + r.ymax) / 2
                ax.add_patch(patch)
                ax.text(cx, cy, region.name, ha="center", va="center")
            if trajectory is not None:
                xs, ys = trajectory.channel("px"), trajectory.channel("py")
                ax.plot(xs, ys, "-o", markersize=3, color="black", linewidth=1)
                ax.plot(xs[:1], ys[:1], "s", color="green")
            ax.set_title(title)
            buffer = StringIO()
            fig.savefig(buffer, format="svg", bbox_inches="tight", metadata={"Date": None})
        finally:
            plt.close(fig)
        return buffer.getvalue()


# Global instance
_report_service: Optional[ReportService] = None


def get_report_service() -> ReportService:
    """Get or create the global report service"""
    global _report_service
    if _report_service is None:
        _report_service = ReportService()
    return _report_service
