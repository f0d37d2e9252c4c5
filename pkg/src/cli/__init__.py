"""
stlinc command line

    stlinc run --spec specs/visit_pair_avoid.stl --env config/environments/default_env.json --out out --svg
    stlinc bench
    stlinc flatten specs/stay_then_reach.stl
    stlinc --max-enum 500 flatten specs/stay_then_reach.stl --assignments
    stlinc resolve specs/stay_then_reach.stl --json
    stlinc schedule specs/reach_avoid.stl
    stlinc monitor specs/monitor_example.stl specs/monitor_example.csv

Exit codes: 0 success, 1 unexpected error, 2 partial plan, 3 infeasible,
4 parse / fragment / environment error, 5 file not found.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import structlog

from src.exceptions import (
    EnvironmentFileError, FragmentViolationError, InvalidIntervalError, SpecSyntaxError, StlIncError,
)
from src.models.schedule_models import PlanStatus
from src.parsers.spec_parser import parse
from src.services.benchmark_service import BENCHMARKS, run_suite
from src.services.flatten_service import enumerate_assignments
from src.services.fragment_service import ensure_fragment, region_names
from src.services.monitor_service import robustness, satisfies
from src.services.pipeline_service import PipelineService
from src.services.report_service import get_report_service
from src.startup import configure_logging, get_settings, reset_settings
from src.storage.file_handler import get_file_handler

logger = structlog.get_logger(__name__)

EXIT_SUCCESS = 0
EXIT_ERROR = 1
EXIT_PARTIAL = 2
EXIT_INFEASIBLE = 3
EXIT_INPUT_ERROR = 4
EXIT_NOT_FOUND = 5

_STATUS_CODES = {
    PlanStatus.SUCCESS: EXIT_SUCCESS,
    PlanStatus.PARTIAL: EXIT_PARTIAL,
    PlanStatus.INFEASIBLE: EXIT_INFEASIBLE,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stlinc", description="Incremental planning for bounded STL specifications")
    parser.add_argument("--log-level", default=None, help="Override STLINC_LOG_LEVEL")
    parser.add_argument("--log-format", choices=("console", "json"), default=None, help="Override STLINC_LOG_FORMAT")
    parser.add_argument("--max-enum", type=int, default=None, help="Cap on enumerated time-variable assignments")
    sub = parser.add_subparsers(dest="command", required=True)

    def variable_mode(p):
        p.add_argument("--variable-mode", choices=("fresh", "shared"), default=None,
                       help="Inner variables under always: fresh per copy or shared")

    run = sub.add_parser("run", help="Run the full pipeline and write artifacts")
    run.add_argument("--spec", required=True, help="Specification file")
    run.add_argument("--env", default=None, help="Environment JSON (default: shipped environment)")
    run.add_argument("--out", default=None, help="Output directory (default: STLINC_OUTPUT_DIR)")
    run.add_argument("--svg", action="store_true", help="Also render the plan as SVG")
    run.add_argument("--seed", type=int, default=None, help="Recorded in the report; planning is deterministic")
    run.add_argument("--json", action="store_true", help="Print the run report as JSON")
    variable_mode(run)

    bench = sub.add_parser("bench", help="Run the built-in benchmark suite")
    bench.add_argument("--env", default=None, help="Environment JSON (default: shipped environment)")
    bench.add_argument("--only", nargs="*", choices=[b.name for b in BENCHMARKS] + [b.label for b in BENCHMARKS],
                       help="Subset of benchmarks, by name or label")
    bench.add_argument("--json", action="store_true", help="Print rows as JSON")

    flatten = sub.add_parser("flatten", help="Print the flattened constraints")
    flatten.add_argument("spec", help="Specification file")
    flatten.add_argument("--json", action="store_true")
    flatten.add_argument("--assignments", action="store_true",
                         help="Also list every time-variable assignment (capped by --max-enum)")
    variable_mode(flatten)

    resolve = sub.add_parser("resolve", help="Print the constraints after symbolic time resolution")
    resolve.add_argument("spec", help="Specification file")
    resolve.add_argument("--json", action="store_true")
    variable_mode(resolve)

    schedule = sub.add_parser("schedule", help="Schedule and plan, printing the trace")
    schedule.add_argument("spec", help="Specification file")
    schedule.add_argument("--env", default=None, help="Environment JSON (default: shipped environment)")
    schedule.add_argument("--trace", default=None, help="Write the JSONL trace here instead of stdout")
    schedule.add_argument("--json", action="store_true")
    variable_mode(schedule)

    monitor = sub.add_parser("monitor", help="Robustness of a specification over a trajectory CSV")
    monitor.add_argument("spec", help="Specification file")
    monitor.add_argument("trajectory", help="Trajectory CSV with a header row")
    monitor.add_argument("--env", default=None, help="Environment JSON, needed for region propositions")
    monitor.add_argument("--at", type=int, default=None, help="Evaluation step (default: first step)")
    monitor.add_argument("--json", action="store_true")
    return parser


def _apply_overrides(args: argparse.Namespace) -> None:
    update = {}
    if args.log_level:
        update["log_level"] = args.log_level
    if args.log_format:
        update["log_format"] = args.log_format
    if args.max_enum:
        update["max_enum"] = args.max_enum
    if getattr(args, "variable_mode", None):
        update["variable_mode"] = args.variable_mode
    if update:
        reset_settings(get_settings().model_copy(update=update))
    configure_logging()


def _cmd_run(args) -> int:
    files = get_file_handler()
    settings = get_settings()
    text = files.read_spec(args.spec)
    env = files.load_environment(args.env)
    result = PipelineService(env, settings).run(text, seed=args.seed)
    report = result.report

    out = Path(args.out) if args.out else settings.output_dir
    reports = get_report_service()
    files.write_json(report.model_dump(mode="json"), out / "report.json")
    files.write_text(result.schedule.trace_jsonl(), out / "trace.jsonl")
    if result.schedule.trajectory is not None:
        files.write_trajectory_csv(result.schedule.trajectory, out / "trajectory.csv")
    if args.svg:
        svg = reports.render_svg(env, result.schedule.trajectory, title=report.spec)
        files.write_text(svg, out / "plan.svg")

    if args.json:
        print(report.model_dump_json(indent=2))
    else:
        rho = f"{report.robustness:.6f}" if report.robustness is not None else "-"
        print(f"status: {report.status.value}")
        print(f"robustness: {rho}")
        print(f"atomic tasks: {report.atomic_task_count}")
        print(f"solve time: {report.solve_time:.3f}s")
        if report.failure is not None:
            print(f"failure: {report.failure.reason}: {report.failure.message}")
        print(f"artifacts: {out}")
    return _STATUS_CODES[report.status]


def _cmd_bench(args) -> int:
    env = get_file_handler().load_environment(args.env)
    rows = run_suite(env, get_settings(), names=args.only or None)
    if args.json:
        print(json.dumps([row.model_dump() for row in rows], indent=2))
    else:
        print(get_report_service().bench_table(rows), end="")
    return EXIT_SUCCESS


def _cmd_flatten(args) -> int:
    service = PipelineService(env=None, settings=get_settings())
    flat = service.flatten(service.parse(get_file_handler().read_spec(args.spec)))
    reports = get_report_service()
    assignments = None
    if args.assignments:
        # raises EnumerationCapError before anything is printed
        assignments = [{v.name: k for v, k in a.items()}
                       for a in enumerate_assignments(flat.tc, get_settings().max_enum)]
    if args.json:
        doc = reports.flatten_document(flat)
        if assignments is not None:
            doc["assignments"] = assignments
        print(json.dumps(doc, indent=2))
    else:
        print(reports.constraint_report(flat), end="")
        if assignments is not None:
            print(f"# assignments: {len(assignments)}")
            for a in assignments:
                print(" ".join(f"{name}={k}" for name, k in a.items()))
    return EXIT_SUCCESS


def _cmd_resolve(args) -> int:
    service = PipelineService(env=None, settings=get_settings())
    resolved = service.resolve(service.flatten(service.parse(get_file_handler().read_spec(args.spec))))
    reports = get_report_service()
    if args.json:
        print(json.dumps(reports.resolve_document(resolved), indent=2))
    else:
        print(reports.constraint_report(resolved), end="")
    return EXIT_SUCCESS


def _cmd_schedule(args) -> int:
    files = get_file_handler()
    env = files.load_environment(args.env)
    service = PipelineService(env, get_settings())
    formula = service.parse(files.read_spec(args.spec))
    result = service.schedule(service.resolve(service.flatten(formula)), formula)
    reports = get_report_service()
    if args.trace:
        files.write_text(result.trace_jsonl(), args.trace)
    if args.json:
        print(json.dumps(reports.schedule_document(result), indent=2))
    else:
        if not args.trace:
            print(result.trace_jsonl(), end="")
        print(reports.schedule_report(result), end="")
    return _STATUS_CODES[result.status]


def _cmd_monitor(args) -> int:
    files = get_file_handler()
    formula = parse(files.read_spec(args.spec))
    ensure_fragment(formula)
    trajectory = files.read_trajectory_csv(args.trajectory)
    env = files.load_environment(args.env) if (args.env or region_names(formula)) else None
    t = args.at if args.at is not None else trajectory.t0
    rho = robustness(formula, trajectory, t, env)
    ok = satisfies(formula, trajectory, t, env)
    if args.json:
        print(json.dumps({"robustness": rho, "satisfied": ok, "t": t}))
    else:
        print(repr(rho))
    return EXIT_SUCCESS


_COMMANDS = {
    "run": _cmd_run,
    "bench": _cmd_bench,
    "flatten": _cmd_flatten,
    "resolve": _cmd_resolve,
    "schedule": _cmd_schedule,
    "monitor": _cmd_monitor,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _apply_overrides(args)
        return _COMMANDS[args.command](args)
    except FileNotFoundError as e:
        print(f"error: file not found: {e.filename}", file=sys.stderr)
        return EXIT_NOT_FOUND
    except (SpecSyntaxError, FragmentViolationError, InvalidIntervalError, EnvironmentFileError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except StlIncError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:
        logger.exception("unexpected_error", command=args.command)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
