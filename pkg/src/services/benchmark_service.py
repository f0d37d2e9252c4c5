"""
Benchmark Service

Built-in motion-planning benchmark formulas and the suite runner. Every
formula is run as an independent pipeline; a failing one is reported in its
row and never aborts the suite.
"""

from typing import List, Optional

import structlog

from src.models.environment_models import Environment
from src.models.report_models import BenchmarkRow, BenchmarkSpec
from src.parsers.spec_parser import parse
from src.services.fragment_service import horizon, nesting_depth
from src.services.pipeline_service import PipelineService
from src.startup import Settings

logger = structlog.get_logger(__name__)

# R = reach, A = avoid, SV = sequenced visit, SB = stay-in-between
BENCHMARKS: List[BenchmarkSpec] = [
    BenchmarkSpec(label="phi1", name="reach_avoid", pattern="R+A",
                  formula="F[0,15](R1) & F[5,25](R2) & F[20,30](R3) & G[0,40](!O1)",
                  reference_horizon=40, reference_depth=0),
    BenchmarkSpec(label="phi2", name="visit_pair_avoid", pattern="SV+A",
                  formula="F[0,15](R1 & F[0,15](R2)) & G[0,40](!O1)",
                  reference_horizon=30, reference_depth=1),
    BenchmarkSpec(label="phi3", name="visit_chain", pattern="SV",
                  formula="F[0,15](R1 & F[0,15](R2 & F[0,20](R3 & F[0,15](R1))))",
                  reference_horizon=60, reference_depth=3),
    BenchmarkSpec(label="phi4", name="stay_reach_avoid", pattern="R+A+SB",
                  formula="F[0,15](G[0,10](R1)) & F[0,35](R2) & G[0,40](!O1)",
                  reference_horizon=40, reference_depth=2),
    BenchmarkSpec(label="phi5", name="visit_then_stay", pattern="SV+SB",
                  formula="F[0,15](R1 & F[0,20](G[0,10](R2)))",
                  reference_horizon=40, reference_depth=2),
]


def get_benchmark(name: str) -> BenchmarkSpec:
    """Look up a benchmark by name or by its short label (phi1 .. phi5)"""
    for spec in BENCHMARKS:
        if name in (spec.name, spec.label):
            return spec
    raise KeyError(f"unknown benchmark {name!r}")


def run_benchmark(spec: BenchmarkSpec, env: Environment, settings: Optional[Settings] = None) -> BenchmarkRow:
    """Run one benchmark; errors become an ``error`` row"""
    formula = parse(spec.formula)
    row = BenchmarkRow(label=spec.label, name=spec.name, pattern=spec.pattern, horizon=horizon(formula),
                       nesting_depth=nesting_depth(formula), status="error")
    try:
        result = PipelineService(env, settings).run(spec.formula)
    except Exception as e:
        logger.error("benchmark_failed", benchmark=spec.name, error=str(e))
        row.error = str(e)
        return row
    report = result.report
    row.solve_time = report.solve_time
    row.robustness = report.robustness
    row.status = report.status.value
    logger.info("benchmark_complete", benchmark=spec.name, status=row.status,
                robustness=row.robustness, solve_time=round(row.solve_time, 6))
    return row


def run_suite(env: Environment, settings: Optional[Settings] = None,
              names: Optional[List[str]] = None) -> List[BenchmarkRow]:
    """Run the built-in benchmarks in order (all of them unless names are given)"""
    specs = [get_benchmark(n) for n in names] if names else BENCHMARKS
    return [run_benchmark(spec, env, settings) for spec in specs]
