"""
Pipeline API Routes

Endpoints for the individual pipeline stages and full runs.
"""

from typing import Any, Dict

import structlog
from fastapi import APIRouter, HTTPException

from src.models.api_models import MonitorRequest, MonitorResponse, RunRequest, RunResponse, SpecRequest
from src.models.trajectory_models import Trajectory
from src.parsers.spec_parser import parse
from src.services.fragment_service import ensure_fragment
from src.services.monitor_service import robustness, satisfies
from src.services.pipeline_service import PipelineService
from src.services.report_service import get_report_service
from src.startup import get_settings
from src.storage.file_handler import CSV_HEADER, get_file_handler

logger = structlog.get_logger(__name__)
router = APIRouter()


@router.post("/flatten")
async def flatten_spec(request: SpecRequest) -> Dict[str, Any]:
    """Flatten a specification into reachability / invariance constraints"""
    try:
        service = PipelineService(env=None, settings=get_settings(), variable_mode=request.variable_mode)
        flat = service.flatten(service.parse(request.spec))
        return get_report_service().flatten_document(flat)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error("flatten_request_failed", error=str(e))
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/resolve")
async def resolve_spec(request: SpecRequest) -> Dict[str, Any]:
    """Flatten and resolve symbolic time variables"""
    try:
        service = PipelineService(env=None, settings=get_settings(), variable_mode=request.variable_mode)
        resolved = service.resolve(service.flatten(service.parse(request.spec)))
        return get_report_service().resolve_document(resolved)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error("resolve_request_failed", error=str(e))
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/monitor", response_model=MonitorResponse)
async def monitor_signal(request: MonitorRequest) -> MonitorResponse:
    """Robustness and Boolean satisfaction of a formula over a signal"""
    try:
        formula = parse(request.spec)
        ensure_fragment(formula)
        if not request.channels:
            raise ValueError("at least one channel is required")
        trajectory = Trajectory.from_columns(request.channels, t0=request.t0)
        t = request.t if request.t is not None else request.t0
        return MonitorResponse(
            robustness=robustness(formula, trajectory, t, request.environment),
            satisfied=satisfies(formula, trajectory, t, request.environment),
            t=t,
        )
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error("monitor_request_failed", error=str(e))
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/run", response_model=RunResponse)
def run_spec(request: RunRequest) -> RunResponse:
    """Run the full pipeline; the plan is returned inline"""
    try:
        env = request.environment or get_file_handler().load_environment()
        init = tuple(request.initial_state) if request.initial_state else None
        result = PipelineService(env, get_settings(), request.variable_mode).run(request.spec, init=init)
        trajectory = None
        traj = result.schedule.trajectory
        if traj is not None:
            trajectory = []
            for i, t in enumerate(traj.times()):
                row = dict(zip(CSV_HEADER[1:5], traj.state_at(t)))
                if i < len(traj.inputs):
                    row.update(zip(CSV_HEADER[5:], (float(u) for u in traj.inputs[i])))
                trajectory.append({"step": t, **row})
        return RunResponse(
            report=result.report,
            trajectory=trajectory,
            trace=[record.model_dump(mode="json") for record in result.schedule.trace],
        )
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error("run_request_failed", error=str(e))
        raise HTTPException(status_code=500, detail=str(e))
