"""
API Pydantic Models
Request and response bodies of the HTTP surface
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from src.models.environment_models import Environment
from src.models.report_models import RunReport


class SpecRequest(BaseModel):
    """Specification text plus flattening options"""
    spec: str = Field(..., description="Formula text")
    variable_mode: Optional[str] = Field(None, description="fresh or shared (default from settings)")


class MonitorRequest(BaseModel):
    """Formula and a trajectory given as named channel columns"""
    spec: str = Field(..., description="Formula text")
    channels: Dict[str, List[float]] = Field(..., description="Channel name -> values")
    t0: int = Field(0, description="Absolute step of the first sample")
    t: Optional[int] = Field(None, description="Evaluation step (default t0)")
    environment: Optional[Environment] = Field(None, description="Needed for region propositions")


class MonitorResponse(BaseModel):
    robustness: float
    satisfied: bool
    t: int


class RunRequest(SpecRequest):
    """Full pipeline run"""
    environment: Optional[Environment] = Field(None, description="Environment (default: shipped one)")
    initial_state: Optional[List[float]] = Field(None, min_length=4, max_length=4,
                                                 description="Override of the environment start state")


class RunResponse(BaseModel):
    report: RunReport
    trajectory: Optional[List[Dict[str, Any]]] = Field(None, description="One object per step")
    trace: List[Dict[str, Any]] = Field(default_factory=list)
