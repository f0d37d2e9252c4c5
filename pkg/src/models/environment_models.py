"""
Environment Pydantic Models
Workspace geometry, dynamics limits and search quantization loaded from JSON
"""

import itertools
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.exceptions import UnknownRegionError


class RegionRole(str, Enum):
    """Region role tag"""
    REGION = "region"
    OBSTACLE = "obstacle"


class RegionShape(str, Enum):
    """Supported region geometry"""
    RECTANGLE = "rectangle"
    CIRCLE = "circle"


class Rectangle(BaseModel):
    """Axis-aligned rectangle"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    xmin: float = Field(..., description="Left edge")
    xmax: float = Field(..., description="Right edge")
    ymin: float = Field(..., description="Bottom edge")
    ymax: float = Field(..., description="Top edge")

    @model_validator(mode="after")
    def validate_extent(self):
        if self.xmin >= self.xmax or self.ymin >= self.ymax:
            raise ValueError("rectangle must have positive width and height")
        return self

    def contains(self, other: "Rectangle") -> bool:
        return (self.xmin <= other.xmin and other.xmax <= self.xmax
                and self.ymin <= other.ymin and other.ymax <= self.ymax)


class Region(BaseModel):
    """Named region or obstacle"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = Field(..., min_length=1, description="Identifier used in specifications")
    role: RegionRole = Field(RegionRole.REGION, description="region or obstacle")
    shape: RegionShape = Field(RegionShape.RECTANGLE, description="rectangle or circle")
    rect: Optional[Rectangle] = Field(None, description="Extent for rectangle regions")
    center: Optional[Tuple[float, float]] = Field(None, description="Center for circle regions")
    radius: Optional[float] = Field(None, gt=0, description="Radius for circle regions")

    @field_validator("name")
    @classmethod
    def validate_name(cls, v):
        if not (v[0].isalpha() or v[0] == "_") or not v.replace("_", "").isalnum():
            raise ValueError("region names must be identifiers")
        if v in ("true", "false"):
            raise ValueError("true/false are reserved")
        return v

    @model_validator(mode="after")
    def validate_geometry(self):
        if self.shape == RegionShape.RECTANGLE and self.rect is None:
            raise ValueError(f"rectangle region {self.name} needs 'rect'")
        if self.shape == RegionShape.CIRCLE and (self.center is None or self.radius is None):
            raise ValueError(f"circle region {self.name} needs 'center' and 'radius'")
        return self

    @property
    def bounding_box(self) -> Rectangle:
        if self.shape == RegionShape.RECTANGLE:
            return self.rect
        cx, cy = self.center
        return Rectangle(xmin=cx - self.radius, xmax=cx + self.radius,
                         ymin=cy - self.radius, ymax=cy + self.radius)


class DynamicsConfig(BaseModel):
    """Discrete double-integrator parameters"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    dt: float = Field(1.0, gt=0, description="Time step length")
    accelerations: List[float] = Field([-1.0, 0.0, 1.0], description="Per-axis acceleration alphabet")
    vmax: float = Field(2.0, gt=0, description="Per-axis velocity clamp")

    @field_validator("accelerations")
    @classmethod
    def validate_accelerations(cls, v):
        if not v:
            raise ValueError("acceleration alphabet must not be empty")
        if 0.0 not in v:
            raise ValueError("acceleration alphabet must contain 0")
        return sorted(set(float(a) for a in v))

    @property
    def amax(self) -> float:
        return max(abs(a) for a in self.accelerations)


class QuantizationConfig(BaseModel):
    """Grid used only to deduplicate search states"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    position: float = Field(0.25, gt=0, description="Position cell size")
    velocity: float = Field(0.25, gt=0, description="Velocity cell size")


class Environment(BaseModel):
    """Planning environment"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = Field("default", description="Environment label")
    version: str = Field("1", description="Document version")
    bounds: Rectangle = Field(..., description="Workspace rectangle")
    regions: List[Region] = Field(default_factory=list, description="Named regions and obstacles")
    dynamics: DynamicsConfig = Field(default_factory=DynamicsConfig)
    quantization: QuantizationConfig = Field(default_factory=QuantizationConfig)
    initial_state: Tuple[float, float, float, float] = Field(
        (0.0, 0.0, 0.0, 0.0), description="Start state (px, py, vx, vy)"
    )

    @model_validator(mode="after")
    def validate_layout(self):
        names = [r.name for r in self.regions]
        if len(names) != len(set(names)):
            raise ValueError("region names must be unique")
        for region in self.regions:
            if not self.bounds.contains(region.bounding_box):
                raise ValueError(f"region {region.name} lies outside the workspace")
        if not self.in_bounds(self.initial_state):
            raise ValueError("initial state lies outside the workspace")
        return self

    def region(self, name: str) -> Region:
        for r in self.regions:
            if r.name == name:
                return r
        raise UnknownRegionError(f"environment {self.name!r} has no region {name!r}")

    def in_bounds(self, state) -> bool:
        px, py = state[0], state[1]
        b = self.bounds
        return b.xmin <= px <= b.xmax and b.ymin <= py <= b.ymax

    def control_set(self) -> List[Tuple[float, float]]:
        """Product of the per-axis alphabet, in a fixed order"""
        acc = self.dynamics.accelerations
        return [(ux, uy) for ux, uy in itertools.product(acc, acc)]
