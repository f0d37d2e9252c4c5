"""
Startup configuration for stlinc
Loads settings from the environment (and an optional .env file) and configures logging
"""

import logging
import os
import sys
from pathlib import Path
from typing import Optional

import structlog
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator

PROJECT_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_ENV_FILE = PROJECT_ROOT / "config" / "environments" / "default_env.json"


class Settings(BaseModel):
    """Runtime settings, read from STLINC_* environment variables"""

    model_config = ConfigDict(frozen=True)

    log_level: str = Field("INFO", description="Root log level")
    log_format: str = Field("console", description="console or json")
    max_unroll: int = Field(10_000, ge=1, description="Cap on constraints produced by always-unrolling")
    max_enum: int = Field(10_000, ge=1, description="Cap on enumerated assignments")
    variable_mode: str = Field("fresh", description="Inner variables under always: fresh or shared")
    planner_epsilon: float = Field(1e-6, ge=0.0, description="Minimum margin counted as satisfaction")
    margin_saturation: float = Field(0.5, gt=0.0, description="Margins above this rank equal in search")
    max_expansions: int = Field(200_000, ge=1, description="Planner node expansion cap")
    max_iterations: int = Field(10_000, ge=1, description="Scheduler loop cap")
    default_env_path: Path = Field(DEFAULT_ENV_FILE, description="Environment used when none is given")
    output_dir: Path = Field(Path("out"), description="Default artifact directory")

    @field_validator("log_format")
    @classmethod
    def validate_log_format(cls, v: str) -> str:
        v = v.lower()
        if v not in ("console", "json"):
            raise ValueError("log_format must be 'console' or 'json'")
        return v

    @field_validator("variable_mode")
    @classmethod
    def validate_variable_mode(cls, v: str) -> str:
        v = v.lower()
        if v not in ("fresh", "shared"):
            raise ValueError("variable_mode must be 'fresh' or 'shared'")
        return v

    @classmethod
    def from_env(cls) -> "Settings":
        """Build settings from the process environment"""
        load_dotenv()
        values = {
            "log_level": os.getenv("STLINC_LOG_LEVEL", "INFO"),
            "log_format": os.getenv("STLINC_LOG_FORMAT", "console"),
            "max_unroll": int(os.getenv("STLINC_MAX_UNROLL", "10000")),
            "max_enum": int(os.getenv("STLINC_MAX_ENUM", "10000")),
            "variable_mode": os.getenv("STLINC_VARIABLE_MODE", "fresh"),
            "planner_epsilon": float(os.getenv("STLINC_PLANNER_EPSILON", "1e-6")),
            "margin_saturation": float(os.getenv("STLINC_MARGIN_SATURATION", "0.5")),
            "max_expansions": int(os.getenv("STLINC_MAX_EXPANSIONS", "200000")),
            "max_iterations": int(os.getenv("STLINC_MAX_ITERATIONS", "10000")),
            "default_env_path": Path(os.getenv("STLINC_DEFAULT_ENV", str(DEFAULT_ENV_FILE))),
            "output_dir": Path(os.getenv("STLINC_OUTPUT_DIR", "out")),
        }
        return cls(**values)


# Global instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get or create the global settings"""
    global _settings
    if _settings is None:
        _settings = Settings.from_env()
    return _settings


def reset_settings(settings: Optional[Settings] = None) -> None:
    """Replace the global settings (None re-reads the environment on next access)"""
    global _settings
    _settings = settings


def configure_logging(settings: Optional[Settings] = None) -> None:
    """Configure structlog and the stdlib root logger"""
    settings = settings or get_settings()
    level = getattr(logging, settings.log_level.upper(), logging.INFO)

    # log output goes to stderr so that stdout stays clean for reports
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level, force=True)

    if settings.log_format == "json":
        renderer = structlog.processors.JSONRenderer(sort_keys=True)
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=False)

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
