"""Shared fixtures"""

import pytest
import structlog
from hypothesis import HealthCheck, settings as hypothesis_settings

from src.startup import DEFAULT_ENV_FILE, Settings, reset_settings
from src.storage.file_handler import FileHandler

hypothesis_settings.register_profile(
    "stlinc",
    deadline=None,
    suppress_health_check=[HealthCheck.function_scoped_fixture, HealthCheck.too_slow, HealthCheck.filter_too_much],
)
hypothesis_settings.load_profile("stlinc")


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Every test starts from default settings, unaffected by a local .env"""
    for name in ("STLINC_LOG_LEVEL", "STLINC_LOG_FORMAT", "STLINC_MAX_UNROLL", "STLINC_MAX_ENUM",
                 "STLINC_VARIABLE_MODE", "STLINC_PLANNER_EPSILON", "STLINC_MARGIN_SATURATION",
                 "STLINC_MAX_EXPANSIONS", "STLINC_MAX_ITERATIONS", "STLINC_DEFAULT_ENV",
                 "STLINC_OUTPUT_DIR"):
        monkeypatch.delenv(name, raising=False)
    reset_settings(Settings())
    yield
    reset_settings(None)
    # drop any logger bound to a per-test capture stream that pytest has since closed
    structlog.reset_defaults()


@pytest.fixture(scope="session")
def env():
    return FileHandler().load_environment(DEFAULT_ENV_FILE)


@pytest.fixture
def settings():
    return Settings()


@pytest.fixture(scope="session")
def spec_dir():
    return DEFAULT_ENV_FILE.parent.parent.parent / "specs"
