"""
stlinc API
HTTP access to the flatten / resolve / monitor stages and to full planning runs

    uvicorn src.api:app
"""

from contextlib import asynccontextmanager

import structlog
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from src.routes.pipeline_routes import router as pipeline_router
from src.startup import configure_logging, get_settings

logger = structlog.get_logger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Handle application startup and shutdown"""
    configure_logging()
    settings = get_settings()
    logger.info("api_starting", default_env=str(settings.default_env_path), variable_mode=settings.variable_mode)
    yield
    logger.info("api_stopping")


# Create FastAPI app
app = FastAPI(
    title="stlinc API",
    description="Incremental planning for bounded STL specifications",
    version="1.0.0",
    lifespan=lifespan
)

# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


# Health check endpoint
@app.get("/health")
async def health_check():
    return {"status": "healthy", "service": "stlinc"}


@app.get("/")
async def root():
    return {
        "service": "stlinc",
        "version": "1.0.0",
        "endpoints": ["/api/v1/flatten", "/api/v1/resolve", "/api/v1/monitor", "/api/v1/run"],
    }


app.include_router(pipeline_router, prefix="/api/v1", tags=["pipeline"])
