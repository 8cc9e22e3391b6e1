from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from contextlib import asynccontextmanager
import logging
import time

from app.core.config import settings
from app.routers import convert, cosets, derive, survey
from app.schemas.chains import ChainId
from app.services.curve import get_table
from app.services.scalar_group import COSET_COUNT, H, check_generator_fixture

logging.basicConfig(
    level=settings.LOG_LEVEL,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

_state = {"fixture_checked": False, "window_bits": None}


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Check the coset generators and warm the fixed-base table before serving."""
    logger.info(f"Starting {settings.APP_NAME} {settings.APP_VERSION}")
    try:
        _state["fixture_checked"] = check_generator_fixture(settings.GENERATORS_FIXTURE)
        table = get_table(settings.WINDOW_BITS)
        _state["window_bits"] = table.window_bits
        logger.info(f"Fixed-base table ready: {table.windows} windows of {table.window_bits} bits")
    except Exception as e:
        logger.error(f"Startup failed: {e}")
        raise

    yield

    logger.info(f"{settings.APP_NAME} stopped")


app = FastAPI(
    title=settings.APP_NAME,
    version=settings.APP_VERSION,
    description="Coset key-space scanner: derivation, coset structure and subgroup surveys over HTTP",
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

for module in (derive, cosets, survey, convert):
    app.include_router(module.router)


@app.get("/health")
async def health_check():
    return {
        "status": "healthy",
        "app_name": settings.APP_NAME,
        "version": settings.APP_VERSION,
        "generator_fixture_checked": _state["fixture_checked"],
        "window_bits": _state["window_bits"],
        "engine": settings.ENGINE,
        "timestamp": time.time(),
    }


@app.get("/")
async def root():
    """Service summary and route map."""
    return {
        "message": settings.APP_NAME,
        "version": settings.APP_VERSION,
        "subgroup_order": H,
        "cosets": COSET_COUNT,
        "chains": [chain.value for chain in ChainId],
        "endpoints": {
            "derive": "/api/derive",
            "cosets": "/api/cosets",
            "survey": "/api/survey",
            "convert_cashaddr": "/api/convert/cashaddr",
        },
        "docs": "/docs",
        "health": "/health",
    }


@app.exception_handler(Exception)
async def global_exception_handler(request: Request, exc: Exception):
    logger.error(f"Unhandled exception on {request.method} {request.url.path}: {exc}")
    return JSONResponse(status_code=500, content={"detail": "Internal server error"})


if __name__ == "__main__":
    import uvicorn
    uvicorn.run("main:app", host="0.0.0.0", port=8000, reload=settings.DEBUG, log_level="info")
