"""
Double-IRS Simulator API

Runs seeded Monte Carlo sweeps of the double-IRS link on request and
stores their aggregated results.
"""

import logging
import time
import uuid
from contextlib import asynccontextmanager
from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.exceptions import RequestValidationError
from sqlalchemy.exc import SQLAlchemyError

from app.config import ALLOWED_ORIGINS, DATABASE_URL, DEFAULT_THREADS, MAX_API_TRIALS, is_debug, setup_logging
from app.routes import experiments, scenarios
from app.database import init_db, close_db
from app.exceptions import (
    SimulatorException,
    simulator_exception_handler,
    http_exception_handler,
    validation_exception_handler,
    sqlalchemy_exception_handler,
    generic_exception_handler
)

logger = setup_logging()

SERVICE_NAME = "double-irs-simulator"
VERSION = "1.0.0"


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Initialize the experiment store on startup and release it on shutdown."""
    logger.info("=" * 50)
    logger.info("Starting up Double-IRS Simulator API...")
    logger.info(f"Environment: {'Development' if is_debug() else 'Production'}")
    logger.info(f"Database URL: {DATABASE_URL}")
    logger.info(f"Sweep threads: {DEFAULT_THREADS}, max trials per request: {MAX_API_TRIALS}")

    try:
        await init_db()
        logger.info("Database initialized successfully")
    except Exception as e:
        logger.error(f"Failed to initialize database: {str(e)}")
        raise

    logger.info("=" * 50)
    yield

    logger.info("Shutting down Double-IRS Simulator API...")
    try:
        await close_db()
        logger.info("Database connections closed successfully")
    except Exception as e:
        logger.error(f"Error closing database connections: {str(e)}")


app = FastAPI(
    title="Double-IRS Simulator API",
    description="""
    Link-level simulator for a single-antenna user served through two
    cooperating intelligent reflecting surfaces.

    ## Features

    * **Scenarios**: Bundled default deployment, sweep presets and a path-loss helper
    * **Experiments**: Run seeded sweeps (NMSE, receive SNR, achievable rate) and store them
    * **Export**: Stored results as CSV, identical to the command-line output
    """,
    version=VERSION,
    docs_url="/docs",
    redoc_url="/redoc",
    lifespan=lifespan,
    openapi_tags=[
        {"name": "Scenarios", "description": "Scenario defaults, presets and link-budget checks."},
        {"name": "Experiments", "description": "Run, list, export and delete Monte Carlo sweeps."},
        {"name": "Health", "description": "API health check and status endpoints."},
    ],
)


@app.middleware("http")
async def logging_middleware(request: Request, call_next):
    """Log each request and response with a short request id and timing."""
    request_id = str(uuid.uuid4())[:8]
    start_time = time.time()
    debug_mode = is_debug()
    client = request.client.host if request.client else 'unknown'

    if debug_mode:
        logger.debug(f"Request [{request_id}] - {request.method} {request.url} - Client: {client}")
    else:
        logger.info(f"Request [{request_id}] - {request.method} {request.url.path} - Client: {client}")

    request.state.request_id = request_id

    try:
        response = await call_next(request)
    except Exception as e:
        processing_time = time.time() - start_time
        logger.error(
            f"Request [{request_id}] - Unhandled exception after {processing_time:.3f}s: {type(e).__name__}: {str(e)}"
        )
        raise

    processing_time = time.time() - start_time
    message = f"Response [{request_id}] - Status: {response.status_code} - Time: {processing_time:.3f}s"
    if response.status_code >= 500:
        logger.error(message)
    elif response.status_code >= 400:
        logger.warning(message)
    else:
        logger.info(message)

    response.headers["X-Request-ID"] = request_id
    return response


app.add_exception_handler(SimulatorException, simulator_exception_handler)
app.add_exception_handler(RequestValidationError, validation_exception_handler)
app.add_exception_handler(SQLAlchemyError, sqlalchemy_exception_handler)
app.add_exception_handler(HTTPException, http_exception_handler)
app.add_exception_handler(Exception, generic_exception_handler)

app.add_middleware(
    CORSMiddleware,
    allow_origins=ALLOWED_ORIGINS,
    allow_credentials=True,
    allow_methods=["GET", "POST", "DELETE", "OPTIONS"],
    allow_headers=["Content-Type", "Accept", "Origin"],
    expose_headers=["X-Request-ID"],
    max_age=86400,
)

app.include_router(scenarios.router)
app.include_router(experiments.router)


@app.get("/", tags=["Health"])
async def root():
    """Root endpoint for health check"""
    return {"message": "Double-IRS Simulator API is running", "version": VERSION}


@app.get("/health", tags=["Health"])
async def health_check():
    """Health check endpoint"""
    return {"status": "healthy", "service": SERVICE_NAME}


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "app.main:app",
        host="0.0.0.0",
        port=8000,
        reload=is_debug()
    )
