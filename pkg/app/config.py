"""
Runtime configuration and logging setup for the double-IRS simulator.

Environment variables are read once from the process environment (and an
optional ``.env`` file). Simulation parameters themselves live in the
pydantic schemas under ``app.schemas``; this module only covers how the
process runs.
"""

import os
import logging
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

DATABASE_URL = os.getenv("DATABASE_URL", "sqlite:///./experiments.db")
DEFAULT_THREADS = int(os.getenv("SIM_THREADS", "1"))
MAX_API_TRIALS = int(os.getenv("SIM_MAX_API_TRIALS", "2000"))
ALLOWED_ORIGINS = [
    origin.strip()
    for origin in os.getenv("ALLOWED_ORIGINS", "http://localhost:3000,http://localhost:5173").split(",")
    if origin.strip()
]


def is_debug() -> bool:
    """Return True when DEBUG=true in the environment."""
    return os.getenv("DEBUG", "false").lower() == "true"


def setup_logging() -> logging.Logger:
    """Configure structured logging for the simulator, CLI and API."""
    log_level = os.getenv("LOG_LEVEL", "INFO").upper()
    debug_mode = is_debug()

    if debug_mode:
        log_level = "DEBUG"

    log_format = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    if debug_mode:
        # More detailed format for development
        log_format = "%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(funcName)s - %(message)s"

    logging.basicConfig(
        level=getattr(logging, log_level, logging.INFO),
        format=log_format,
        datefmt="%Y-%m-%d %H:%M:%S"
    )

    logging.getLogger("sqlalchemy.engine").setLevel(logging.WARNING if not debug_mode else logging.INFO)
    logging.getLogger("uvicorn.access").setLevel(logging.WARNING)

    return logging.getLogger("app")
