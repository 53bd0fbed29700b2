"""
Pydantic schemas for scenarios, experiments and API responses.

This module provides centralized imports for all schemas.
"""

from .scenario import ScenarioConfig, default_scenario, load_scenario
from .experiment import (
    ExperimentConfig,
    ExperimentRunResponse,
    ExperimentRunSummary,
    PathLossRequest,
    PathLossResponse,
    SweepRowResponse,
)

__all__ = [
    # Scenario schemas
    "ScenarioConfig",
    "default_scenario",
    "load_scenario",
    # Experiment schemas
    "ExperimentConfig",
    "ExperimentRunResponse",
    "ExperimentRunSummary",
    "PathLossRequest",
    "PathLossResponse",
    "SweepRowResponse",
]
