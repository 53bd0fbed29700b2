"""
Scenario routes: bundled defaults, sweep presets and a link-budget helper.
"""

from typing import List
from fastapi import APIRouter, HTTPException, status

from app.schemas.experiment import ExperimentConfig, PathLossRequest, PathLossResponse
from app.schemas.scenario import ScenarioConfig, default_scenario, linear_to_db
from app.services.channel import path_loss
from app.services.experiments import PRESET_NAMES, preset_config

router = APIRouter(
    prefix="/scenarios",
    tags=["Scenarios"],
    responses={404: {"description": "Not found"}},
)


@router.get("/default", response_model=ScenarioConfig)
async def get_default_scenario():
    """Return the bundled default deployment."""
    return default_scenario()


@router.get("/presets", response_model=List[str])
async def list_presets():
    """Names of the bundled sweep presets."""
    return list(PRESET_NAMES)


@router.get("/presets/{name}", response_model=ExperimentConfig)
async def get_preset(name: str):
    """
    Return a preset ExperimentConfig with the default trial count and seed.

    Raises:
        HTTPException: 404 if the preset does not exist
    """
    if name not in PRESET_NAMES:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=f"Preset '{name}' not found")
    return preset_config(name)


@router.post("/path-loss", response_model=PathLossResponse)
async def evaluate_path_loss(request: PathLossRequest):
    """Evaluate ``beta0 (d/d0)^-alpha`` under the given (or default) scenario."""
    scenario = request.scenario or default_scenario()
    gain = path_loss(request.distance, request.alpha, scenario)
    return PathLossResponse(
        distance=request.distance,
        alpha=request.alpha,
        gain=gain,
        gain_db=linear_to_db(gain),
    )
