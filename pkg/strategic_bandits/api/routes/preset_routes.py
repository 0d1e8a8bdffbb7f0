from typing import List, Optional

from fastapi import APIRouter, Depends, HTTPException, Path, Query, status

from strategic_bandits.controllers.bound_controller import BoundController
from strategic_bandits.controllers.preset_controller import PresetController
from strategic_bandits.errors import ConfigError
from strategic_bandits.schemas.results import BoundReport, PresetSummary
from strategic_bandits.schemas.scenario import ScenarioConfig

router = APIRouter(prefix="/api", tags=["Presets"])


def _lookup(controller: PresetController, name: str) -> ScenarioConfig:
    try:
        return controller.get_preset(name)
    except ConfigError as e:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=str(e))


@router.get("/presets", response_model=List[PresetSummary])
async def list_presets(preset_controller: PresetController = Depends()) -> List[PresetSummary]:
    """
    List the built-in scenarios
    """
    return preset_controller.list_presets()


@router.get("/presets/{name}", response_model=ScenarioConfig)
async def get_preset(
    name: str = Path(..., description="Preset tag"),
    preset_controller: PresetController = Depends(),
) -> ScenarioConfig:
    """
    Get the full scenario configuration of a preset
    """
    return _lookup(preset_controller, name)


@router.get("/bounds/{preset}", response_model=BoundReport)
async def get_bounds(
    preset: str = Path(..., description="Preset tag"),
    T: Optional[int] = Query(None, ge=2, description="Horizon"),
    L: Optional[float] = Query(None, gt=0, description="RH-UCB subsample factor"),
    preset_controller: PresetController = Depends(),
    bound_controller: BoundController = Depends(),
) -> BoundReport:
    """
    Evaluate the closed-form regret bounds for a preset
    """
    config = _lookup(preset_controller, preset)
    try:
        return bound_controller.evaluate(config, horizon=T, L=L)
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
