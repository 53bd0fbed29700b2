"""
Experiment routes for the simulator API.

This module runs Monte Carlo sweeps on request and provides CRUD access to
the stored runs, including a CSV export in the command-line format.
"""

import math
from typing import List, Optional
from fastapi import APIRouter, Depends, Query, Response, status
from fastapi.concurrency import run_in_threadpool
from sqlalchemy import desc, select
from sqlalchemy.ext.asyncio import AsyncSession
from sqlalchemy.orm import selectinload
import logging

from app.config import DEFAULT_THREADS, MAX_API_TRIALS
from app.database import get_db
from app.exceptions import ExperimentNotFoundError, ScenarioValidationError
from app.models.experiment_run import ExperimentRun
from app.models.sweep_row import SweepRowRecord
from app.schemas.experiment import ExperimentConfig, ExperimentRunResponse, ExperimentRunSummary, SweepRowResponse
from app.services.experiments import SweepResult, SweepRow, format_csv, run_sweep

logger = logging.getLogger(__name__)

router = APIRouter(
    prefix="/experiments",
    tags=["Experiments"],
    responses={404: {"description": "Not found"}},
)


def _finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def _to_response(run: ExperimentRun) -> ExperimentRunResponse:
    """Build the response model with rows in CSV order."""
    rows = sorted(run.rows, key=lambda r: (r.sweep_value, r.scheme, r.metric))
    return ExperimentRunResponse(
        id=run.id,
        name=run.name,
        sweep=run.sweep,
        n_trials=run.n_trials,
        master_seed=int(run.master_seed),
        created_at=run.created_at,
        duration_seconds=run.duration_seconds,
        config=ExperimentConfig.model_validate_json(run.config_json),
        rows=[SweepRowResponse.model_validate(row) for row in rows],
    )


async def _get_run(run_id: int, db: AsyncSession) -> ExperimentRun:
    result = await db.execute(
        select(ExperimentRun)
        .options(selectinload(ExperimentRun.rows))
        .where(ExperimentRun.id == run_id)
    )
    run = result.scalar_one_or_none()
    if run is None:
        raise ExperimentNotFoundError(f"Experiment run {run_id} not found")
    return run


@router.post("/", response_model=ExperimentRunResponse, status_code=status.HTTP_201_CREATED)
async def create_experiment(config: ExperimentConfig, db: AsyncSession = Depends(get_db)):
    """
    Run a sweep and store it.

    The sweep runs in a worker thread so the event loop stays responsive.

    Raises:
        ScenarioValidationError: 422 if n_trials exceeds the API cap or a block cannot hold the training
    """
    if config.n_trials > MAX_API_TRIALS:
        raise ScenarioValidationError(
            f"n_trials={config.n_trials} exceeds the API limit of {MAX_API_TRIALS}",
            {"n_trials": config.n_trials, "limit": MAX_API_TRIALS},
        )

    result: SweepResult = await run_in_threadpool(run_sweep, config, DEFAULT_THREADS)

    run = ExperimentRun(
        name=config.name,
        sweep=config.sweep,
        n_trials=config.n_trials,
        master_seed=str(config.master_seed),
        config_json=config.model_dump_json(),
        duration_seconds=result.duration_seconds,
    )
    run.rows = [
        SweepRowRecord(
            sweep_value=row.sweep_value,
            scheme=row.scheme,
            metric=row.metric,
            mean=_finite_or_none(row.mean),
            stderr=_finite_or_none(row.stderr),
            n_valid=row.n_valid,
            n_degenerate=row.n_degenerate,
        )
        for row in result.sorted_rows()
    ]
    db.add(run)
    await db.commit()
    logger.info(f"Stored experiment run {run.id} ({config.sweep}, {len(run.rows)} rows)")

    return _to_response(await _get_run(run.id, db))


@router.get("/", response_model=List[ExperimentRunSummary])
async def list_experiments(
    limit: int = Query(50, ge=1, le=500),
    db: AsyncSession = Depends(get_db)
):
    """List stored runs, newest first."""
    result = await db.execute(
        select(ExperimentRun).order_by(desc(ExperimentRun.created_at), desc(ExperimentRun.id)).limit(limit)
    )
    return result.scalars().all()


@router.get("/{run_id}", response_model=ExperimentRunResponse)
async def get_experiment(run_id: int, db: AsyncSession = Depends(get_db)):
    """
    Retrieve a stored run with its rows.

    Raises:
        ExperimentNotFoundError: 404 if the run does not exist
    """
    return _to_response(await _get_run(run_id, db))


@router.get("/{run_id}/csv")
async def get_experiment_csv(run_id: int, db: AsyncSession = Depends(get_db)):
    """Stored rows as CSV text (missing statistics are written as nan)."""
    run = await _get_run(run_id, db)
    rows = [
        SweepRow(
            sweep_value=r.sweep_value,
            scheme=r.scheme,
            metric=r.metric,
            mean=math.nan if r.mean is None else r.mean,
            stderr=math.nan if r.stderr is None else r.stderr,
            n_valid=r.n_valid,
            n_degenerate=r.n_degenerate,
        )
        for r in run.rows
    ]
    return Response(
        content=format_csv(SweepResult(rows=rows)),
        media_type="text/csv",
        headers={"Content-Disposition": f'attachment; filename="experiment_{run_id}.csv"'},
    )


@router.delete("/{run_id}", status_code=status.HTTP_204_NO_CONTENT)
async def delete_experiment(run_id: int, db: AsyncSession = Depends(get_db)):
    """
    Delete a stored run and its rows.

    Raises:
        ExperimentNotFoundError: 404 if the run does not exist
    """
    run = await _get_run(run_id, db)
    await db.delete(run)
    await db.commit()
    logger.info(f"Deleted experiment run {run_id}")
    return Response(status_code=status.HTTP_204_NO_CONTENT)
