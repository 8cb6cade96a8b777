from typing import Annotated
from fastapi import APIRouter, Depends, HTTPException, Query, status
from sqlalchemy.orm import Session
from app.config.db_settings import get_db
from app.core.constants import DEFAULT_PAGE_SIZE, MAX_PAGE_SIZE, MIN_PAGE_SIZE
from app.core.experiments import run_sweep
from app.repositories.runs_repository import RunsRepository
from app.schemas.experiment import ExperimentConfig, ExperimentRunResponse

router = APIRouter(prefix="/experiments", tags=["experiments"])


def get_runs_repo(db: Session = Depends(get_db)) -> RunsRepository:
    return RunsRepository(db)


@router.post(
    "/",
    response_model=ExperimentRunResponse,
    status_code=status.HTTP_201_CREATED,
    summary="Run and store a sweep",
    description="Run every cell of the sweep in declared order and store the run",
)
def create_run(
    config: ExperimentConfig,
    repo: RunsRepository = Depends(get_runs_repo),
) -> ExperimentRunResponse:
    return repo.create(run_sweep(config))


@router.get(
    "/",
    response_model=list[ExperimentRunResponse],
    summary="List stored runs",
    description="Get a paginated list of stored runs, newest first",
)
def list_runs(
    skip: Annotated[int, Query(ge=0, description="Number of records to skip")] = 0,
    limit: Annotated[
        int,
        Query(
            ge=MIN_PAGE_SIZE, le=MAX_PAGE_SIZE, description="Maximum number of records"
        ),
    ] = DEFAULT_PAGE_SIZE,
    repo: RunsRepository = Depends(get_runs_repo),
) -> list[ExperimentRunResponse]:
    return repo.get_all(skip=skip, limit=limit)


@router.get(
    "/{run_id}",
    response_model=ExperimentRunResponse,
    summary="Get a run by ID",
    description="Retrieve a stored run with all of its cells",
)
def get_run(
    run_id: int,
    repo: RunsRepository = Depends(get_runs_repo),
) -> ExperimentRunResponse:
    run: ExperimentRunResponse | None = repo.get_by_id(run_id)

    if not run:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail=f"Run with ID {run_id} not found",
        )

    return run


@router.delete(
    "/{run_id}",
    status_code=status.HTTP_204_NO_CONTENT,
    summary="Delete a run",
    description="Delete a stored run and its cells",
)
def delete_run(
    run_id: int,
    repo: RunsRepository = Depends(get_runs_repo),
) -> None:
    if not repo.delete(run_id):
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail=f"Run with ID {run_id} not found",
        )
