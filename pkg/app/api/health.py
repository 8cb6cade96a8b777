import logging
from fastapi import APIRouter, Depends, HTTPException, status
from pydantic import BaseModel
from sqlalchemy import text
from sqlalchemy.orm import Session

from app.config.db_settings import get_db
from app.config.env_settings import settings
from app.core.simplex import lp_feasible

logger = logging.getLogger(__name__)

router = APIRouter(tags=["health"])


class HealthResponse(BaseModel):
    status: str = "healthy"
    message: str = "API is running"


class HealthDetailResponse(HealthResponse):
    database: str = "connected"
    solver: str = "ok"


def _solver_check() -> bool:
    # y1 + y2 <= -1 in [-1, 1]^2 is feasible; y1 >= 2 is not.
    feasible = lp_feasible([([1.0, 1.0], -1.0)], 1.0, tol=settings.LP_TOLERANCE)
    empty = lp_feasible([([-1.0, 0.0], -2.0)], 1.0, tol=settings.LP_TOLERANCE)
    return feasible is not None and empty is None


@router.get(
    "/health",
    response_model=HealthResponse,
    summary="Health check",
    description="Basic health check endpoint to verify API is running",
)
def health_check() -> HealthResponse:
    return HealthResponse(status="healthy", message="API is running")


@router.get(
    "/health/detailed",
    response_model=HealthDetailResponse,
    summary="Detailed health check",
    description="Verifies run storage connectivity and solves two tiny feasibility LPs",
)
def detailed_health_check(db: Session = Depends(get_db)) -> HealthDetailResponse:
    try:
        db.execute(text("SELECT 1"))
    except Exception as e:
        logger.error(f"Database health check failed: {e}")
        raise HTTPException(
            status_code=status.HTTP_503_SERVICE_UNAVAILABLE,
            detail="API is running but database connection failed",
        )

    if not _solver_check():
        logger.error("Solver health check failed: feasibility LPs returned wrong answers")
        raise HTTPException(
            status_code=status.HTTP_503_SERVICE_UNAVAILABLE,
            detail="API is running but the LP solver self-check failed",
        )

    return HealthDetailResponse(
        status="healthy",
        message="API, database and solver are running",
        database="connected",
        solver="ok",
    )
