import logging
from fastapi import Request, status
from fastapi.responses import JSONResponse
from sqlalchemy.exc import SQLAlchemyError

from app.core.exceptions import (
    ConstructionError,
    EmptyVersionSet,
    FiberGuardExceeded,
    InfeasibleInstance,
    MioracleError,
    NoFeasibleFound,
    StructuralError,
    UnsupportedQueryClass,
)

logger = logging.getLogger(__name__)

# First match wins; subclasses precede MioracleError.
ERROR_STATUS: list[tuple[type[MioracleError], int, str]] = [
    (StructuralError, status.HTTP_422_UNPROCESSABLE_ENTITY, "structural_error"),
    (UnsupportedQueryClass, status.HTTP_422_UNPROCESSABLE_ENTITY, "unsupported_query_class"),
    (ConstructionError, status.HTTP_422_UNPROCESSABLE_ENTITY, "construction_error"),
    (InfeasibleInstance, status.HTTP_409_CONFLICT, "infeasible_instance"),
    (NoFeasibleFound, status.HTTP_409_CONFLICT, "no_feasible_found"),
    (EmptyVersionSet, status.HTTP_409_CONFLICT, "empty_version_set"),
    (FiberGuardExceeded, status.HTTP_413_REQUEST_ENTITY_TOO_LARGE, "fiber_guard_exceeded"),
]


def classify(exc: MioracleError) -> tuple[int, str]:
    for error_type, status_code, label in ERROR_STATUS:
        if isinstance(exc, error_type):
            return status_code, label
    return status.HTTP_500_INTERNAL_SERVER_ERROR, "solver_error"


async def mioracle_exception_handler(request: Request, exc: MioracleError) -> JSONResponse:
    status_code, label = classify(exc)
    if status_code >= 500:
        logger.error(f"Solver error on {request.url.path}: {exc}", exc_info=True)
    else:
        logger.warning(f"{type(exc).__name__} on {request.url.path}: {exc}")
    return JSONResponse(status_code=status_code, content={"detail": str(exc), "type": label})


async def sqlalchemy_exception_handler(
    request: Request, exc: SQLAlchemyError
) -> JSONResponse:
    logger.error(f"Database error on {request.url.path}: {exc}", exc_info=True)
    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content={
            "detail": "A database error occurred. Please try again later.",
            "type": "database_error",
        },
    )


async def general_exception_handler(request: Request, exc: Exception) -> JSONResponse:
    logger.error(f"Unexpected error on {request.url.path}: {exc}", exc_info=True)
    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content={
            "detail": "An unexpected error occurred. Please try again later.",
            "type": "internal_server_error",
        },
    )
