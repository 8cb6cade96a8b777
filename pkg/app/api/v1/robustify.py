from fastapi import APIRouter

from app.core.catalog import instance_from_file
from app.core.inexact.robustify import robustify
from app.schemas.robust import RobustReport, RobustRequest

router = APIRouter(tags=["robustify"])


@router.post(
    "/robustify",
    response_model=RobustReport,
    summary="Run an exact-oracle strategy against a noisy oracle",
    description="Route noisy answers through the under- and outer-approximation models",
)
def run_robustify(request: RobustRequest) -> RobustReport:
    return robustify(
        instance_from_file(request.instance),
        request.eta_f,
        request.eta_g,
        algo=request.algo,
        rounds=request.rounds,
        seed=request.seed,
        projection_points=request.projection_points,
    )
