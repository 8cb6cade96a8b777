from fastapi import APIRouter

from app.config.env_settings import settings
from app.core.catalog import instance_from_file
from app.core.centerpoint import SolverConfig, solve
from app.schemas.solver import SolverReport, SolveRequest

router = APIRouter(tags=["solver"])


@router.post(
    "/solve",
    response_model=SolverReport,
    summary="Run the centerpoint solver",
    description="Minimize an instance with exact, bit or direction oracles",
)
def solve_instance(request: SolveRequest) -> SolverReport:
    config = SolverConfig(
        eps=request.eps,
        mode=request.mode,
        seed=settings.DEFAULT_SEED if request.seed is None else request.seed,
        max_iterations=request.max_iterations,
        centerpoint_samples=request.samples or settings.CENTERPOINT_SAMPLES,
        centerpoint_directions=settings.CENTERPOINT_DIRECTIONS,
    )
    return solve(instance_from_file(request.instance), config)
