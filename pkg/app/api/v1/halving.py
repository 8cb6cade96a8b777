from fastapi import APIRouter

from app.config.env_settings import settings
from app.core.catalog import instance_from_file
from app.core.centerpoint import CenterpointStrategy, SolverConfig
from app.core.exceptions import StructuralError
from app.core.halving import halving_report, shifted_family
from app.schemas.halving import HalvingReport, HalvingRequest

router = APIRouter(tags=["halving"])


@router.post(
    "/halving",
    response_model=HalvingReport,
    summary="Solve over a finite family with binary queries",
    description="Halve the surviving set and replay exact answers into the centerpoint solver",
)
def run_halving(request: HalvingRequest) -> HalvingReport:
    if request.family is not None:
        family = [instance_from_file(member) for member in request.family]
    else:
        family = shifted_family(request.size, request.eps, request.seed, d=request.d, n=request.n)
    label = request.true_label or family[0].label
    true_instance = next((inst for inst in family if inst.label == label), None)
    if true_instance is None:
        raise StructuralError(f"no family member is labelled {label!r}")
    config = SolverConfig(
        eps=request.eps,
        seed=request.seed,
        max_iterations=request.max_iterations,
        centerpoint_samples=request.samples or settings.CENTERPOINT_SAMPLES,
        centerpoint_directions=settings.CENTERPOINT_DIRECTIONS,
    )
    return halving_report(family, true_instance, CenterpointStrategy(family[0].params, config), request.eps)
