from fastapi import APIRouter

from app.config.env_settings import settings
from app.core.catalog import instance_from_file
from app.core.instances import audit_class, brute_force_opt
from app.schemas.instance import AuditResponse, InstanceFile, OptimumResponse

router = APIRouter(prefix="/instances", tags=["instances"])


@router.post(
    "/optimum",
    response_model=OptimumResponse,
    summary="Brute-force optimum",
    description="Enumerate the integer fibers of an instance and minimize on each by LP",
)
def optimum(instance: InstanceFile) -> OptimumResponse:
    inst = instance_from_file(instance)
    result = brute_force_opt(inst, settings.FIBER_GUARD)
    if not result.feasible:
        return OptimumResponse(label=inst.label, feasible=False, fibers_checked=result.fibers_checked)
    return OptimumResponse(
        label=inst.label,
        feasible=True,
        x=list(result.point.x),
        y=[float(v) for v in result.point.y],
        value=result.value,
        fibers_checked=result.fibers_checked,
    )


@router.post(
    "/audit",
    response_model=AuditResponse,
    summary="Class audit",
    description="Check box containment, the deep point on the optimal fiber and the Lipschitz bound",
)
def audit(instance: InstanceFile) -> AuditResponse:
    inst = instance_from_file(instance)
    report = audit_class(inst, settings.FIBER_GUARD)
    return AuditResponse(
        label=inst.label,
        box_contained=report.box_contained,
        optimal_fiber=list(report.optimal_fiber) if report.optimal_fiber is not None else None,
        deep_radius=max(report.deep_radius, 0.0),
        deep_ok=report.deep_ok,
        lipschitz=report.lipschitz,
        lipschitz_ok=report.lipschitz_ok,
        ok=report.ok,
    )
