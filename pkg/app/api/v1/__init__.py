from fastapi import APIRouter

from app.api.v1 import experiments, games, halving, instances, robustify, solver

# Create the v1 API router
# This aggregates all v1 endpoints under the /v1 prefix
# Note: No tags here - tags are defined in child routers to avoid duplication
router = APIRouter(prefix="/v1")

# Include all v1 routers
router.include_router(instances.router)
router.include_router(solver.router)
router.include_router(games.router)
router.include_router(halving.router)
router.include_router(robustify.router)
router.include_router(experiments.router)
