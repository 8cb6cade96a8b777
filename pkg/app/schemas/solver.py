from typing import Literal

from pydantic import BaseModel, Field

from app.schemas.instance import InstanceFile
from app.schemas.oracle import BudgetReport


class SolverReport(BaseModel):
    """Outcome of one centerpoint solve."""

    label: str = Field(default="", description="Instance label", examples=["suite-n1-d1-0"])
    x: list[int] = Field(..., description="Integer part of the returned point", examples=[[-1]])
    y: list[float] = Field(..., description="Continuous part of the returned point", examples=[[0.0]])
    value: float = Field(..., description="Objective value at the returned point", examples=[-1.0])
    iterations: int = Field(..., ge=0, description="Cutting-plane iterations run")
    iteration_budget: int = Field(..., ge=1, description="Iteration cap T")
    stop_reason: Literal["budget", "version_set_empty", "stationary"] = Field(
        ..., description="Why the loop ended"
    )
    query_total: int = Field(..., ge=0, description="Total oracle queries")
    queries: BudgetReport = Field(..., description="Per-kind query counts")
    feasible_pool_size: int = Field(..., ge=1, description="Number of feasible iterates recorded")
    min_depth: float = Field(
        ..., ge=0, le=1, description="Smallest estimated retained fraction over all iterations"
    )
    mode: Literal["exact", "bit", "dir"] = Field(..., description="Oracle mode")
    eps: float = Field(..., gt=0, description="Target accuracy")
    seed: int = Field(..., ge=0, description="Sampling seed")


class SolveRequest(BaseModel):
    """Body of POST /v1/solve."""

    instance: InstanceFile
    eps: float = Field(..., gt=0, description="Target accuracy", examples=[0.05])
    mode: Literal["exact", "bit", "dir"] = Field(default="exact", description="Oracle mode")
    seed: int | None = Field(default=None, ge=0, lt=2**64, description="Sampling seed")
    max_iterations: int | None = Field(
        default=None, ge=1, description="Override of the iteration budget"
    )
    samples: int | None = Field(default=None, ge=100, description="Centerpoint samples per iteration")
