from typing import Literal

from pydantic import BaseModel, Field

from app.schemas.instance import InstanceFile
from app.schemas.oracle import BudgetReport


class ProjectionAuditReport(BaseModel):
    """Online approximate projection checked against exact projections onto the feasible set."""

    steps: int = Field(..., ge=0, description="Points projected")
    cuts: int = Field(..., ge=0, description="Halfspaces added to P")
    max_excess: float = Field(..., description="max_i dist(π̄_i, C) - ε_i; ≤ 0 when every bound held")
    contains_C: bool = Field(..., description="P ⊇ C on sampled points after every step")
    stable: bool = Field(..., description="Every π̄_i lies in the final P")


class RobustReport(BaseModel):
    """Outcome of one exact-oracle strategy run through the inexact interface."""

    label: str = Field(default="", description="Instance label")
    algo: Literal["subgradient", "centerpoint"] = Field(..., description="Wrapped strategy")
    rounds: int = Field(..., ge=1, description="Round cap k")
    eta_f: float = Field(..., ge=0, description="Value noise level")
    eta_g: float = Field(..., ge=0, description="Subgradient noise level")
    x: list[int] = Field(..., description="Integer part of the answer")
    y: list[float] = Field(..., description="Continuous part of the answer")
    value: float = Field(..., description="True objective at the answer")
    gap: float = Field(..., description="value minus the true optimum")
    certificate_gap: float = Field(..., description="Gap of the answer on the consistency certificate h")
    exact_gap: float | None = Field(default=None, description="Gap of the same strategy with an exact oracle")
    k_eta_ok: bool | None = Field(
        default=None, description="gap ≤ exact_gap + 2k(eta_f + eta_g) over the k queries issued"
    )
    slack: float = Field(..., ge=0, description="Accumulated per-query error bound")
    bound_ok: bool = Field(..., description="gap ≤ certificate_gap + 2 slack")
    model_consistent: bool = Field(..., description="Every accepted support attains the model at its point")
    under_cases: dict[str, int] = Field(default_factory=dict, description="Under-model case counts")
    outer_cases: dict[str, int] = Field(default_factory=dict, description="Outer-model case counts")
    queries: BudgetReport = Field(..., description="Per-kind query counts")
    projection: ProjectionAuditReport | None = Field(default=None, description="Projection harness audit")


class RobustRequest(BaseModel):
    """Body of POST /v1/robustify."""

    instance: InstanceFile
    eta_f: float = Field(default=1e-3, ge=0, description="Value noise level")
    eta_g: float = Field(default=1e-3, ge=0, description="Subgradient noise level")
    algo: Literal["subgradient", "centerpoint"] = Field(default="subgradient")
    rounds: int = Field(default=100, ge=1, le=5000, description="Round cap k")
    seed: int = Field(default=0, ge=0, description="Noise seed")
    projection_points: int = Field(default=0, ge=0, le=1000, description="Points fed to the projection harness")
