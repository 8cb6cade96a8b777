from typing import Literal

from pydantic import BaseModel, Field, model_validator

from app.schemas.instance import InstanceFile
from app.schemas.oracle import BudgetReport


class HalvingReport(BaseModel):
    """Outcome of one binary-query solve over a finite family."""

    true_label: str = Field(..., description="Label of the hidden instance", examples=["shift-3"])
    family_size: int = Field(..., ge=1, description="|I|")
    x: list[int] = Field(..., description="Integer part of the answer")
    y: list[float] = Field(..., description="Continuous part of the answer")
    value: float = Field(..., description="True objective at the answer")
    gap: float = Field(..., description="value minus the true optimum")
    eps: float = Field(..., gt=0, description="Target accuracy")
    terminated_by: Literal["singleton", "wrapped"] = Field(
        ..., description="Surviving set reached one member, or the wrapped strategy answered"
    )
    rounds: int = Field(..., ge=0, description="Loop iterations")
    splits: int = Field(..., ge=0, description="Rounds resolved by a membership query")
    mismatches: int = Field(..., ge=0, description="Rounds whose equality query failed")
    replayed: int = Field(..., ge=0, description="|Q|, exact responses fed to the wrapped strategy")
    wrapped_budget: int = Field(..., ge=1, description="Query budget u of the wrapped strategy")
    survivors: int = Field(..., ge=1, description="|U| at termination")
    queries: BudgetReport = Field(..., description="Per-kind query counts (binary only)")
    query_bound: float = Field(..., description="2 (log_{4/3} |I| + u)")
    bound_met: bool = Field(..., description="queries.total ≤ query_bound")


class HalvingRequest(BaseModel):
    """Body of POST /v1/halving: an explicit family, or a generated shifted family."""

    family: list[InstanceFile] | None = Field(default=None, min_length=1, description="Explicit family")
    size: int = Field(default=16, ge=1, le=256, description="Size of the generated family")
    n: int = Field(default=0, ge=0, le=2, description="Integer dimension of the generated family")
    d: int = Field(default=1, ge=1, le=3, description="Continuous dimension of the generated family")
    true_label: str | None = Field(default=None, description="Hidden instance; defaults to the first member")
    eps: float = Field(default=0.05, gt=0, description="Target accuracy")
    seed: int = Field(default=0, ge=0, description="Family and sampling seed")
    max_iterations: int | None = Field(default=None, ge=1, description="Override of the wrapped budget u")
    samples: int | None = Field(default=None, ge=100, description="Centerpoint samples per iteration")

    @model_validator(mode="after")
    def check_family(self) -> "HalvingRequest":
        if self.family is not None:
            shapes = {(member.n, member.d) for member in self.family}
            if len(shapes) != 1:
                raise ValueError("every family member must share (n, d)")
        return self
