from pydantic import BaseModel, Field, model_validator


class InstanceFile(BaseModel):
    """On-disk and over-the-wire form of an instance."""

    label: str = Field(default="", max_length=255, description="Instance identifier", examples=["abs-1d"])
    n: int = Field(..., ge=0, description="Number of integer coordinates", examples=[1])
    d: int = Field(..., ge=0, description="Number of continuous coordinates", examples=[1])
    R: float = Field(..., gt=0, description="Box half-width", examples=[1.0])
    rho: float = Field(..., ge=0, description="Depth of the guaranteed deep point", examples=[0.25])
    M: float = Field(..., gt=0, description="Fiber Lipschitz bound (ℓ∞)", examples=[2.0])
    pieces: list[list[float]] = Field(
        ...,
        min_length=1,
        description="Affine pieces [a_1, ..., a_{n+d}, b]",
        examples=[[[1.0, 1.0, 0.0], [1.0, -1.0, 0.0]]],
    )
    halfspaces: list[list[float]] = Field(
        default_factory=list,
        description="Constraints [g_1, ..., g_{n+d}, c] meaning ⟨g, z⟩ ≤ c",
        examples=[[[0.0, 1.0, 0.5]]],
    )

    @model_validator(mode="after")
    def check_widths(self) -> "InstanceFile":
        width = self.n + self.d + 1
        if self.n + self.d < 1:
            raise ValueError("n + d must be at least 1")
        for name in ("pieces", "halfspaces"):
            for row in getattr(self, name):
                if len(row) != width:
                    raise ValueError(f"every row of {name} needs n + d + 1 = {width} entries")
        return self


class AuditResponse(BaseModel):
    """Class-membership checks of one instance."""

    label: str = Field(..., description="Instance label")
    box_contained: bool = Field(..., description="Feasible box lies inside [-R, R]")
    optimal_fiber: list[int] | None = Field(..., description="Integer part of the optimum, if any")
    deep_radius: float = Field(..., ge=0, description="Largest ℓ∞ ball radius on the optimal fiber")
    deep_ok: bool = Field(..., description="deep_radius ≥ rho")
    lipschitz: float = Field(..., ge=0, description="Fiber Lipschitz constant of the objective")
    lipschitz_ok: bool = Field(..., description="lipschitz ≤ M")
    ok: bool = Field(..., description="All checks pass")


class OptimumResponse(BaseModel):
    """Brute-force optimum of one instance."""

    label: str = Field(..., description="Instance label")
    feasible: bool = Field(..., description="False when no integer fiber meets the feasible set")
    x: list[int] | None = Field(default=None, description="Integer part of the optimum")
    y: list[float] | None = Field(default=None, description="Continuous part of the optimum")
    value: float | None = Field(default=None, description="Optimal value")
    fibers_checked: int = Field(..., ge=0, description="Integer fibers enumerated")
