from datetime import datetime
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

SweepKind = Literal["solver", "recovery", "game", "halving"]

MODES: dict[str, set[str]] = {
    "solver": {"exact", "bit", "dir"},
    "recovery": {"bit", "dir"},
    "game": {"bisect", "random", "centerpoint"},
    "halving": {"exact"},
}


class ExperimentConfig(BaseModel):
    """A sweep over the grid n × d × eps × mode, repeated per seed."""

    kind: SweepKind = Field(..., description="Module entry point run in every cell", examples=["solver"])
    n: list[int] = Field(default_factory=lambda: [0], description="Integer dimensions", examples=[[0, 1]])
    d: list[int] = Field(default_factory=lambda: [1], description="Continuous dimensions", examples=[[1, 2]])
    eps: list[float] = Field(default_factory=lambda: [0.05], description="Accuracies", examples=[[0.2, 0.05]])
    mode: list[str] = Field(
        default_factory=lambda: ["exact"],
        description="Oracle mode (solver, recovery) or strategy (game)",
        examples=[["dir"]],
    )
    seeds: list[int] = Field(default_factory=lambda: [0], description="Seeds, one row per seed")
    repetitions: int = Field(default=1, ge=1, description="Rows per (cell, seed)")
    instances: list[str] = Field(
        default_factory=list,
        description="Solver instance files; empty means the bundled suite for each (n, d)",
    )
    family_size: int = Field(default=8, ge=2, le=256, description="Game and halving family size")
    max_rounds: int = Field(default=200, ge=1, description="Game round cap")
    samples: int = Field(default=2000, ge=100, description="Centerpoint samples per iteration")
    trials: int = Field(default=100, ge=1, description="Random vectors per recovery cell")
    timing: bool = Field(default=False, description="Fill the seconds column")
    workers: int = Field(default=1, ge=1, le=64, description="Parallel processes")

    @model_validator(mode="after")
    def check_config(self) -> "ExperimentConfig":
        allowed = MODES[self.kind]
        unknown = sorted(set(self.mode) - allowed)
        if unknown:
            raise ValueError(f"modes {unknown} are not valid for {self.kind}; choose from {sorted(allowed)}")
        missing = [path for path in self.instances if not Path(path).is_file()]
        if missing:
            raise ValueError(f"instance files not found: {missing}")
        if any(value < 0 for value in self.n) or any(value < 1 for value in self.d):
            raise ValueError("n values must be ≥ 0 and d values ≥ 1")
        if any(value <= 0 for value in self.eps):
            raise ValueError("eps values must be positive")
        return self


class CellResult(BaseModel):
    """One CSV row."""

    n: int
    d: int
    eps: float
    mode: str
    instance: str = Field(default="", description="Instance label, when the cell ran one")
    seed: int
    repetition: int
    status: Literal["ok", "failed"]
    query_total: int | None = None
    gap: float | None = None
    stop_round: int | None = None
    seconds: float | None = None
    error: str | None = Field(default=None, description="Failure message, not written to the CSV")


class FitRow(BaseModel):
    """Least-squares slope of log(query_total) against log(axis)."""

    mode: str
    axis: Literal["d", "2^n"]
    slope: float
    points: int = Field(..., ge=2)


class SweepResult(BaseModel):
    kind: SweepKind
    version: str = Field(..., description="v0.1.0-<config hash>", examples=["v0.1.0-3fa2c9d1"])
    config: ExperimentConfig
    cells: list[CellResult] = Field(default_factory=list)
    fit: list[FitRow] = Field(default_factory=list)

    @property
    def status(self) -> Literal["ok", "failed"]:
        return "ok" if all(cell.status == "ok" for cell in self.cells) else "failed"


class CellResponse(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    position: int = Field(..., ge=0, description="Row index in declared order")
    axes_json: str = Field(..., description="Axes, seed and repetition of the row")
    status: str = Field(..., examples=["ok"])
    query_total: int | None = None
    gap: float | None = None
    stop_round: int | None = None
    seconds: float | None = None


class ExperimentRunResponse(BaseModel):
    """Schema for a stored run."""

    model_config = ConfigDict(from_attributes=True)

    id: int = Field(..., description="Run ID", examples=[1])
    kind: str = Field(..., description="Sweep kind", examples=["solver"])
    version: str = Field(..., description="Manifest version string")
    status: str = Field(..., description="ok or failed", examples=["ok"])
    config_json: str = Field(..., description="Submitted configuration")
    created_at: datetime = Field(
        ...,
        description="Timestamp when the run was stored",
        examples=["2024-01-01T12:00:00Z"],
    )
    cells: list[CellResponse] = Field(default_factory=list)
