from typing import Any

from pydantic import BaseModel, Field


class BudgetReport(BaseModel):
    """Per-kind and total query counts of one run."""

    full: int = Field(default=0, ge=0, description="Full-information queries")
    bit: int = Field(default=0, ge=0, description="Single-bit queries")
    threshold: int = Field(default=0, ge=0, description="Threshold (sign) queries")
    binary: int = Field(default=0, ge=0, description="Arbitrary binary predicate queries")
    total: int = Field(default=0, ge=0, description="Sum of all counts", examples=[18])


class TranscriptRecord(BaseModel):
    """One line of a JSON-lines query transcript."""

    form: dict[str, Any] = Field(
        ...,
        description="Query form and its parameters",
        examples=[{"kind": "threshold", "direction": [1.0, 0.0], "c": 0.5}],
    )
    target: str = Field(..., description="sep, val, sub or first_order", examples=["sub"])
    point: list[float] = Field(..., description="Query point (x then y)", examples=[[0.3, 0.7]])
    response: Any = Field(..., description="Response exactly as returned", examples=[-1])
    cumulative_total: int = Field(..., ge=1, description="Queries issued so far, this one included")
