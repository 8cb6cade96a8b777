from typing import Literal

from pydantic import BaseModel, Field

from app.schemas.oracle import TranscriptRecord


class GameReport(BaseModel):
    """Outcome of one information game against the mixed-integer adversary."""

    strategy: str = Field(..., description="Strategy name", examples=["bisect"])
    n: int = Field(..., ge=0, description="Integer dimension of the game")
    d: int = Field(..., ge=1, description="Continuous dimension of the family")
    family_size: int = Field(..., ge=1, description="Registered family size k")
    eps: float = Field(..., gt=0, description="Accuracy")
    ell: int = Field(..., ge=0, description="Hardness horizon used by every fiber adversary")
    certified_ell: int = Field(..., ge=0, description="⌊log₂ k⌋")
    measured_ell: int | None = Field(default=None, description="Minimum continuous stop round over strategies")
    bound: int = Field(..., ge=0, description="2^(n-1) ℓ (ℓ when n = 0)")
    stop_round: int = Field(..., ge=0, description="First round after which the transcript is unambiguous")
    reached_unambiguous: bool = Field(..., description="False when max_rounds ran out first")
    bound_met: bool = Field(..., description="stop_round ≥ bound")
    consistent: bool = Field(..., description="Every sampled ψ_F reproduced the whole transcript")
    max_inner_queries: int = Field(..., ge=0, description="Most fiber queries spent on one round")
    committed_fibers: int = Field(..., ge=0, description="Fibers whose adversary committed")
    transcript: list[TranscriptRecord] = Field(default_factory=list, description="Query log")


class GameRequest(BaseModel):
    """Body of POST /v1/games."""

    n: int = Field(default=1, ge=0, le=4, description="Integer dimension")
    d: int = Field(default=1, ge=1, le=3, description="Continuous dimension")
    k: int = Field(default=8, ge=2, le=64, description="Family size")
    M: float = Field(default=1.0, gt=0, description="Lipschitz constant")
    R: float = Field(default=1.0, gt=0, description="Box half-width")
    eps: float = Field(default=0.04, gt=0, description="Accuracy")
    strategy: Literal["bisect", "random", "centerpoint"] = Field(default="bisect")
    seed: int = Field(default=0, ge=0, description="Strategy seed")
    max_rounds: int = Field(default=200, ge=1, le=10_000, description="Round cap")
    audit_samples: int = Field(default=100, ge=0, le=1000, description="Sampled ψ_F collections")
