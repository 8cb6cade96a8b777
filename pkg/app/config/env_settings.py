import logging
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.core.constants import (
    DEFAULT_CENTERPOINT_DIRECTIONS,
    DEFAULT_CENTERPOINT_SAMPLES,
    FIBER_GUARD,
    LP_TOLERANCE,
)

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Database settings
    DATABASE_URL: str = Field(
        default="sqlite:///./mioracle.db",
        description="SQLAlchemy URL for experiment run storage",
    )

    # Application settings
    DEBUG: bool = Field(
        default=False, description="Debug mode (verbose logging, SQL echo)"
    )
    ENVIRONMENT: str = Field(
        default="development",
        description="Environment: development, staging, or production",
    )
    LOG_LEVEL: str = Field(default="INFO", description="Logging level")

    # Solver defaults
    DEFAULT_SEED: int = Field(
        default=0, ge=0, lt=2**64, description="Seed used when a request gives none"
    )
    CENTERPOINT_SAMPLES: int = Field(
        default=DEFAULT_CENTERPOINT_SAMPLES,
        ge=100,
        description="Rejection samples per centerpoint estimate",
    )
    CENTERPOINT_DIRECTIONS: int = Field(
        default=DEFAULT_CENTERPOINT_DIRECTIONS,
        ge=1,
        description="Directions used to rank centerpoint candidates",
    )
    LP_TOLERANCE: float = Field(
        default=LP_TOLERANCE, gt=0, description="Simplex pivot tolerance"
    )
    FIBER_GUARD: int = Field(
        default=FIBER_GUARD, ge=1, description="Maximum fibers brute force enumerates"
    )
    RESULTS_DIR: str = Field(
        default="results", description="Default output directory for sweeps"
    )

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )


try:
    settings: Settings = Settings()
except Exception as e:
    logger.error(f"Error loading settings: {e}")
    raise
