from datetime import datetime
from sqlalchemy import Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import relationship
from sqlalchemy.sql import func
from app.config.db_settings import Base


class ExperimentRun(Base):
    """One sweep run.

    Attributes:
        id: Primary key
        kind: Sweep kind (solver, recovery, game, halving)
        config_json: The sweep configuration as submitted
        version: Version string written to the manifest
        status: "ok" when every cell succeeded, otherwise "failed"
        created_at: Timestamp when the run was stored
    """

    __tablename__ = "experiment_runs"

    id: Column[int] = Column(Integer, primary_key=True, index=True)
    kind: Column[str] = Column(String(32), nullable=False, index=True)
    config_json: Column[str] = Column(Text, nullable=False)
    version: Column[str] = Column(String(64), nullable=False)
    status: Column[str] = Column(String(16), nullable=False)
    created_at: Column[datetime] = Column(
        DateTime(timezone=True),
        server_default=func.now(),
        nullable=False,
    )

    cells = relationship(
        "ExperimentCell",
        back_populates="run",
        cascade="all, delete-orphan",
        order_by="ExperimentCell.position",
    )

    def __repr__(self) -> str:
        return f"<ExperimentRun(id={self.id}, kind='{self.kind}', status='{self.status}')>"


class ExperimentCell(Base):
    """One grid cell of a run, in declared order."""

    __tablename__ = "experiment_cells"

    id: Column[int] = Column(Integer, primary_key=True, index=True)
    run_id: Column[int] = Column(
        Integer, ForeignKey("experiment_runs.id", ondelete="CASCADE"), nullable=False, index=True
    )
    position: Column[int] = Column(Integer, nullable=False)
    axes_json: Column[str] = Column(Text, nullable=False)
    status: Column[str] = Column(String(16), nullable=False)
    query_total: Column[int] = Column(Integer, nullable=True)
    gap: Column[float] = Column(Float, nullable=True)
    stop_round: Column[int] = Column(Integer, nullable=True)
    seconds: Column[float] = Column(Float, nullable=True)

    run = relationship("ExperimentRun", back_populates="cells")
