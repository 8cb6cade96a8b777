import logging
from sqlalchemy import select
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import Session
from app.core.constants import DEFAULT_PAGE_SIZE
from app.repositories.models.experiment_run import ExperimentCell, ExperimentRun
from app.schemas.experiment import ExperimentRunResponse, SweepResult

logger = logging.getLogger(__name__)


class RunsRepository:
    def __init__(self, db: Session) -> None:
        self.db: Session = db

    def create(self, result: SweepResult) -> ExperimentRunResponse:
        """Store a finished sweep and all of its cells.

        Args:
            result: Sweep result in declared cell order

        Returns:
            Stored run response

        Raises:
            SQLAlchemyError: If database operation fails
        """
        try:
            run = ExperimentRun(
                kind=result.kind,
                config_json=result.config.model_dump_json(),
                version=result.version,
                status=result.status,
            )
            for position, cell in enumerate(result.cells):
                axes = cell.model_dump_json(include={"n", "d", "eps", "mode", "instance", "seed", "repetition"})
                run.cells.append(
                    ExperimentCell(
                        position=position,
                        axes_json=axes,
                        status=cell.status,
                        query_total=cell.query_total,
                        gap=cell.gap,
                        stop_round=cell.stop_round,
                        seconds=cell.seconds,
                    )
                )
            self.db.add(run)
            self.db.commit()
            self.db.refresh(run)
            logger.info(f"Stored {result.kind} run with ID: {run.id} ({len(result.cells)} cells)")
            return ExperimentRunResponse.model_validate(run)
        except SQLAlchemyError as e:
            self.db.rollback()
            logger.error(f"Error storing run: {e}")
            raise

    def get_all(self, skip: int = 0, limit: int = DEFAULT_PAGE_SIZE) -> list[ExperimentRunResponse]:
        """Get stored runs, newest first.

        Raises:
            SQLAlchemyError: If database operation fails
        """
        try:
            stmt = (
                select(ExperimentRun)
                .order_by(ExperimentRun.created_at.desc(), ExperimentRun.id.desc())
                .offset(skip)
                .limit(limit)
            )
            runs: list[ExperimentRun] = list(self.db.scalars(stmt).all())
            return [ExperimentRunResponse.model_validate(r) for r in runs]
        except SQLAlchemyError as e:
            logger.error(f"Error fetching runs: {e}")
            raise

    def get_by_id(self, run_id: int) -> ExperimentRunResponse | None:
        try:
            stmt = select(ExperimentRun).where(ExperimentRun.id == run_id)
            run: ExperimentRun | None = self.db.scalar(stmt)
            return ExperimentRunResponse.model_validate(run) if run else None
        except SQLAlchemyError as e:
            logger.error(f"Error fetching run {run_id}: {e}")
            raise

    def delete(self, run_id: int) -> bool:
        """Delete a run and its cells.

        Returns:
            True if deleted, False if not found

        Raises:
            SQLAlchemyError: If database operation fails
        """
        try:
            stmt = select(ExperimentRun).where(ExperimentRun.id == run_id)
            run: ExperimentRun | None = self.db.scalar(stmt)
            if not run:
                return False
            self.db.delete(run)
            self.db.commit()
            logger.info(f"Deleted run with ID: {run_id}")
            return True
        except SQLAlchemyError as e:
            self.db.rollback()
            logger.error(f"Error deleting run {run_id}: {e}")
            raise

