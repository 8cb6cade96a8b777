import pytest
from sqlalchemy.orm import Session

from app.core.experiments import run_sweep
from app.repositories.models.experiment_run import ExperimentCell, ExperimentRun
from app.repositories.runs_repository import RunsRepository
from app.schemas.experiment import CellResult, ExperimentConfig, ExperimentRunResponse, SweepResult


def failed_result() -> SweepResult:
    return SweepResult(
        kind="solver",
        version="v0.1.0-deadbeef",
        config=ExperimentConfig(kind="solver"),
        cells=[
            CellResult(n=0, d=1, eps=0.05, mode="exact", seed=0, repetition=0, status="ok", query_total=12, gap=0.01),
            CellResult(n=0, d=1, eps=0.05, mode="exact", seed=0, repetition=1, status="failed", error="boom"),
        ],
    )


@pytest.mark.integration
class TestRunsRepositoryCreate:
    def test_create_stores_run_and_cells(self, db_session: Session):
        # Arrange
        repo = RunsRepository(db_session)
        result = run_sweep(
            ExperimentConfig(kind="recovery", d=[2], eps=[0.1], mode=["bit", "dir"], trials=5)
        )

        # Act
        stored = repo.create(result)

        # Assert
        assert isinstance(stored, ExperimentRunResponse)
        assert stored.id is not None
        assert stored.version == result.version
        assert db_session.query(ExperimentCell).filter(ExperimentCell.run_id == stored.id).count() == 2

    def test_failed_cells_mark_the_run_failed(self, db_session: Session):
        repo = RunsRepository(db_session)

        stored = repo.create(failed_result())

        assert stored.status == "failed"
        assert [cell.status for cell in stored.cells] == ["ok", "failed"]
        assert stored.cells[1].query_total is None

    def test_config_is_stored_as_submitted(self, db_session: Session):
        repo = RunsRepository(db_session)
        result = failed_result()

        stored = repo.create(result)

        assert ExperimentConfig.model_validate_json(stored.config_json) == result.config


@pytest.mark.integration
class TestRunsRepositoryRead:
    def test_get_all_pagination(self, db_session: Session, multiple_runs: list[ExperimentRun]):
        repo = RunsRepository(db_session)

        assert len(repo.get_all()) == 5
        assert len(repo.get_all(skip=3, limit=10)) == 2
        assert len(repo.get_all(skip=0, limit=2)) == 2

    def test_get_by_id(self, db_session: Session, sample_run: ExperimentRun):
        repo = RunsRepository(db_session)

        result = repo.get_by_id(sample_run.id)

        assert result is not None
        assert result.kind == "recovery"
        assert result.cells[0].gap == pytest.approx(0.01)

    def test_get_by_id_not_found(self, db_session: Session):
        assert RunsRepository(db_session).get_by_id(999) is None


@pytest.mark.integration
class TestRunsRepositoryDelete:
    def test_delete_removes_cells(self, db_session: Session, sample_run: ExperimentRun):
        # Arrange
        repo = RunsRepository(db_session)
        run_id = sample_run.id

        # Act
        deleted = repo.delete(run_id)

        # Assert
        assert deleted is True
        assert repo.get_by_id(run_id) is None
        assert db_session.query(ExperimentCell).filter(ExperimentCell.run_id == run_id).count() == 0

    def test_delete_not_found(self, db_session: Session):
        assert RunsRepository(db_session).delete(999) is False
