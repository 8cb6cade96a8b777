from datetime import datetime
from unittest.mock import Mock, patch
import pytest
from sqlalchemy.exc import SQLAlchemyError

from app.repositories.models.experiment_run import ExperimentCell, ExperimentRun
from app.repositories.runs_repository import RunsRepository
from app.schemas.experiment import CellResult, ExperimentConfig, ExperimentRunResponse, SweepResult


def sweep_result(cells: int = 2) -> SweepResult:
    return SweepResult(
        kind="recovery",
        version="v0.1.0-0123abcd",
        config=ExperimentConfig(kind="recovery", mode=["dir"]),
        cells=[
            CellResult(n=0, d=2, eps=0.1, mode="dir", seed=0, repetition=i, status="ok", query_total=18, gap=0.01)
            for i in range(cells)
        ],
    )


def stored_run(run_id: int = 1) -> ExperimentRun:
    return ExperimentRun(
        id=run_id,
        kind="recovery",
        config_json="{}",
        version="v0.1.0-0123abcd",
        status="ok",
        created_at=datetime.now(),
    )


@pytest.mark.unit
class TestRunsRepositoryCreate:
    def test_create_run_success(self):
        # Arrange
        mock_db = Mock()
        run = stored_run()
        repo = RunsRepository(mock_db)

        # Act
        with patch("app.repositories.runs_repository.ExperimentRun", return_value=run):
            result = repo.create(sweep_result())

        # Assert
        assert isinstance(result, ExperimentRunResponse)
        assert result.id == 1
        assert [cell.position for cell in result.cells] == [0, 1]
        assert result.cells[0].query_total == 18
        assert '"repetition":1' in result.cells[1].axes_json
        mock_db.add.assert_called_once_with(run)
        mock_db.commit.assert_called_once()
        mock_db.refresh.assert_called_once_with(run)

    def test_create_run_database_error(self):
        # Arrange
        mock_db = Mock()
        mock_db.commit = Mock(side_effect=SQLAlchemyError("DB Error"))
        repo = RunsRepository(mock_db)

        # Act & Assert
        with pytest.raises(SQLAlchemyError):
            repo.create(sweep_result())

        mock_db.rollback.assert_called_once()


@pytest.mark.unit
class TestRunsRepositoryGetAll:
    def test_get_all_empty(self):
        # Arrange
        mock_db = Mock()
        mock_db.scalars.return_value.all.return_value = []
        repo = RunsRepository(mock_db)

        # Act
        result = repo.get_all()

        # Assert
        assert result == []
        mock_db.scalars.assert_called_once()

    def test_get_all_returns_responses(self):
        mock_db = Mock()
        mock_db.scalars.return_value.all.return_value = [stored_run(2), stored_run(1)]
        repo = RunsRepository(mock_db)

        result = repo.get_all(skip=0, limit=10)

        assert [run.id for run in result] == [2, 1]

    def test_get_all_database_error(self):
        mock_db = Mock()
        mock_db.scalars.side_effect = SQLAlchemyError("DB Error")
        repo = RunsRepository(mock_db)

        with pytest.raises(SQLAlchemyError):
            repo.get_all()


@pytest.mark.unit
class TestRunsRepositoryGetById:
    def test_get_by_id_found(self):
        # Arrange
        mock_db = Mock()
        run = stored_run(5)
        run.cells.append(ExperimentCell(position=0, axes_json="{}", status="ok", query_total=3))
        mock_db.scalar.return_value = run
        repo = RunsRepository(mock_db)

        # Act
        result = repo.get_by_id(5)

        # Assert
        assert result is not None
        assert result.id == 5
        assert result.cells[0].query_total == 3

    def test_get_by_id_not_found(self):
        mock_db = Mock()
        mock_db.scalar.return_value = None
        repo = RunsRepository(mock_db)

        assert repo.get_by_id(999) is None


@pytest.mark.unit
class TestRunsRepositoryDelete:
    def test_delete_success(self):
        # Arrange
        mock_db = Mock()
        run = stored_run()
        mock_db.scalar.return_value = run
        repo = RunsRepository(mock_db)

        # Act
        result = repo.delete(1)

        # Assert
        assert result is True
        mock_db.delete.assert_called_once_with(run)
        mock_db.commit.assert_called_once()

    def test_delete_not_found(self):
        mock_db = Mock()
        mock_db.scalar.return_value = None
        repo = RunsRepository(mock_db)

        assert repo.delete(999) is False
        mock_db.delete.assert_not_called()

    def test_delete_database_error(self):
        mock_db = Mock()
        mock_db.scalar.return_value = stored_run()
        mock_db.commit = Mock(side_effect=SQLAlchemyError("DB Error"))
        repo = RunsRepository(mock_db)

        with pytest.raises(SQLAlchemyError):
            repo.delete(1)

        mock_db.rollback.assert_called_once()
