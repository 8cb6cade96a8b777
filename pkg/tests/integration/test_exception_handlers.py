import pytest
from unittest.mock import patch
from fastapi import status
from fastapi.testclient import TestClient
from sqlalchemy.exc import SQLAlchemyError, OperationalError
from sqlalchemy.orm import Session

from app.config.db_settings import get_db
from app.config.env_settings import settings
from app.core.constants import API_VERSION_PREFIX
from app.core.exceptions import EmptyVersionSet, LPCyclingError, NoFeasibleFound
from app.main import app


@pytest.fixture
def exception_client(db_session: Session) -> TestClient:
    """Test client configured to not raise exceptions (for testing exception handlers)."""

    def override_get_db():
        try:
            yield db_session
        finally:
            pass

    app.dependency_overrides[get_db] = override_get_db

    # raise_server_exceptions=False allows exception handlers to return responses
    test_client = TestClient(app, raise_server_exceptions=False)
    yield test_client

    app.dependency_overrides.clear()


def solve_body(instance: dict) -> dict:
    return {"instance": instance, "eps": 0.1, "samples": 500}


@pytest.mark.integration
class TestDomainExceptionHandler:
    def test_structural_error_returns_422(self, exception_client: TestClient):
        response = exception_client.post(
            f"{API_VERSION_PREFIX}/halving",
            json={"size": 2, "true_label": "nobody"},
        )

        assert response.status_code == status.HTTP_422_UNPROCESSABLE_ENTITY
        data = response.json()
        assert data["type"] == "structural_error"
        assert "nobody" in data["detail"]

    def test_no_feasible_found_returns_409(self, exception_client: TestClient, abs_instance_data: dict):
        with patch("app.api.v1.solver.solve", side_effect=NoFeasibleFound("no feasible iterate")):
            response = exception_client.post(f"{API_VERSION_PREFIX}/solve", json=solve_body(abs_instance_data))

        assert response.status_code == status.HTTP_409_CONFLICT
        assert response.json()["type"] == "no_feasible_found"

    def test_empty_version_set_returns_409(self, exception_client: TestClient, abs_instance_data: dict):
        with patch("app.api.v1.solver.solve", side_effect=EmptyVersionSet("emptied")):
            response = exception_client.post(f"{API_VERSION_PREFIX}/solve", json=solve_body(abs_instance_data))

        assert response.status_code == status.HTTP_409_CONFLICT
        assert response.json()["type"] == "empty_version_set"

    def test_fiber_guard_returns_413(
        self, exception_client: TestClient, mixed_instance_data: dict, monkeypatch: pytest.MonkeyPatch
    ):
        # Arrange: three fibers against a guard of one
        monkeypatch.setattr(settings, "FIBER_GUARD", 1)

        # Act
        response = exception_client.post(f"{API_VERSION_PREFIX}/instances/optimum", json=mixed_instance_data)

        # Assert
        assert response.status_code == status.HTTP_413_REQUEST_ENTITY_TOO_LARGE
        assert response.json()["type"] == "fiber_guard_exceeded"

    def test_unmapped_domain_error_returns_500(self, exception_client: TestClient, abs_instance_data: dict):
        with patch("app.api.v1.solver.solve", side_effect=LPCyclingError("cycled")):
            response = exception_client.post(f"{API_VERSION_PREFIX}/solve", json=solve_body(abs_instance_data))

        assert response.status_code == status.HTTP_500_INTERNAL_SERVER_ERROR
        assert response.json() == {"detail": "cycled", "type": "solver_error"}


@pytest.mark.integration
class TestSQLAlchemyExceptionHandler:
    def test_sqlalchemy_error_returns_500(self, exception_client: TestClient, recovery_config_data: dict):
        with patch("app.repositories.runs_repository.RunsRepository.create") as mock_create:
            mock_create.side_effect = SQLAlchemyError("Database connection failed")

            response = exception_client.post(f"{API_VERSION_PREFIX}/experiments/", json=recovery_config_data)

            assert response.status_code == status.HTTP_500_INTERNAL_SERVER_ERROR
            data = response.json()
            assert data["detail"] == "A database error occurred. Please try again later."
            assert data["type"] == "database_error"

    def test_operational_error_returns_500(self, exception_client: TestClient):
        with patch("app.repositories.runs_repository.RunsRepository.get_all") as mock_get:
            mock_get.side_effect = OperationalError("statement", "params", "orig")

            response = exception_client.get(f"{API_VERSION_PREFIX}/experiments/")

            assert response.status_code == status.HTTP_500_INTERNAL_SERVER_ERROR
            assert response.json()["type"] == "database_error"

    def test_sqlalchemy_error_on_delete(self, exception_client: TestClient, sample_run):
        with patch("app.repositories.runs_repository.RunsRepository.delete") as mock_delete:
            mock_delete.side_effect = SQLAlchemyError("Delete failed")

            response = exception_client.delete(f"{API_VERSION_PREFIX}/experiments/{sample_run.id}")

            assert response.status_code == status.HTTP_500_INTERNAL_SERVER_ERROR
            assert response.json()["type"] == "database_error"


@pytest.mark.integration
class TestGeneralExceptionHandler:
    def test_unexpected_exception_returns_500(self, exception_client: TestClient):
        with patch("app.repositories.runs_repository.RunsRepository.get_by_id") as mock_get:
            mock_get.side_effect = ValueError("Unexpected error")

            response = exception_client.get(f"{API_VERSION_PREFIX}/experiments/1")

            assert response.status_code == status.HTTP_500_INTERNAL_SERVER_ERROR
            data = response.json()
            assert data["detail"] == "An unexpected error occurred. Please try again later."
            assert data["type"] == "internal_server_error"

    def test_numpy_failure_returns_500(self, exception_client: TestClient, abs_instance_data: dict):
        with patch("app.api.v1.solver.solve", side_effect=FloatingPointError("overflow")):
            response = exception_client.post(f"{API_VERSION_PREFIX}/solve", json=solve_body(abs_instance_data))

        assert response.status_code == status.HTTP_500_INTERNAL_SERVER_ERROR
        assert response.json()["type"] == "internal_server_error"


@pytest.mark.integration
class TestHTTPExceptionNotCaught:
    def test_404_not_found_not_caught_by_handlers(self, client: TestClient):
        response = client.get(f"{API_VERSION_PREFIX}/experiments/999")

        assert response.status_code == status.HTTP_404_NOT_FOUND
        data = response.json()
        assert "detail" in data
        assert "type" not in data
