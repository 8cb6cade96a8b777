import pytest
from fastapi import status
from fastapi.testclient import TestClient

from app.core.constants import API_VERSION_PREFIX


@pytest.mark.integration
class TestOptimum:
    def test_continuous_optimum(self, client: TestClient, abs_instance_data: dict):
        response = client.post(f"{API_VERSION_PREFIX}/instances/optimum", json=abs_instance_data)

        assert response.status_code == status.HTTP_200_OK
        data = response.json()
        assert data["feasible"] is True
        assert data["x"] == []
        assert data["y"][0] == pytest.approx(0.25, abs=1e-7)
        assert data["value"] == pytest.approx(0.0, abs=1e-7)
        assert data["fibers_checked"] == 1

    def test_mixed_optimum_takes_first_best_fiber(self, client: TestClient, mixed_instance_data: dict):
        response = client.post(f"{API_VERSION_PREFIX}/instances/optimum", json=mixed_instance_data)

        assert response.status_code == status.HTTP_200_OK
        data = response.json()
        assert data["x"] == [0]
        assert data["y"][0] == pytest.approx(0.5, abs=1e-7)
        assert data["fibers_checked"] == 3

    def test_infeasible_instance_reports_no_point(self, client: TestClient, abs_instance_data: dict):
        # Arrange: y ≤ -2 misses the box
        abs_instance_data["halfspaces"] = [[1.0, -2.0]]

        # Act
        response = client.post(f"{API_VERSION_PREFIX}/instances/optimum", json=abs_instance_data)

        # Assert
        assert response.status_code == status.HTTP_200_OK
        data = response.json()
        assert data["feasible"] is False
        assert data["value"] is None

    def test_wrong_row_width(self, client: TestClient, abs_instance_data: dict):
        abs_instance_data["pieces"] = [[1.0, 0.0, 0.0]]

        response = client.post(f"{API_VERSION_PREFIX}/instances/optimum", json=abs_instance_data)

        assert response.status_code == status.HTTP_422_UNPROCESSABLE_ENTITY


@pytest.mark.integration
class TestAudit:
    def test_bundled_instance_passes(self, client: TestClient, mixed_instance_data: dict):
        response = client.post(f"{API_VERSION_PREFIX}/instances/audit", json=mixed_instance_data)

        assert response.status_code == status.HTTP_200_OK
        data = response.json()
        assert data["ok"] is True
        assert data["optimal_fiber"] == [0]
        assert data["lipschitz"] == pytest.approx(1.0)

    def test_understated_lipschitz_bound_fails(self, client: TestClient, abs_instance_data: dict):
        abs_instance_data["M"] = 0.5

        response = client.post(f"{API_VERSION_PREFIX}/instances/audit", json=abs_instance_data)

        assert response.status_code == status.HTTP_200_OK
        data = response.json()
        assert data["lipschitz_ok"] is False
        assert data["ok"] is False
