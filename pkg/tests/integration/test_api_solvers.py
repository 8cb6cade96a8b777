import pytest
from fastapi import status
from fastapi.testclient import TestClient

from app.core.constants import API_VERSION_PREFIX


@pytest.mark.integration
class TestSolve:
    @pytest.mark.parametrize("mode", ["exact", "dir"])
    def test_solve_reaches_eps(self, client: TestClient, abs_instance_data: dict, mode: str):
        # Arrange
        body = {"instance": abs_instance_data, "eps": 0.1, "mode": mode, "seed": 0, "samples": 500}

        # Act
        response = client.post(f"{API_VERSION_PREFIX}/solve", json=body)

        # Assert
        assert response.status_code == status.HTTP_200_OK
        data = response.json()
        assert data["mode"] == mode
        assert data["value"] <= 0.1
        assert data["iterations"] <= data["iteration_budget"]
        assert data["query_total"] == data["queries"]["total"]

    def test_same_seed_same_report(self, client: TestClient, abs_instance_data: dict):
        body = {"instance": abs_instance_data, "eps": 0.2, "seed": 7, "samples": 500}

        first = client.post(f"{API_VERSION_PREFIX}/solve", json=body).json()
        second = client.post(f"{API_VERSION_PREFIX}/solve", json=body).json()

        assert first == second

    def test_solve_missing_eps(self, client: TestClient, abs_instance_data: dict):
        response = client.post(f"{API_VERSION_PREFIX}/solve", json={"instance": abs_instance_data})

        assert response.status_code == status.HTTP_422_UNPROCESSABLE_ENTITY


@pytest.mark.integration
class TestGames:
    def test_bisect_game_meets_bound(self, client: TestClient):
        body = {"n": 1, "d": 1, "k": 8, "eps": 0.04, "strategy": "bisect", "audit_samples": 10}

        response = client.post(f"{API_VERSION_PREFIX}/games", json=body)

        assert response.status_code == status.HTTP_200_OK
        data = response.json()
        assert data["bound"] == 3
        assert data["bound_met"] is True
        assert data["consistent"] is True
        assert len(data["transcript"]) == data["stop_round"]

    def test_unknown_strategy(self, client: TestClient):
        response = client.post(f"{API_VERSION_PREFIX}/games", json={"strategy": "greedy"})

        assert response.status_code == status.HTTP_422_UNPROCESSABLE_ENTITY


@pytest.mark.integration
class TestHalving:
    def test_generated_family(self, client: TestClient):
        # Arrange
        body = {"size": 4, "eps": 0.1, "seed": 0, "samples": 500}

        # Act
        response = client.post(f"{API_VERSION_PREFIX}/halving", json=body)

        # Assert
        assert response.status_code == status.HTTP_200_OK
        data = response.json()
        assert data["family_size"] == 4
        assert data["gap"] <= 0.1
        assert data["bound_met"] is True
        assert data["queries"]["binary"] == data["queries"]["total"]

    def test_explicit_family_with_hidden_member(self, client: TestClient, shift_family_data: list[dict]):
        body = {"family": shift_family_data, "true_label": "shift-2", "eps": 0.1, "samples": 500}

        response = client.post(f"{API_VERSION_PREFIX}/halving", json=body)

        assert response.status_code == status.HTTP_200_OK
        data = response.json()
        assert data["true_label"] == "shift-2"
        assert data["gap"] <= 0.1

    def test_mixed_shapes_rejected(self, client: TestClient, abs_instance_data: dict, mixed_instance_data: dict):
        body = {"family": [abs_instance_data, mixed_instance_data]}

        response = client.post(f"{API_VERSION_PREFIX}/halving", json=body)

        assert response.status_code == status.HTTP_422_UNPROCESSABLE_ENTITY


@pytest.mark.integration
class TestRobustify:
    def test_subgradient_through_interface(self, client: TestClient, abs_instance_data: dict):
        body = {"instance": abs_instance_data, "eta_f": 1e-3, "eta_g": 1e-3, "rounds": 30, "seed": 2}

        response = client.post(f"{API_VERSION_PREFIX}/robustify", json=body)

        assert response.status_code == status.HTTP_200_OK
        data = response.json()
        assert data["algo"] == "subgradient"
        assert data["bound_ok"] is True
        assert data["model_consistent"] is True
        assert data["projection"] is None

    def test_subgradient_rejects_mixed_instance(self, client: TestClient, mixed_instance_data: dict):
        body = {"instance": mixed_instance_data, "rounds": 10}

        response = client.post(f"{API_VERSION_PREFIX}/robustify", json=body)

        assert response.status_code == status.HTTP_422_UNPROCESSABLE_ENTITY
        assert response.json()["type"] == "structural_error"
