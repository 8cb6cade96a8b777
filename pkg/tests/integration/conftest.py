import json
import pytest
from pathlib import Path
from typing import Generator
from sqlalchemy import create_engine
from sqlalchemy.orm import Session, sessionmaker
from sqlalchemy.pool import StaticPool
from fastapi.testclient import TestClient

from app.config.db_settings import Base, get_db
from app.main import app
from app.repositories.models.experiment_run import ExperimentCell, ExperimentRun

DATA = Path(__file__).resolve().parents[2] / "data"

# Use SQLite in-memory database for integration testing
TEST_DATABASE_URL = "sqlite:///:memory:"

test_engine = create_engine(
    TEST_DATABASE_URL,
    connect_args={"check_same_thread": False},
    poolclass=StaticPool,
)
TestingSessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=test_engine)


@pytest.fixture(scope="function")
def db_session() -> Generator[Session, None, None]:
    Base.metadata.create_all(bind=test_engine)

    session = TestingSessionLocal()
    try:
        yield session
    finally:
        session.close()
        Base.metadata.drop_all(bind=test_engine)


@pytest.fixture(scope="function")
def client(db_session: Session) -> Generator[TestClient, None, None]:
    def override_get_db():
        try:
            yield db_session
        finally:
            pass

    app.dependency_overrides[get_db] = override_get_db

    with TestClient(app) as test_client:
        yield test_client

    app.dependency_overrides.clear()


def read_instance(name: str) -> dict:
    return json.loads((DATA / "instances" / f"{name}.json").read_text(encoding="utf-8"))


@pytest.fixture
def abs_instance_data() -> dict:
    return read_instance("abs-1d")


@pytest.fixture
def mixed_instance_data() -> dict:
    return read_instance("mixed-n1-d1")


@pytest.fixture
def shift_family_data() -> list[dict]:
    directory = DATA / "families" / "shift-4"
    return [json.loads(path.read_text(encoding="utf-8")) for path in sorted(directory.glob("*.json"))]


@pytest.fixture
def recovery_config_data() -> dict:
    return {"kind": "recovery", "n": [0], "d": [2], "eps": [0.1], "mode": ["bit", "dir"], "trials": 5}


@pytest.fixture
def sample_run(db_session: Session) -> ExperimentRun:
    run = ExperimentRun(kind="recovery", config_json="{}", version="v0.1.0-0123abcd", status="ok")
    run.cells.append(ExperimentCell(position=0, axes_json='{"n":0,"d":2}', status="ok", query_total=18, gap=0.01))
    db_session.add(run)
    db_session.commit()
    db_session.refresh(run)
    return run


@pytest.fixture
def multiple_runs(db_session: Session) -> list[ExperimentRun]:
    runs = [
        ExperimentRun(kind="solver", config_json="{}", version=f"v0.1.0-0000000{i}", status="ok")
        for i in range(1, 6)
    ]
    for run in runs:
        db_session.add(run)
    db_session.commit()
    for run in runs:
        db_session.refresh(run)
    return runs
