"""
Pytest configuration and fixtures for the double-IRS simulator.
"""
import asyncio
import pytest
import numpy as np
from typing import AsyncGenerator
from httpx import AsyncClient, ASGITransport
from sqlalchemy.ext.asyncio import create_async_engine, async_sessionmaker, AsyncSession

from app.main import app
from app.database import Base, get_db
from app.schemas.scenario import ScenarioConfig, default_scenario


# Test database URL (in-memory SQLite)
TEST_DATABASE_URL = "sqlite+aiosqlite:///:memory:"


@pytest.fixture(scope="session")
def event_loop():
    """Create an event loop for the test session."""
    loop = asyncio.get_event_loop_policy().new_event_loop()
    yield loop
    loop.close()


@pytest.fixture(scope="function")
async def test_db() -> AsyncGenerator[AsyncSession, None]:
    """Create a test database session."""
    engine = create_async_engine(TEST_DATABASE_URL, echo=False)

    async with engine.begin() as conn:
        await conn.run_sync(Base.metadata.create_all)

    TestSessionLocal = async_sessionmaker(
        engine, class_=AsyncSession, expire_on_commit=False
    )

    async with TestSessionLocal() as session:
        yield session

    async with engine.begin() as conn:
        await conn.run_sync(Base.metadata.drop_all)

    await engine.dispose()


@pytest.fixture(scope="function")
async def client(test_db: AsyncSession) -> AsyncGenerator[AsyncClient, None]:
    """Create a test client with database override."""
    async def override_get_db():
        yield test_db

    app.dependency_overrides[get_db] = override_get_db

    async with AsyncClient(
        transport=ASGITransport(app=app),
        base_url="http://test"
    ) as ac:
        yield ac

    app.dependency_overrides.clear()


@pytest.fixture
def scenario() -> ScenarioConfig:
    """The bundled default deployment."""
    return default_scenario()


@pytest.fixture
def small_scenario(scenario: ScenarioConfig) -> ScenarioConfig:
    """Default geometry with small surfaces for fast pipeline tests."""
    return scenario.with_updates(M1=3, M2=3, N0=2)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for tests that need randomness."""
    return np.random.default_rng(20240607)


@pytest.fixture
def cn(rng: np.random.Generator):
    """Sampler of i.i.d. CN(0, 1) arrays: ``cn(2, 3)``."""
    def sample(*shape) -> np.ndarray:
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    return sample


@pytest.fixture
def experiment_payload(small_scenario: ScenarioConfig) -> dict:
    """A tiny ExperimentConfig body for API tests."""
    return {
        "name": "smoke",
        "scenario": small_scenario.model_dump(),
        "sweep": "rician_nmse",
        "sweep_values": [20.0],
        "n_trials": 3,
        "master_seed": 11,
        "schemes": ["S1", "S2"],
    }
