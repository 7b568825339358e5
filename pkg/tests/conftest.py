"""Shared fixtures for the test suite."""
import numpy as np # type: ignore
import pytest # type: ignore

from models.params import ModelParams, Point3, RecurrenceParams
from models.reports import RecurrenceSearchResult
from services.certificates import search_recurrence_params


@pytest.fixture
def classic_params() -> ModelParams:
    """σ = 10, ρ = 28, β = 8/3 with noise on every coordinate."""
    return ModelParams(sigma=10.0, rho=28.0, beta=8.0 / 3.0, gamma1=0.5, gamma2=0.5, gamma3=0.5)


@pytest.fixture
def undamped_params() -> ModelParams:
    """β = 0 with noise on x and y."""
    return ModelParams(sigma=10.0, rho=28.0, beta=0.0, gamma1=1.0, gamma2=1.0)


@pytest.fixture
def x_noise_params() -> ModelParams:
    """β = 0 with noise on x only."""
    return ModelParams(sigma=10.0, rho=28.0, beta=0.0, gamma1=1.0)


@pytest.fixture
def reversed_params() -> ModelParams:
    """β = −1/2, noise on x."""
    return ModelParams(sigma=10.0, rho=28.0, beta=-0.5, gamma1=1.0)


@pytest.fixture
def vertical_noise_params() -> ModelParams:
    """γ₁ = 0, β = 0, noise on z only."""
    return ModelParams(sigma=10.0, rho=28.0, beta=0.0, gamma3=1.0)


@pytest.fixture
def small_rp() -> RecurrenceParams:
    return RecurrenceParams(R0=4.0, R1=2.0, R2=8.0, R3=4.0, kappa0=101.0, kappa1=8.0, kappa2=8.0)


@pytest.fixture
def origin() -> Point3:
    return Point3(x=0.0, y=0.0, z=0.0)


@pytest.fixture
def sample_points() -> np.ndarray:
    rng = np.random.default_rng(7)
    return rng.uniform(-30.0, 30.0, size=(200, 3))


@pytest.fixture(scope="session")
def x_noise_origin_params() -> ModelParams:
    """σ = 10, ρ = β = 0, noise on x only."""
    return ModelParams(sigma=10.0, rho=0.0, beta=0.0, gamma1=1.0)


@pytest.fixture(scope="session")
def found_certificate(x_noise_origin_params) -> RecurrenceSearchResult:
    """A full recurrence search; shared by the slow tests that need its radii."""
    return search_recurrence_params(x_noise_origin_params, budget=200, search_samples=128, verify_samples=1000)
