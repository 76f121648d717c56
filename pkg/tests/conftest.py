import numpy as np
import pytest

from sgfdkit.coefficients import table1_coefficients, taylor_coefficients


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running simulation tests")


@pytest.fixture(scope="session")
def taylor7():
    return taylor_coefficients(7)


@pytest.fixture(scope="session")
def table1_7():
    return table1_coefficients(7)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240911)


def normalized_misfit(a, b):
    """||a - b||_2 / ||a||_2 for two traces."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(np.linalg.norm(a - b) / np.linalg.norm(a))
