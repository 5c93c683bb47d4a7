import sys
from pathlib import Path

import pytest
from loguru import logger

# Add project root to path
PROJECT_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from lab.procurement.backtest import load_dataset  # noqa: E402
from lab.procurement.distributions import ErrorModel  # noqa: E402
from lab.procurement.expectation import ExpectationInputs  # noqa: E402

SIGMA1 = 3 ** 0.5
SIGMA2 = 2 ** 0.5


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size Monte Carlo grids and dataset recomputation")


@pytest.fixture(autouse=True)
def _quiet_loguru():
    yield
    # drop sinks bound to captured streams
    logger.remove()


@pytest.fixture
def log_messages():
    messages = []
    handler = logger.add(messages.append, level="DEBUG", format="{level} {message}")
    yield messages
    try:
        logger.remove(handler)
    except ValueError:
        pass


@pytest.fixture
def base_inputs():
    """f = 100, sigma1 = sqrt(3), sigma2 = sqrt(2), a = 1, b = 2, c = 3 at (A, B) = (0, 0)."""
    return ExpectationInputs(
        Ea=1.0, Eb=2.0, Ec=3.0, Eg=100.0, A=0.0, B=0.0,
        pg=ErrorModel.normal(SIGMA1), ph=ErrorModel.normal(SIGMA2),
    )


@pytest.fixture(scope="session")
def bundled_dataset():
    return load_dataset("paper")
