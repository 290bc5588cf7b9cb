import numpy as np
import pytest

from levyheat.kernel import get_kernel
from levyheat.levy import LevyMeasure, ModelConfig


@pytest.fixture(scope="session")
def kernel_11():
    return get_kernel(1, 1.0)


@pytest.fixture(scope="session")
def kernel_115():
    return get_kernel(1, 1.5)


@pytest.fixture(scope="session")
def model_b3():
    """Unit-floor power tail beta = 3, d = alpha = t = 1."""
    return ModelConfig(1, 1.0, 1.0, 0.0, LevyMeasure.pareto(3.0))


@pytest.fixture(scope="session")
def model_b08():
    return ModelConfig(1, 1.0, 1.0, 0.0, LevyMeasure.pareto(0.8))


@pytest.fixture(scope="session")
def model_a15_b09():
    return ModelConfig(1, 1.5, 1.0, 0.0, LevyMeasure.pareto(0.9))


@pytest.fixture()
def rng():
    return np.random.default_rng(20260809)
