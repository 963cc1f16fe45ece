import numpy as np
import pytest

from igfit.datasets import load_dataset


@pytest.fixture(scope="session")
def repair_times():
    return load_dataset("repair_times")


@pytest.fixture(scope="session")
def jug_bridge():
    return load_dataset("jug_bridge")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
