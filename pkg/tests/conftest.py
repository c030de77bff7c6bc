import numpy as np
import pytest

from manager.experiment_config import ExperimentConfig
from manager.family_manager import FamilyManager


@pytest.fixture(scope="session")
def catalog() -> FamilyManager:
    return FamilyManager()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def make_config():
    """Experiment configs from partial dictionaries, defaults filling the rest."""

    def make(**data) -> ExperimentConfig:
        return ExperimentConfig.from_dict(data)

    return make
