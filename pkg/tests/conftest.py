import numpy as np
import pytest

from lumen.atomkit import TransitionSpec


@pytest.fixture(scope="session")
def hydro():
    return TransitionSpec.preset("hydrogen-paper")


@pytest.fixture(scope="session")
def hydro_lit():
    return TransitionSpec.preset("hydrogen-literature")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
