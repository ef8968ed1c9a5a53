import numpy as np
import pytest
from hypothesis import settings

from suturedtorus.config import make_model

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def model3():
    return make_model({"n": 3})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def polar(r, th):
    return np.array([r * np.cos(th), r * np.sin(th)])
