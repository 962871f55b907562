import random

import pytest

from arrayad import default_pipeline, default_registry


@pytest.fixture
def registry():
    return default_registry()


@pytest.fixture
def pipeline():
    return default_pipeline()


@pytest.fixture
def rng():
    return random.Random(20260808)
