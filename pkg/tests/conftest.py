import pytest

from scire import NoiseSchedule


@pytest.fixture(scope="session")
def linear_sched():
    return NoiseSchedule.linear()


@pytest.fixture(scope="session")
def cosine_sched():
    return NoiseSchedule.cosine()
