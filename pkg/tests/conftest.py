import pytest

from blayer.config import RunConfig
from blayer.verify import Pipeline


@pytest.fixture(scope="session")
def pipe():
    return Pipeline(RunConfig())


@pytest.fixture(scope="session")
def eig(pipe):
    return pipe.eig


@pytest.fixture(scope="session")
def sc(pipe):
    return pipe.sc


@pytest.fixture(scope="session")
def xprof(pipe):
    return pipe.x


@pytest.fixture(scope="session")
def wprof(pipe):
    return pipe.w


@pytest.fixture(scope="session")
def bump(pipe):
    return pipe.hshear
