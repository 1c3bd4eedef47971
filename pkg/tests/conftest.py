import pytest

from barrierflow.config.settings import TrainConfig
from barrierflow.envs.buffer import DataBuffer, sample_datasets
from barrierflow.envs.spec import EnvSpec, make_env_spec
from barrierflow.nets.param_store import ParamStore

from tests.helpers import tiny_config, tiny_params


@pytest.fixture
def pendulum_spec() -> EnvSpec:
    return make_env_spec("pendulum", frame_size=8)


@pytest.fixture
def vehicle_spec() -> EnvSpec:
    return make_env_spec("vehicle", frame_size=8)


@pytest.fixture
def params(pendulum_spec) -> ParamStore:
    return tiny_params(pendulum_spec)


@pytest.fixture
def buffer(pendulum_spec) -> DataBuffer:
    return sample_datasets(pendulum_spec, n_safe=6, n_unsafe=6, n_total=12, seed=3)


@pytest.fixture
def config() -> TrainConfig:
    return tiny_config()
