import numpy as np

from barrierflow.config.settings import TrainConfig, default_config
from barrierflow.envs.spec import EnvSpec
from barrierflow.nets.param_store import ParamStore, network_specs

TINY_NETWORK = {
    "encoder_hidden": [8],
    "dynamics_hidden": [8],
    "barrier_hidden": [8],
    "policy_hidden": [8],
}

TINY_VERIFY = {
    "probe_resolution": 10,
    "sobol_points": 64,
    "n_rollouts": 2,
    "horizon": 5,
    "holdout": 10,
    "lipschitz_pairs": 200,
    "extension_resolution": 10,
}


def tiny_config(**overrides) -> TrainConfig:
    """Pendulum run small enough for unit and integration tests."""
    settings = dict(
        env={"env_id": "pendulum", "frame_size": 8},
        n_safe=12,
        n_unsafe=12,
        n_total=24,
        warm_start_epochs=1,
        max_iterations=2,
        batch_size=16,
        network=TINY_NETWORK,
        rollout={"n_rollouts": 2, "horizon": 3},
        verify=TINY_VERIFY,
        max_buffer_size=200,
    )
    settings.update(overrides)
    return default_config("pendulum", **settings)


def tiny_params(spec: EnvSpec, latent_dim: int = 2, seed: int = 0) -> ParamStore:
    specs = network_specs(
        observation_dim=spec.observation_dim,
        action_dim=spec.action_dim,
        action_bounds=spec.action_bounds,
        latent_dim=latent_dim,
        encoder_hidden=[8],
        dynamics_hidden=[8],
        barrier_hidden=[8],
        policy_hidden=[8],
    )
    return ParamStore.create(specs, np.random.default_rng(seed))


def make_constant(net, value) -> None:
    """Zero every weight and bias, then set the output bias to ``value``."""
    for tensor in net.parameters():
        tensor.data = np.zeros_like(tensor.data)
    net.biases[-1].data = np.full(net.biases[-1].shape, value, dtype=np.float64)
