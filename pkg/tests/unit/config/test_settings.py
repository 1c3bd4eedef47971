import pytest
import yaml

from barrierflow.config.settings import (
    OUTPUT_ENV_VAR,
    config_settings,
    default_config,
    load_config,
    output_directory,
    parse_config,
)
from barrierflow.errors import ConfigError


def test_environment_defaults():
    pendulum = default_config("pendulum")
    assert pendulum.lipschitz_bound == 2.0
    assert pendulum.network.latent_dim == 2
    assert pendulum.user_policy == "zero"
    vehicle = default_config("vehicle")
    assert vehicle.lipschitz_bound == 1.5
    assert vehicle.network.latent_dim == 4
    assert vehicle.user_policy == "none"


def test_default_architecture():
    network = default_config("pendulum").network
    assert network.encoder_hidden == [256, 128]
    assert network.dynamics_hidden == [64, 64]
    assert network.barrier_hidden == [32, 32]
    assert network.policy_hidden == [64, 64]
    assert network.barrier_activation == "relu"


def test_synthesis_encoding_switch():
    assert not default_config("pendulum").synthesis_target_encoder
    assert default_config("vehicle", synthesis_target_encoder=True).synthesis_target_encoder


def test_loss_weight_defaults():
    weights = default_config("pendulum").weights
    assert (weights.xi1, weights.xi2, weights.xi3) == (1.0, 1.0, 1.0)
    assert (weights.lambda1, weights.lambda2, weights.lambda3) == (1.0, 0.5, 0.1)


def test_negative_weight_names_the_field():
    with pytest.raises(ConfigError) as exc_info:
        parse_config({"env": "pendulum", "weights": {"xi1": -1}})
    assert any(field.startswith("weights.xi1") for field in exc_info.value.fields)


def test_unknown_keys_and_environments_rejected():
    with pytest.raises(ConfigError):
        parse_config({"env": "pendulum", "learning_rate": 0.1})
    with pytest.raises(ConfigError):
        parse_config({"env": "cartpole"})


def test_explicit_values_override_defaults():
    config = parse_config(
        {"env": {"env_id": "pendulum", "frame_size": 16}, "lipschitz_bound": 3.0, "network": {"latent_dim": 3}}
    )
    assert config.env.frame_size == 16
    assert config.lipschitz_bound == 3.0
    assert config.network.latent_dim == 3
    assert config.network.barrier_hidden == [32, 32]


def test_settings_round_trip():
    config = default_config("vehicle", seed=9, max_iterations=3)
    assert parse_config(config_settings(config)) == config


def test_load_config_from_yaml(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump({"env": {"env_id": "pendulum"}, "seed": 4}))
    assert load_config(path).seed == 4


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    broken = tmp_path / "broken.yaml"
    broken.write_text("- just\n- a list\n")
    with pytest.raises(ConfigError):
        load_config(broken)


def test_output_directory_precedence(tmp_path, monkeypatch):
    config = default_config("pendulum", output_dir=str(tmp_path / "config"))
    monkeypatch.delenv(OUTPUT_ENV_VAR, raising=False)
    assert output_directory(config) == tmp_path / "config"
    monkeypatch.setenv(OUTPUT_ENV_VAR, str(tmp_path / "env"))
    assert output_directory(config) == tmp_path / "env"
    assert output_directory(config, tmp_path / "flag") == tmp_path / "flag"
