"""Typed run configuration.

Configs are YAML files whose sections mirror :class:`TrainConfig`; unknown
keys are rejected. Environment-dependent defaults (Lipschitz bound, latent
size, reference policy, camera) are filled in from ``env.env_id``.
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..envs.labels import Region
from ..envs.spec import EnvSpec, make_env_spec
from ..errors import ConfigError
from ..losses.synthesis import PolicyInput
from ..losses.weights import LossWeights
from ..nets.mlp import HiddenActivation

logger = logging.getLogger(__name__)

OUTPUT_ENV_VAR = "BARRIERFLOW_OUT"

ENV_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "pendulum": {"lipschitz_bound": 2.0, "latent_dim": 2, "user_policy": "zero"},
    "vehicle": {"lipschitz_bound": 1.5, "latent_dim": 4, "user_policy": "none"},
}


class NetworkConfig(BaseModel):
    """Hidden widths of the four networks and the latent size."""

    model_config = ConfigDict(extra="forbid")

    latent_dim: int = Field(default=2, ge=1)
    encoder_hidden: List[int] = Field(default_factory=lambda: [256, 128])
    dynamics_hidden: List[int] = Field(default_factory=lambda: [64, 64])
    barrier_hidden: List[int] = Field(default_factory=lambda: [32, 32])
    policy_hidden: List[int] = Field(default_factory=lambda: [64, 64])
    barrier_activation: HiddenActivation = "relu"

    @field_validator("encoder_hidden", "dynamics_hidden", "barrier_hidden", "policy_hidden")
    @classmethod
    def _validate_hidden(cls, widths: List[int]) -> List[int]:
        if not widths or any(w < 1 for w in widths):
            raise ValueError("need at least one hidden layer, every width >= 1")
        return widths


class RolloutConfig(BaseModel):
    """Closed-loop rollouts collected at every outer iteration."""

    model_config = ConfigDict(extra="forbid")

    n_rollouts: int = Field(default=10, gt=0)
    horizon: int = Field(default=100, gt=0)
    start_region: Region = "any"


class VerifyConfig(BaseModel):
    """Probe densities and evaluation budgets of certificate verification."""

    model_config = ConfigDict(extra="forbid")

    probe_resolution: int = Field(default=100, ge=2)
    sobol_points: int = Field(default=100_000, ge=2)
    delta_mode: Literal["stored", "action_grid"] = "stored"
    action_grid_size: int = Field(default=11, ge=2)
    n_rollouts: int = Field(default=100, ge=0)
    horizon: int = Field(default=200, ge=0)
    holdout: int = Field(default=1000, ge=0)
    lipschitz_pairs: int = Field(default=100_000, ge=1)
    extension_check: bool = True
    extension_resolution: int = Field(default=200, ge=2)


class TrainConfig(BaseModel):
    """Everything a training run depends on.

    Attributes:
        env: System, bounds and camera
        n_safe: Initial samples from the safe set
        n_unsafe: Initial samples from the unsafe set
        n_total: Initial samples from the whole state set
        warm_start_epochs: Passes over D minimizing the latent-dynamics loss
        max_iterations: Outer iterations before giving up
        batch_size: Records per gradient step (per view)
        loss_steps: Total-loss steps per outer iteration
        lmi_steps: Certificate steps per outer iteration
        lr: Step size of the total-loss optimizer
        lmi_lr: Step size of the certificate optimizer
        betas: Adam moment decay rates
        eps: Adam denominator floor
        rho: Polyak coefficient of the target networks
        weights: Loss weights
        lipschitz_bound: Prescribed Lipschitz bound of the barrier
        network: Architectures
        rollout: Rollouts collected per iteration
        verify: Verification settings
        seed: Root of every random stream
        tolerance: Candidate threshold on the batch safety losses
        max_buffer_size: Cap on D; rollout appends stop there
        checkpoint_every: Also save a resumable checkpoint every this many iterations
        user_policy: Reference policy of the performance loss (``none`` disables it)
        policy_input: Encoding the policy sees inside the synthesis loss
        synthesis_target_encoder: Score the synthesis loss on the target encoding throughout
        output_dir: Default output directory
    """

    model_config = ConfigDict(extra="forbid")

    env: EnvSpec
    n_safe: int = Field(default=500, gt=0)
    n_unsafe: int = Field(default=500, gt=0)
    n_total: int = Field(default=2000, gt=0)
    warm_start_epochs: int = Field(default=20, gt=0)
    max_iterations: int = Field(default=500, gt=0)
    batch_size: int = Field(default=64, gt=0)
    loss_steps: int = Field(default=1, gt=0)
    lmi_steps: int = Field(default=1, gt=0)
    lr: float = Field(default=1e-3, gt=0.0)
    lmi_lr: float = Field(default=1e-4, gt=0.0)
    betas: Tuple[float, float] = (0.9, 0.999)
    eps: float = Field(default=1e-8, gt=0.0)
    rho: float = Field(default=0.995, ge=0.0, lt=1.0)
    weights: LossWeights = Field(default_factory=LossWeights)
    lipschitz_bound: float = Field(gt=0.0)
    network: NetworkConfig = Field(default_factory=NetworkConfig)
    rollout: RolloutConfig = Field(default_factory=RolloutConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)
    seed: int = Field(default=0, ge=0)
    tolerance: float = Field(default=1e-5, ge=0.0)
    max_buffer_size: Optional[int] = Field(default=20_000, gt=0)
    checkpoint_every: Optional[int] = Field(default=None, gt=0)
    user_policy: Literal["zero", "none"]
    policy_input: PolicyInput = "online"
    synthesis_target_encoder: bool = False
    output_dir: str = "runs"

    @model_validator(mode="before")
    @classmethod
    def _apply_env_defaults(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        env = data.get("env")
        if isinstance(env, str):
            env = {"env_id": env}
        if isinstance(env, dict):
            env = dict(env)
            env_id = env.pop("env_id", None)
            if env_id not in ENV_DEFAULTS:
                raise ValueError(f"env.env_id must be one of {sorted(ENV_DEFAULTS)}, got {env_id!r}")
            data["env"] = make_env_spec(env_id, **env)
        if not isinstance(data.get("env"), EnvSpec):
            return data

        defaults = ENV_DEFAULTS[data["env"].env_id]
        data.setdefault("lipschitz_bound", defaults["lipschitz_bound"])
        data.setdefault("user_policy", defaults["user_policy"])
        network = data.get("network")
        if network is None:
            data["network"] = {"latent_dim": defaults["latent_dim"]}
        elif isinstance(network, dict):
            data["network"] = {"latent_dim": defaults["latent_dim"], **network}
        return data

    @field_validator("betas")
    @classmethod
    def _validate_betas(cls, betas: Tuple[float, float]) -> Tuple[float, float]:
        if not all(0.0 <= b < 1.0 for b in betas):
            raise ValueError("Adam betas must lie in [0, 1)")
        return betas

    @property
    def env_id(self) -> str:
        return self.env.env_id


def _field_messages(error: ValidationError) -> List[str]:
    messages = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"]) or "(root)"
        messages.append(f"{path}: {item['msg']}")
    return messages


def parse_config(data: Dict[str, Any]) -> TrainConfig:
    """Validate a mapping into a TrainConfig.

    Raises:
        ConfigError: Listing every offending field path
    """
    try:
        return TrainConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError("invalid configuration", fields=_field_messages(exc)) from exc
    except ValueError as exc:
        raise ConfigError("invalid configuration", fields=[str(exc)]) from exc


def load_config(path: Union[str, Path]) -> TrainConfig:
    """Read and validate a YAML run configuration."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}", fields=[str(exc)]) from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path} is not valid YAML", fields=[str(exc)]) from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must contain a mapping of settings")
    config = parse_config(data)
    logger.info("Loaded %s configuration from %s", config.env_id, path)
    return config


def default_config(env_id: str, **overrides: Any) -> TrainConfig:
    """Documented defaults for ``pendulum`` or ``vehicle``."""
    return parse_config({"env": {"env_id": env_id}, **overrides})


def config_settings(config: TrainConfig) -> Dict[str, Any]:
    """JSON-ready form stored in checkpoints."""
    return config.model_dump(mode="json")


def output_directory(config: TrainConfig, override: Optional[Union[str, Path]] = None) -> Path:
    """``override`` (the --out flag), else $BARRIERFLOW_OUT, else ``config.output_dir``."""
    if override is not None:
        return Path(override)
    from_env = os.environ.get(OUTPUT_ENV_VAR)
    return Path(from_env) if from_env else Path(config.output_dir)
