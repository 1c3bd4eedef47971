import math
from typing import Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

EnvId = Literal["pendulum", "vehicle"]
ChannelMode = Literal["gray", "rgb"]


class EnvSpec(BaseModel):
    """Discrete-time system, its bounds and its camera.

    Attributes:
        env_id: ``pendulum`` or ``vehicle``
        state_low: Lower corner of the state set X
        state_high: Upper corner of the state set X
        action_low: Lower bound of the scalar input interval U
        action_high: Upper bound of the scalar input interval U
        dt: Integration step in seconds
        mass: Pendulum mass (kg)
        length: Pendulum length (m)
        gravity: Gravitational acceleration (m/s^2)
        speed: Constant vehicle speed (m/s)
        frame_size: Rendered frames are ``frame_size`` x ``frame_size``
        channels: ``gray`` (1 channel) or ``rgb`` (3 channels)
        frames_per_observation: Stacked frames per observation
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    env_id: EnvId
    state_low: Tuple[float, ...]
    state_high: Tuple[float, ...]
    action_low: float
    action_high: float
    dt: float = Field(gt=0.0)
    mass: float = Field(default=1.0, gt=0.0)
    length: float = Field(default=1.0, gt=0.0)
    gravity: float = 10.0
    speed: float = 1.0
    frame_size: int = Field(default=32, ge=4)
    channels: ChannelMode = "gray"
    frames_per_observation: Literal[2] = 2

    @model_validator(mode="after")
    def _validate_bounds(self) -> "EnvSpec":
        if len(self.state_low) != len(self.state_high):
            raise ValueError("state bounds must have the same length")
        if any(lo >= hi for lo, hi in zip(self.state_low, self.state_high)):
            raise ValueError("state bounds must be non-degenerate")
        if not self.action_low < self.action_high:
            raise ValueError("action bounds must satisfy action_low < action_high")
        expected = 2 if self.env_id == "pendulum" else 3
        if len(self.state_low) != expected:
            raise ValueError(f"{self.env_id} states have {expected} components")
        return self

    @property
    def state_dim(self) -> int:
        return len(self.state_low)

    @property
    def action_dim(self) -> int:
        return 1

    @property
    def action_bounds(self) -> Tuple[float, float]:
        return (self.action_low, self.action_high)

    @property
    def n_channels(self) -> int:
        return 3 if self.channels == "rgb" else 1

    @property
    def frame_dim(self) -> int:
        return self.frame_size * self.frame_size * self.n_channels

    @property
    def observation_dim(self) -> int:
        return self.frame_dim * self.frames_per_observation


def make_env_spec(env_id: EnvId, **overrides) -> EnvSpec:
    """Default system for ``env_id`` with selected fields overridden."""
    if env_id == "pendulum":
        defaults = dict(
            env_id="pendulum",
            state_low=(-math.pi, -3.5),
            state_high=(math.pi, 3.5),
            action_low=-10.0,
            action_high=10.0,
            dt=0.05,
            frame_size=32,
        )
    elif env_id == "vehicle":
        defaults = dict(
            env_id="vehicle",
            state_low=(-2.0, -2.0, -math.pi),
            state_high=(2.0, 2.0, math.pi),
            action_low=-2.0,
            action_high=2.0,
            dt=0.05,
            frame_size=48,
        )
    else:
        raise ValueError(f"unknown environment {env_id!r}")
    defaults.update(overrides)
    return EnvSpec(**defaults)
