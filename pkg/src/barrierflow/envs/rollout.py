import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, List, Optional

import numpy as np

from .buffer import DataBuffer, ORIGIN_ROLLOUT
from .dynamics import previous_state, step
from .labels import Label, label_batch
from .render import render_batch
from .spec import EnvSpec

if TYPE_CHECKING:
    from ..nets.param_store import ParamStore

logger = logging.getLogger(__name__)

ObservationPolicy = Callable[[np.ndarray], np.ndarray]


class LatentPolicy:
    """Closed-loop controller: observation -> encoder -> policy network."""

    def __init__(self, params: "ParamStore") -> None:
        self.params = params

    def latents(self, observations: np.ndarray) -> np.ndarray:
        return self.params.encode_all(observations)

    def __call__(self, observations: np.ndarray) -> np.ndarray:
        actions = self.params.evaluate_policy(self.latents(observations))
        return actions[:, 0]

    def barrier(self, observations: np.ndarray) -> np.ndarray:
        return self.params.evaluate_barrier(self.latents(observations))


@dataclass
class Trajectory:
    """States s_0..s_H, actions a_0..a_{H-1}, labels and barrier values."""

    states: np.ndarray
    actions: np.ndarray
    labels: np.ndarray
    barrier: Optional[np.ndarray] = None

    @property
    def safe(self) -> bool:
        return not bool(np.any(self.labels == Label.UNSAFE))

    @property
    def unsafe_entries(self) -> int:
        return int(np.sum(self.labels == Label.UNSAFE))

    @property
    def horizon(self) -> int:
        return len(self.actions)


def rollout_batch(
    policy: ObservationPolicy,
    starts: np.ndarray,
    horizon: int,
    spec: EnvSpec,
    buffer: Optional[DataBuffer] = None,
) -> List[Trajectory]:
    """Run render -> policy -> step for every start state in lockstep.

    Args:
        policy: Maps (n, observation_dim) frames to (n,) actions
        starts: (n, state_dim) initial states
        horizon: Number of steps
        spec: Environment
        buffer: When given, every visited transition is appended to it

    Returns:
        One trajectory per start state
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=np.float64))
    n = len(starts)
    states = np.zeros((horizon + 1, n, spec.state_dim))
    actions = np.zeros((horizon, n))
    barrier = np.zeros((horizon + 1, n)) if isinstance(policy, LatentPolicy) else None
    states[0] = starts
    prev = previous_state(starts, spec)

    for t in range(horizon + 1):
        observations = render_batch(prev, states[t], spec)
        if barrier is not None:
            barrier[t] = policy.barrier(observations)
        if t == horizon:
            break
        # rounding in the tanh squash can leave the interval by an ulp
        actions[t] = np.clip(policy(observations), spec.action_low, spec.action_high)
        states[t + 1] = step(states[t], actions[t], spec)
        prev = states[t]

    if buffer is not None and horizon > 0:
        prev_states = np.concatenate([previous_state(starts, spec)[None], states[:-2]], axis=0)
        buffer.extend(
            prev_states.reshape(-1, spec.state_dim),
            states[:-1].reshape(-1, spec.state_dim),
            actions.reshape(-1, 1),
            states[1:].reshape(-1, spec.state_dim),
            origin=ORIGIN_ROLLOUT,
        )

    trajectories = []
    for i in range(n):
        path = states[:, i, :]
        trajectories.append(
            Trajectory(
                states=path,
                actions=actions[:, i],
                labels=label_batch(path, spec),
                barrier=None if barrier is None else barrier[:, i],
            )
        )
    return trajectories


def rollout(
    policy: ObservationPolicy, start: np.ndarray, horizon: int, spec: EnvSpec
) -> Trajectory:
    """Single closed-loop trajectory; ``safe`` is false iff an unsafe state is visited."""
    return rollout_batch(policy, np.atleast_2d(start), horizon, spec)[0]
