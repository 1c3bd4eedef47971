import math
from enum import IntEnum
from typing import Literal

import numpy as np

from .spec import EnvSpec

Region = Literal["safe", "unsafe", "any"]

PENDULUM_SAFE = (math.pi / 12, 0.25)
PENDULUM_UNSAFE_OUTSIDE = (math.pi / 2, 1.5)
VEHICLE_SAFE_OUTER = 2.0
VEHICLE_SAFE_INNER = 1.5
VEHICLE_OBSTACLE = 0.7


class Label(IntEnum):
    UNLABELED = 0
    SAFE = 1
    UNSAFE = 2


def label_batch(states: np.ndarray, spec: EnvSpec) -> np.ndarray:
    """Safety labels of a batch of states as an int8 array of ``Label`` values."""
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    if spec.env_id == "pendulum":
        theta, theta_dot = np.abs(states[:, 0]), np.abs(states[:, 1])
        safe = (theta <= PENDULUM_SAFE[0]) & (theta_dot <= PENDULUM_SAFE[1])
        unsafe = ~(
            (theta <= PENDULUM_UNSAFE_OUTSIDE[0]) & (theta_dot <= PENDULUM_UNSAFE_OUTSIDE[1])
        )
    else:
        reach = np.max(np.abs(states[:, :2]), axis=1)
        safe = (reach <= VEHICLE_SAFE_OUTER) & (reach > VEHICLE_SAFE_INNER)
        unsafe = reach <= VEHICLE_OBSTACLE
    labels = np.full(len(states), Label.UNLABELED, dtype=np.int8)
    labels[safe] = Label.SAFE
    labels[unsafe] = Label.UNSAFE
    return labels


def label(state: np.ndarray, spec: EnvSpec) -> Label:
    return Label(int(label_batch(state, spec)[0]))


def sample_region(region: Region, n: int, spec: EnvSpec, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples from the safe set, the unsafe set or the whole state set.

    Regions that are not boxes are sampled by rejection from the state set.
    """
    low, high = np.asarray(spec.state_low), np.asarray(spec.state_high)
    if n <= 0:
        return np.zeros((0, spec.state_dim))
    if region == "any":
        return rng.uniform(low, high, (n, spec.state_dim))

    if spec.env_id == "pendulum" and region == "safe":
        box = np.asarray(PENDULUM_SAFE)
        return rng.uniform(-box, box, (n, 2))
    if spec.env_id == "vehicle" and region == "unsafe":
        out = rng.uniform(low, high, (n, 3))
        out[:, :2] = rng.uniform(-VEHICLE_OBSTACLE, VEHICLE_OBSTACLE, (n, 2))
        return out

    wanted = Label.SAFE if region == "safe" else Label.UNSAFE
    chunks, total = [], 0
    while total < n:
        candidates = rng.uniform(low, high, (2 * n, spec.state_dim))
        keep = candidates[label_batch(candidates, spec) == wanted]
        chunks.append(keep)
        total += len(keep)
    return np.concatenate(chunks, axis=0)[:n]
