import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import previous_state, step
from .labels import Label, label_batch, sample_region
from .render import render_batch
from .spec import EnvSpec

logger = logging.getLogger(__name__)

ORIGIN_SAFE, ORIGIN_UNSAFE, ORIGIN_STATE_SET, ORIGIN_ROLLOUT = 0, 1, 2, 3


@dataclass
class TransitionBatch:
    """Float64 view of selected records (O_t, a_t, O_{t+1})."""

    observations: np.ndarray
    actions: np.ndarray
    next_observations: np.ndarray
    labels: np.ndarray
    states: np.ndarray

    def __len__(self) -> int:
        return len(self.observations)


class DataBuffer:
    """Labeled transition records with safe (S), unsafe (U) and full (D) views.

    Frames are stored as float32 (the export precision); every record keeps
    the ground-truth states it was rendered from, which are used only for
    labels and oracles. Records are append-only and labels never change.

    Attributes:
        spec: Environment the records belong to
        max_size: Appends stop once this many records are stored (None: no cap)
    """

    _COLUMNS = (
        "observations", "next_observations", "actions", "state_prev",
        "state_now", "state_next", "labels", "origins",
    )

    def __init__(self, spec: EnvSpec, max_size: Optional[int] = None) -> None:
        self.spec = spec
        self.max_size = max_size
        self._size = 0
        self._data = {
            "observations": np.zeros((0, spec.observation_dim), dtype=np.float32),
            "next_observations": np.zeros((0, spec.observation_dim), dtype=np.float32),
            "actions": np.zeros((0, spec.action_dim)),
            "state_prev": np.zeros((0, spec.state_dim)),
            "state_now": np.zeros((0, spec.state_dim)),
            "state_next": np.zeros((0, spec.state_dim)),
            "labels": np.zeros(0, dtype=np.int8),
            "origins": np.zeros(0, dtype=np.int8),
        }

    def __len__(self) -> int:
        return self._size

    def _column(self, name: str) -> np.ndarray:
        return self._data[name][: self._size]

    @property
    def observations(self) -> np.ndarray:
        return self._column("observations")

    @property
    def next_observations(self) -> np.ndarray:
        return self._column("next_observations")

    @property
    def actions(self) -> np.ndarray:
        return self._column("actions")

    @property
    def state_prev(self) -> np.ndarray:
        return self._column("state_prev")

    @property
    def state_now(self) -> np.ndarray:
        return self._column("state_now")

    @property
    def state_next(self) -> np.ndarray:
        return self._column("state_next")

    @property
    def labels(self) -> np.ndarray:
        return self._column("labels")

    @property
    def origins(self) -> np.ndarray:
        return self._column("origins")

    @property
    def safe_indices(self) -> np.ndarray:
        return np.flatnonzero(self.labels == Label.SAFE)

    @property
    def unsafe_indices(self) -> np.ndarray:
        return np.flatnonzero(self.labels == Label.UNSAFE)

    @property
    def all_indices(self) -> np.ndarray:
        return np.arange(self._size)

    def _reserve(self, extra: int) -> None:
        needed = self._size + extra
        capacity = len(self._data["labels"])
        if needed <= capacity:
            return
        new_capacity = max(needed, 2 * capacity, 64)
        for name, column in self._data.items():
            grown = np.zeros((new_capacity, *column.shape[1:]), dtype=column.dtype)
            grown[: self._size] = column[: self._size]
            self._data[name] = grown

    def append_records(
        self,
        observations: np.ndarray,
        actions: np.ndarray,
        next_observations: np.ndarray,
        state_prev: np.ndarray,
        state_now: np.ndarray,
        state_next: np.ndarray,
        labels: np.ndarray,
        origin,
    ) -> int:
        """Append pre-rendered records; returns how many were stored.

        ``origin`` is one code for every record or one code per record.
        """
        count = len(observations)
        if self.max_size is not None:
            count = max(0, min(count, self.max_size - self._size))
            if count < len(observations):
                logger.debug("Buffer cap %d reached; dropping %d records",
                             self.max_size, len(observations) - count)
        if count == 0:
            return 0
        self._reserve(count)
        sl = slice(self._size, self._size + count)
        self._data["observations"][sl] = observations[:count]
        self._data["next_observations"][sl] = next_observations[:count]
        self._data["actions"][sl] = np.asarray(actions, dtype=np.float64).reshape(-1, self.spec.action_dim)[:count]
        self._data["state_prev"][sl] = state_prev[:count]
        self._data["state_now"][sl] = state_now[:count]
        self._data["state_next"][sl] = state_next[:count]
        self._data["labels"][sl] = labels[:count]
        origin = np.asarray(origin, dtype=np.int8)
        self._data["origins"][sl] = origin if origin.ndim == 0 else origin[:count]
        self._size += count
        return count

    def extend(
        self,
        state_prev: np.ndarray,
        state_now: np.ndarray,
        actions: np.ndarray,
        state_next: np.ndarray,
        origin: int = ORIGIN_ROLLOUT,
    ) -> int:
        """Render, label and append transitions given by their states."""
        if self.max_size is not None:
            room = max(0, self.max_size - self._size)
            state_prev, state_now = state_prev[:room], state_now[:room]
            actions, state_next = actions[:room], state_next[:room]
        if len(state_now) == 0:
            return 0
        observations = render_batch(state_prev, state_now, self.spec).astype(np.float32)
        next_observations = render_batch(state_now, state_next, self.spec).astype(np.float32)
        return self.append_records(
            observations,
            actions,
            next_observations,
            state_prev,
            state_now,
            state_next,
            label_batch(state_now, self.spec),
            origin,
        )

    def batch(self, indices: np.ndarray) -> TransitionBatch:
        indices = np.asarray(indices, dtype=np.int64)
        return TransitionBatch(
            observations=self.observations[indices].astype(np.float64),
            actions=self.actions[indices],
            next_observations=self.next_observations[indices].astype(np.float64),
            labels=self.labels[indices],
            states=self.state_now[indices],
        )


def sample_transitions(
    states: np.ndarray, spec: EnvSpec, rng: np.random.Generator
) -> tuple:
    """Previous states, uniform random actions and successors for sampled states."""
    actions = rng.uniform(spec.action_low, spec.action_high, (len(states), spec.action_dim))
    prev = previous_state(states, spec)
    nxt = step(states, actions[:, 0], spec)
    return prev, actions, nxt


def sample_datasets(
    spec: EnvSpec,
    n_safe: int,
    n_unsafe: int,
    n_total: int,
    seed: int,
    max_size: Optional[int] = None,
) -> DataBuffer:
    """Sample S, U and D uniformly from their regions with uniform random actions.

    Records drawn from the state set are labeled by the set definitions, so
    some of them also land in the safe and unsafe views.
    """
    if min(n_safe, n_unsafe, n_total) <= 0:
        raise ValueError("dataset sizes must be positive")
    rng = np.random.default_rng(seed)
    buffer = DataBuffer(spec, max_size=max_size)
    for region, n, origin in (
        ("safe", n_safe, ORIGIN_SAFE),
        ("unsafe", n_unsafe, ORIGIN_UNSAFE),
        ("any", n_total, ORIGIN_STATE_SET),
    ):
        states = sample_region(region, n, spec, rng)
        prev, actions, nxt = sample_transitions(states, spec, rng)
        buffer.extend(prev, states, actions, nxt, origin=origin)
    logger.info(
        "Sampled %d records for %s (%d safe, %d unsafe)",
        len(buffer), spec.env_id, len(buffer.safe_indices), len(buffer.unsafe_indices),
    )
    return buffer
