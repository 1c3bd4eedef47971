"""Tables for plotting the learned barrier over the state set and the latent space."""

import logging
from typing import Sequence

import numpy as np
import pandas as pd

from ..envs.buffer import DataBuffer
from ..envs.dynamics import previous_state
from ..envs.labels import label_batch
from ..envs.render import render_batch
from ..envs.spec import EnvSpec
from ..errors import DimensionError
from ..nets.param_store import ParamStore

logger = logging.getLogger(__name__)


def state_grid(spec: EnvSpec, resolution: Sequence[int]) -> np.ndarray:
    """Regular grid over the state set, ``prod(resolution)`` rows, last axis fastest."""
    resolution = list(resolution)
    if len(resolution) == 1:
        resolution = resolution * spec.state_dim
    if len(resolution) != spec.state_dim or any(r < 1 for r in resolution):
        raise DimensionError(
            f"{spec.env_id} grids need {spec.state_dim} positive resolutions, got {resolution}"
        )
    axes = [
        np.linspace(lo, hi, r) if r > 1 else np.array([0.5 * (lo + hi)])
        for lo, hi, r in zip(spec.state_low, spec.state_high, resolution)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def grid_export(params: ParamStore, spec: EnvSpec, resolution: Sequence[int]) -> pd.DataFrame:
    """Barrier value of every grid state: rendered, encoded, then scored."""
    states = state_grid(spec, resolution)
    observations = render_batch(previous_state(states, spec), states, spec)
    latents = params.encode_all(observations)
    values = params.evaluate_barrier(latents)
    data = {f"state_{i}": states[:, i] for i in range(spec.state_dim)}
    data.update({f"z_{i}": latents[:, i] for i in range(latents.shape[1])})
    data["barrier"] = values
    data["label"] = label_batch(states, spec).astype(int)
    logger.info("Evaluated the barrier on %d grid states", len(states))
    return pd.DataFrame(data)


def latent_export(params: ParamStore, buffer: DataBuffer) -> pd.DataFrame:
    """Latent code, barrier value and label of every buffer record."""
    latents = params.encode_all(buffer.observations)
    data = {
        "record": np.arange(len(buffer)),
        "label": buffer.labels.astype(int),
        "origin": buffer.origins.astype(int),
    }
    data.update({f"z_{i}": latents[:, i] for i in range(params.latent_dim)})
    data["barrier"] = params.evaluate_barrier(latents) if len(buffer) else np.zeros(0)
    return pd.DataFrame(data)
