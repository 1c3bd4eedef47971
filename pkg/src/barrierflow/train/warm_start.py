import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..certify.margins import Margins
from ..certify.verify import refresh_margins
from ..config.settings import TrainConfig
from ..core.interfaces.context import PHASE_INIT, PHASE_WARM_START, iteration_rng
from ..core.optimizers.adam import Adam
from ..envs.buffer import DataBuffer, sample_datasets
from ..losses.salad import salad_loss
from ..nets.param_store import ParamStore, network_specs
from ..tensor import Tape
from .steps import ensure_finite, sample_indices

logger = logging.getLogger(__name__)


@dataclass
class WarmStartResult:
    """Networks after the warm start, with the data and optimizer state they continue from."""

    params: ParamStore
    buffer: DataBuffer
    margins: Margins
    optimizer: Adam
    epoch_losses: List[float] = field(default_factory=list)


def initial_params(config: TrainConfig) -> ParamStore:
    """Freshly initialized networks; the target copy starts equal to the online one."""
    env, network = config.env, config.network
    specs = network_specs(
        observation_dim=env.observation_dim,
        action_dim=env.action_dim,
        action_bounds=env.action_bounds,
        latent_dim=network.latent_dim,
        encoder_hidden=network.encoder_hidden,
        dynamics_hidden=network.dynamics_hidden,
        barrier_hidden=network.barrier_hidden,
        policy_hidden=network.policy_hidden,
        barrier_activation=network.barrier_activation,
    )
    return ParamStore.create(specs, iteration_rng(config.seed, PHASE_INIT, 0), config.rho)


def initial_buffer(config: TrainConfig) -> DataBuffer:
    return sample_datasets(
        config.env,
        config.n_safe,
        config.n_unsafe,
        config.n_total,
        config.seed,
        max_size=config.max_buffer_size,
    )


def warm_start(
    config: TrainConfig,
    buffer: Optional[DataBuffer] = None,
    params: Optional[ParamStore] = None,
) -> WarmStartResult:
    """Fit the latent-dynamics model on randomly actuated transitions.

    Each epoch refreshes psi from the covering radius of the current
    encoding, then makes one pass over D in minibatches; every minibatch
    also draws from the safe and unsafe views. The target networks are
    Polyak-updated after each step.

    Raises:
        DivergenceError: If the loss becomes non-finite
    """
    buffer = buffer if buffer is not None else initial_buffer(config)
    params = params if params is not None else initial_params(config)
    optimizer = Adam(params.parameters(), config.lr, config.betas, config.eps)
    epoch_losses: List[float] = []

    for epoch in range(config.warm_start_epochs):
        rng = iteration_rng(config.seed, PHASE_WARM_START, epoch)
        margins = refresh_margins(
            params, buffer, config.lipschitz_bound, config.verify, config.seed, include_delta=False
        )
        order = rng.permutation(len(buffer))
        totals = []
        for start in range(0, len(order), config.batch_size):
            batch = buffer.batch(order[start : start + config.batch_size])
            safe = sample_indices(buffer.safe_indices, config.batch_size, rng)
            unsafe = sample_indices(buffer.unsafe_indices, config.batch_size, rng)
            params.zero_grad()
            with Tape() as tape:
                terms = salad_loss(
                    params,
                    buffer.observations[safe].astype(np.float64),
                    buffer.observations[unsafe].astype(np.float64),
                    batch,
                    margins.psi,
                    config.weights,
                )
                totals.append(ensure_finite(terms.total.item(), "warm-start loss"))
                tape.backward(terms.total)
            optimizer.step()
            params.polyak_update(config.rho)
        epoch_losses.append(float(np.mean(totals)))
        logger.info(
            "Warm start epoch %d/%d: loss %.6g, psi %.4g",
            epoch + 1, config.warm_start_epochs, epoch_losses[-1], margins.psi,
        )

    margins = refresh_margins(params, buffer, config.lipschitz_bound, config.verify, config.seed)
    return WarmStartResult(params, buffer, margins, optimizer, epoch_losses)
