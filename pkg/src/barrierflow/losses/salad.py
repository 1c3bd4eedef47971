import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ..envs.buffer import TransitionBatch
from ..nets.param_store import ParamStore
from ..tensor import Tensor
from ..tensor import functional as F
from .weights import LossWeights

logger = logging.getLogger(__name__)


@dataclass
class SaladTerms:
    """Unweighted terms of the latent-dynamics loss and their weighted sum."""

    safe: Tensor
    unsafe: Tensor
    consistency: Tensor
    total: Tensor

    def as_dict(self) -> Dict[str, float]:
        return {
            "salad_safe": self.safe.item(),
            "salad_unsafe": self.unsafe.item(),
            "salad_consistency": self.consistency.item(),
            "salad": self.total.item(),
        }


def _zero() -> Tensor:
    return Tensor(0.0)


def safe_term(params: ParamStore, observations: np.ndarray, psi: float) -> Tensor:
    """sum over S of max(0, B(z) + psi)."""
    if len(observations) == 0:
        return _zero()
    values = params.barrier(params.encode(observations))
    return F.sum(F.hinge(F.add(values, psi)))


def unsafe_term(params: ParamStore, observations: np.ndarray, psi: float) -> Tensor:
    """sum over U of max(0, -B(z) + psi)."""
    if len(observations) == 0:
        return _zero()
    values = params.barrier(params.encode(observations))
    return F.sum(F.hinge(F.sub(psi, values)))


def consistency_term(params: ParamStore, batch: TransitionBatch) -> Tensor:
    """sum over D of ||E_target(O') - d(E(O), a)||^2.

    The target encoding is evaluated off the tape and carries no gradient.
    """
    if len(batch) == 0:
        return _zero()
    predicted = params.latent_step(params.encode(batch.observations), batch.actions)
    target = Tensor(params.encode_all(batch.next_observations, target=True))
    return F.sum(F.square(F.sub(predicted, target)))


def salad_loss(
    params: ParamStore,
    safe_observations: np.ndarray,
    unsafe_observations: np.ndarray,
    batch: TransitionBatch,
    psi: float,
    weights: Optional[LossWeights] = None,
) -> SaladTerms:
    """Safety-driven latent dynamics loss over one batch of S, U and D.

    Args:
        params: Networks being trained
        safe_observations: (n_s, observation_dim) frames of safe-labeled records
        unsafe_observations: (n_u, observation_dim) frames of unsafe-labeled records
        batch: Transitions drawn from D
        psi: Completeness margin
        weights: xi1..xi3 are used

    Returns:
        Per-term breakdown; ``total`` is the weighted sum to differentiate
    """
    if psi < 0:
        raise ValueError(f"psi must be non-negative, got {psi}")
    weights = weights or LossWeights()
    if len(safe_observations) + len(unsafe_observations) + len(batch) == 0:
        logger.warning("Empty batch for the latent-dynamics loss; returning zero")

    safe = safe_term(params, safe_observations, psi)
    unsafe = unsafe_term(params, unsafe_observations, psi)
    consistency = consistency_term(params, batch)
    total = F.add(
        F.add(F.scale(safe, weights.xi1), F.scale(unsafe, weights.xi2)),
        F.scale(consistency, weights.xi3),
    )
    return SaladTerms(safe=safe, unsafe=unsafe, consistency=consistency, total=total)
