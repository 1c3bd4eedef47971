import logging
from dataclasses import dataclass
from typing import Dict, Optional, Union

import numpy as np

from ..envs.buffer import TransitionBatch
from ..nets.param_store import ParamStore
from ..tensor import Tensor
from ..tensor import functional as F
from .performance import UserPolicy, perf_loss
from .salad import SaladTerms, salad_loss
from .synthesis import PolicyInput, syn_loss
from .weights import LossWeights

logger = logging.getLogger(__name__)

Scalar = Union[Tensor, float]


def total_loss(
    syn: Scalar,
    salad: Scalar,
    perf: Optional[Scalar],
    weights: Optional[LossWeights] = None,
) -> Tensor:
    """lambda1 * syn + lambda2 * salad + lambda3 * perf; perf is skipped when None."""
    weights = weights or LossWeights()
    total = F.add(F.scale(F.as_tensor(syn), weights.lambda1), F.scale(F.as_tensor(salad), weights.lambda2))
    if perf is not None:
        total = F.add(total, F.scale(F.as_tensor(perf), weights.lambda3))
    return total


@dataclass
class LossBreakdown:
    """Every training loss evaluated on one common batch."""

    total: Tensor
    syn: Tensor
    salad: SaladTerms
    perf: Optional[Tensor]

    def as_dict(self) -> Dict[str, float]:
        values = {"total": self.total.item(), "syn": self.syn.item()}
        values.update(self.salad.as_dict())
        values["perf"] = self.perf.item() if self.perf is not None else float("nan")
        return values


def compute_losses(
    params: ParamStore,
    safe_observations: np.ndarray,
    unsafe_observations: np.ndarray,
    batch: TransitionBatch,
    psi: float,
    eta: float,
    weights: Optional[LossWeights] = None,
    user_policy: Optional[UserPolicy] = None,
    policy_input: PolicyInput = "online",
    target_encoder: bool = False,
) -> LossBreakdown:
    """Evaluate the synthesis, latent-dynamics and performance losses on the tape."""
    weights = weights or LossWeights()
    salad = salad_loss(params, safe_observations, unsafe_observations, batch, psi, weights)
    latents = params.encode(batch.observations) if len(batch) else None
    syn = syn_loss(
        params, batch.observations, psi, eta, policy_input, latents, target_encoder
    )
    perf = None
    if user_policy is not None:
        perf = perf_loss(params, batch.observations, user_policy, latents)
    total = total_loss(syn, salad.total, perf, weights)
    return LossBreakdown(total=total, syn=syn, salad=salad, perf=perf)
