import logging
from typing import Literal, Optional

import numpy as np

from ..nets.param_store import ParamStore
from ..tensor import Tensor
from ..tensor import functional as F

logger = logging.getLogger(__name__)

PolicyInput = Literal["online", "target"]


def decrease_slack(
    params: ParamStore,
    observations: np.ndarray,
    psi: float,
    eta: float,
    policy_input: PolicyInput = "online",
    latents: Optional[Tensor] = None,
    target_encoder: bool = False,
) -> Tensor:
    """B_target(d(z_target, pi(z))) + eta - B(z) + psi for every observation.

    The next latent is predicted by the online dynamics from the target
    encoding, and scored by the target barrier; only the online encoder,
    dynamics, policy and barrier receive gradients. With
    ``policy_input="target"`` the policy also acts on the target encoding.
    ``target_encoder`` feeds the target encoding to both the online barrier
    and the policy, so the encoder receives no gradient from this loss.
    """
    z_target = Tensor(params.encode_all(observations, target=True))
    if target_encoder:
        z = z_target
    else:
        z = latents if latents is not None else params.encode(observations)
    action = params.policy(z if policy_input == "online" else z_target)
    predicted = params.latent_step(z_target, action)
    barrier_next = params.barrier(predicted, target=True)
    slack = F.sub(F.add(barrier_next, eta), params.barrier(z))
    return F.add(slack, psi)


def syn_loss(
    params: ParamStore,
    observations: np.ndarray,
    psi: float,
    eta: float,
    policy_input: PolicyInput = "online",
    latents: Optional[Tensor] = None,
    target_encoder: bool = False,
) -> Tensor:
    """Policy synthesis loss: hinge of the margined decrease condition summed over D."""
    if psi < 0 or eta < 0:
        raise ValueError(f"margins must be non-negative, got psi={psi}, eta={eta}")
    if len(observations) == 0:
        logger.warning("Empty batch for the synthesis loss; returning zero")
        return Tensor(0.0)
    slack = decrease_slack(params, observations, psi, eta, policy_input, latents, target_encoder)
    return F.sum(F.hinge(slack))
