from typing import Callable, Dict, Optional

import numpy as np

from ..nets.param_store import ParamStore
from ..tensor import Tensor
from ..tensor import functional as F

UserPolicy = Callable[[np.ndarray], np.ndarray]


def zero_policy(action_dim: int = 1) -> UserPolicy:
    """Reference controller that always commands zero input."""

    def policy(latents: np.ndarray) -> np.ndarray:
        return np.zeros((len(latents), action_dim))

    return policy


USER_POLICIES: Dict[str, Callable[[int], UserPolicy]] = {"zero": zero_policy}


def perf_loss(
    params: ParamStore,
    observations: np.ndarray,
    user_policy: UserPolicy,
    latents: Optional[Tensor] = None,
) -> Tensor:
    """Mean distance between the learned policy and the user's reference policy.

    ``user_policy`` maps (n, latent_dim) latents to (n, action_dim) actions and
    is treated as a constant.
    """
    if len(observations) == 0:
        return Tensor(0.0)
    z = latents if latents is not None else params.encode(observations)
    actions = params.policy(z)
    reference = np.asarray(user_policy(z.data), dtype=np.float64).reshape(actions.shape)
    return F.mean(F.row_norm(F.sub(actions, Tensor(reference))))
