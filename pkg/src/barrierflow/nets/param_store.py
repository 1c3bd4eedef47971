import logging
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from ..errors import DimensionError
from ..tensor import Tensor, no_grad
from ..tensor import functional as F
from .mlp import MLP, HiddenActivation, MLPSpec

logger = logging.getLogger(__name__)

NETWORK_NAMES = ("encoder", "dynamics", "barrier", "policy")


def network_specs(
    observation_dim: int,
    action_dim: int,
    action_bounds: Tuple[float, float],
    latent_dim: int,
    encoder_hidden: List[int],
    dynamics_hidden: List[int],
    barrier_hidden: List[int],
    policy_hidden: List[int],
    barrier_activation: HiddenActivation = "relu",
) -> Dict[str, MLPSpec]:
    """Architectures of the encoder, latent dynamics, barrier and policy."""
    return {
        "encoder": MLPSpec(
            widths=[observation_dim, *encoder_hidden, latent_dim],
            activations=["relu"] * len(encoder_hidden),
        ),
        "dynamics": MLPSpec(
            widths=[latent_dim + action_dim, *dynamics_hidden, latent_dim],
            activations=["relu"] * len(dynamics_hidden),
        ),
        "barrier": MLPSpec(
            widths=[latent_dim, *barrier_hidden, 1],
            activations=[barrier_activation] * len(barrier_hidden),
        ),
        "policy": MLPSpec(
            widths=[latent_dim, *policy_hidden, action_dim],
            activations=["relu"] * len(policy_hidden),
            output_activation="tanh_scaled",
            output_bounds=tuple(action_bounds),
        ),
    }


class ParamStore:
    """Online parameters, their slow-moving target copy, and LMI multipliers.

    Attributes:
        online: Trainable networks keyed by name
        target: Polyak-averaged copies (never differentiated)
        lmi_free: Free parameters; the multipliers are ``exp(lmi_free)``
        rho: Polyak coefficient
    """

    def __init__(
        self,
        online: Dict[str, MLP],
        target: Dict[str, MLP],
        lmi_free: Tensor,
        rho: float = 0.995,
    ) -> None:
        self.online = online
        self.target = target
        self.lmi_free = lmi_free
        self.rho = rho
        self._validate()

    @classmethod
    def create(
        cls, specs: Dict[str, MLPSpec], rng: np.random.Generator, rho: float = 0.995
    ) -> "ParamStore":
        online = {name: MLP.initialize(specs[name], rng) for name in NETWORK_NAMES}
        target = {name: net.copy(requires_grad=False) for name, net in online.items()}
        n_hidden = sum(specs["barrier"].hidden_widths)
        lmi_free = Tensor(np.zeros(n_hidden), requires_grad=True, name="lmi_free")
        return cls(online, target, lmi_free, rho)

    def _validate(self) -> None:
        missing = set(NETWORK_NAMES) - set(self.online)
        if missing:
            raise DimensionError(f"missing networks: {sorted(missing)}")
        for name in NETWORK_NAMES:
            online_shapes = [p.shape for p in self.online[name].parameters()]
            target_shapes = [p.shape for p in self.target[name].parameters()]
            if online_shapes != target_shapes:
                raise DimensionError(f"target {name} does not mirror the online network")
        if self.lmi_free.shape != (sum(self.specs["barrier"].hidden_widths),):
            raise DimensionError("one LMI multiplier per hidden barrier neuron is required")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"Polyak coefficient must lie in [0, 1), got {self.rho}")

    @property
    def specs(self) -> Dict[str, MLPSpec]:
        return {name: net.spec for name, net in self.online.items()}

    @property
    def latent_dim(self) -> int:
        return self.online["encoder"].spec.output_dim

    def _nets(self, target: bool) -> Dict[str, MLP]:
        return self.target if target else self.online

    def encode(self, frames, target: bool = False) -> Tensor:
        """z = E(O) for a batch of flattened observations."""
        x = frames if isinstance(frames, Tensor) else Tensor(np.atleast_2d(frames))
        return self._nets(target)["encoder"](x)

    def latent_step(self, z: Tensor, action, target: bool = False) -> Tensor:
        """Predicted next latent d(z, a)."""
        a = action if isinstance(action, Tensor) else Tensor(np.asarray(action, dtype=np.float64))
        if a.data.ndim == 1:
            a = F.reshape(a, (a.shape[0], 1))
        return self._nets(target)["dynamics"](F.concat([z, a], axis=1))

    def barrier(self, z: Tensor, target: bool = False) -> Tensor:
        """B(z) as a vector with one entry per latent row."""
        out = self._nets(target)["barrier"](z)
        return F.reshape(out, (out.shape[0],))

    def policy(self, z: Tensor, target: bool = False) -> Tensor:
        return self._nets(target)["policy"](z)

    def lmi_multipliers(self) -> Tensor:
        return F.exp(self.lmi_free)

    def barrier_weights(self) -> List[Tensor]:
        return self.online["barrier"].weights

    def parameters(self, names: Iterable[str] = NETWORK_NAMES) -> List[Tensor]:
        return [p for name in names for p in self.online[name].parameters()]

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()
        self.lmi_free.zero_grad()

    def polyak_update(self, rho: Optional[float] = None) -> None:
        """theta_minus <- rho * theta_minus + (1 - rho) * theta, every network."""
        rho = self.rho if rho is None else rho
        if not 0.0 <= rho < 1.0:
            raise ValueError(f"Polyak coefficient must lie in [0, 1), got {rho}")
        for name in NETWORK_NAMES:
            for slow, fast in zip(
                self.target[name].parameters(), self.online[name].parameters()
            ):
                slow.data = rho * slow.data + (1.0 - rho) * fast.data

    def snapshot(self) -> "ParamStore":
        """Read-only deep copy for concurrent evaluation."""
        online = {name: net.copy(requires_grad=False) for name, net in self.online.items()}
        target = {name: net.copy(requires_grad=False) for name, net in self.target.items()}
        return ParamStore(online, target, Tensor(self.lmi_free.data), self.rho)

    def encode_all(self, frames: np.ndarray, target: bool = False, chunk: int = 1024) -> np.ndarray:
        """Encode a large observation array in chunks, without recording."""
        if len(frames) == 0:
            return np.zeros((0, self.latent_dim))
        with no_grad():
            parts = [
                self.encode(frames[i : i + chunk].astype(np.float64), target).data
                for i in range(0, len(frames), chunk)
            ]
        return np.concatenate(parts, axis=0)

    def evaluate_barrier(self, latents: np.ndarray, target: bool = False) -> np.ndarray:
        with no_grad():
            return self.barrier(Tensor(np.atleast_2d(latents)), target).data

    def evaluate_policy(self, latents: np.ndarray, target: bool = False) -> np.ndarray:
        with no_grad():
            return self.policy(Tensor(np.atleast_2d(latents)), target).data

    def evaluate_step(self, latents: np.ndarray, actions: np.ndarray, target: bool = False) -> np.ndarray:
        with no_grad():
            return self.latent_step(Tensor(np.atleast_2d(latents)), actions, target).data
