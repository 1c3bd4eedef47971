import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ...errors import CheckpointError, DimensionError, DivergenceError
from ...tensor import Tensor
from .base_optimizer import BaseOptimizer

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """Step count and first/second moment estimates, one pair per parameter."""

    step: int = 0
    first: List[np.ndarray] = field(default_factory=list)
    second: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def zeros_like(cls, params: Sequence[np.ndarray]) -> "AdamState":
        return cls(
            step=0,
            first=[np.zeros(np.shape(p)) for p in params],
            second=[np.zeros(np.shape(p)) for p in params],
        )


def optimizer_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    lr: float,
    state: AdamState,
    betas: Tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
) -> List[np.ndarray]:
    """One bias-corrected adaptive moment update.

    ``state`` is advanced in place; the updated parameters are returned as
    new arrays.

    Raises:
        DimensionError: If a gradient's shape differs from its parameter's
        DivergenceError: If any gradient is not finite
    """
    if len(params) != len(grads):
        raise DimensionError(f"{len(params)} parameters but {len(grads)} gradients")
    for index, (param, grad) in enumerate(zip(params, grads)):
        if np.shape(param) != np.shape(grad):
            raise DimensionError(
                f"gradient {index} has shape {np.shape(grad)}, parameter {np.shape(param)}"
            )
        if not np.all(np.isfinite(grad)):
            logger.error("Non-finite gradient for parameter %d", index)
            raise DivergenceError(f"gradient {index} is not finite")
    if not state.first:
        fresh = AdamState.zeros_like(params)
        state.first, state.second = fresh.first, fresh.second

    beta1, beta2 = betas
    state.step += 1
    correction1 = 1.0 - beta1**state.step
    correction2 = 1.0 - beta2**state.step
    updated = []
    for index, (param, grad) in enumerate(zip(params, grads)):
        state.first[index] = beta1 * state.first[index] + (1.0 - beta1) * grad
        state.second[index] = beta2 * state.second[index] + (1.0 - beta2) * grad * grad
        m_hat = state.first[index] / correction1
        v_hat = state.second[index] / correction2
        updated.append(param - lr * m_hat / (np.sqrt(v_hat) + eps))
    return updated


class Adam(BaseOptimizer):
    """Adaptive moment estimation over leaf tensors."""

    def __init__(
        self,
        params: List[Tensor],
        lr: float = 1e-3,
        betas: Tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ) -> None:
        super().__init__(params, lr)
        self.betas = tuple(betas)
        self.eps = eps
        self.state = AdamState.zeros_like([p.data for p in self.params])

    def step(self) -> None:
        updated = optimizer_step(
            [p.data for p in self.params],
            self.gradients(),
            self.lr,
            self.state,
            self.betas,
            self.eps,
        )
        for param, values in zip(self.params, updated):
            param.data = values

    def state_arrays(self, prefix: str) -> Dict[str, np.ndarray]:
        arrays = {f"{prefix}.step": np.array(float(self.state.step))}
        for index, (first, second) in enumerate(zip(self.state.first, self.state.second)):
            arrays[f"{prefix}.m.{index}"] = first
            arrays[f"{prefix}.v.{index}"] = second
        return arrays

    def load_state_arrays(self, arrays: Dict[str, np.ndarray], prefix: str) -> None:
        try:
            step = int(arrays[f"{prefix}.step"])
            first = [arrays[f"{prefix}.m.{i}"] for i in range(len(self.params))]
            second = [arrays[f"{prefix}.v.{i}"] for i in range(len(self.params))]
        except KeyError as exc:
            raise CheckpointError(f"optimizer state {prefix!r} is incomplete: missing {exc}") from exc
        for param, m in zip(self.params, first):
            if m.shape != param.shape:
                raise CheckpointError(f"optimizer state {prefix!r} does not match the parameters")
        self.state = AdamState(step=step, first=[m.copy() for m in first], second=[v.copy() for v in second])
