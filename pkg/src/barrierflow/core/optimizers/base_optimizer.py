from abc import ABC, abstractmethod
from typing import Dict, List

import numpy as np

from ...tensor import Tensor


class BaseOptimizer(ABC):
    """First-order optimizer over a fixed list of leaf tensors.

    Attributes:
        params: Tensors updated in place by :meth:`step`
        lr: Current step size (may be changed between steps)
    """

    def __init__(self, params: List[Tensor], lr: float) -> None:
        if lr <= 0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        if not all(p.requires_grad for p in params):
            raise ValueError("every optimized tensor must require gradients")
        self.params = list(params)
        self.lr = lr

    @abstractmethod
    def step(self) -> None:
        """Apply one update from the gradients accumulated on ``params``."""

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def gradients(self) -> List[np.ndarray]:
        """Accumulated gradients; tensors that received none count as zero."""
        return [p.grad if p.grad is not None else np.zeros(p.shape) for p in self.params]

    def state_arrays(self, prefix: str) -> Dict[str, np.ndarray]:
        """Optimizer state as named arrays for checkpoints."""
        return {}

    def load_state_arrays(self, arrays: Dict[str, np.ndarray], prefix: str) -> None:
        """Restore state written by :meth:`state_arrays`."""
