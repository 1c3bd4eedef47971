from .tape import Tape, current_tape, no_grad
from .tensor import Tensor, as_tensor
from .linalg import logdet

__all__ = ["Tape", "Tensor", "as_tensor", "current_tape", "logdet", "no_grad"]
