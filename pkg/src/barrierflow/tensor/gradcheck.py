from typing import Callable, Sequence

import numpy as np

from .tape import Tape
from .tensor import Tensor


def numerical_gradient(
    fn: Callable[[], Tensor], tensor: Tensor, step: float = 1e-5
) -> np.ndarray:
    """Central finite differences of a scalar function w.r.t. one tensor."""
    grad = np.zeros(tensor.shape)
    flat = tensor.data.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + step
        upper = fn().item()
        flat[i] = original - step
        lower = fn().item()
        flat[i] = original
        out[i] = (upper - lower) / (2.0 * step)
    return grad


RELATIVE_FLOOR = 1e-5


def max_relative_error(
    analytic: np.ndarray, numeric: np.ndarray, floor: float = RELATIVE_FLOOR
) -> float:
    """Worst |a - n| / (|a| + |n|) entry.

    The denominator is floored at ``floor`` so entries that are zero on both
    sides, or below the finite-difference round-off, do not blow up.
    """
    if analytic.size == 0:
        return 0.0
    scale = np.maximum(floor, np.abs(analytic) + np.abs(numeric))
    return float(np.max(np.abs(analytic - numeric) / scale))


def check_gradients(
    fn: Callable[[], Tensor], tensors: Sequence[Tensor], step: float = 1e-5
) -> float:
    """Worst relative error between tape gradients and finite differences.

    Args:
        fn: Builds the scalar output from ``tensors`` (re-evaluated per probe)
        tensors: Leaves with ``requires_grad=True``
        step: Central difference step

    Returns:
        Maximum relative error over every entry of every tensor
    """
    for tensor in tensors:
        tensor.zero_grad()
    with Tape() as tape:
        out = fn()
        tape.backward(out)

    worst = 0.0
    for tensor in tensors:
        analytic = tensor.grad if tensor.grad is not None else np.zeros(tensor.shape)
        numeric = numerical_gradient(fn, tensor, step)
        worst = max(worst, max_relative_error(analytic, numeric))
    return worst
