"""Differentiable primitives.

Elementwise binary ops accept operands of identical shape or a scalar
(python number or single-element tensor) on either side. The only other
broadcast is the row-wise bias of :func:`linear`.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import DimensionError
from .tensor import Tensor, as_tensor, make_result


def _reduce_to(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    # scalar operand broadcast against a full array
    return np.full(shape, grad.sum())


def _check_elementwise(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape == b.shape or a.size == 1 or b.size == 1:
        return
    raise DimensionError(f"{op}: shapes {a.shape} and {b.shape} do not agree")


def _out_shape(a: Tensor, b: Tensor) -> Tuple[int, ...]:
    if a.shape == b.shape:
        return a.shape
    return a.shape if b.size == 1 else b.shape


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_elementwise(a, b, "add")
    shape = _out_shape(a, b)
    data = (a.data + b.data).reshape(shape)

    def backward(g):
        return _reduce_to(g, a.shape), _reduce_to(g, b.shape)

    return make_result(data, (a, b), backward)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_elementwise(a, b, "sub")
    shape = _out_shape(a, b)
    data = (a.data - b.data).reshape(shape)

    def backward(g):
        return _reduce_to(g, a.shape), _reduce_to(-g, b.shape)

    return make_result(data, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_elementwise(a, b, "mul")
    shape = _out_shape(a, b)
    data = (a.data * b.data).reshape(shape)

    def backward(g):
        return _reduce_to(g * b.data, a.shape), _reduce_to(g * a.data, b.shape)

    return make_result(data, (a, b), backward)


def neg(x: Tensor) -> Tensor:
    return make_result(-x.data, (x,), lambda g: (-g,))


def scale(x: Tensor, factor: float) -> Tensor:
    factor = float(factor)
    return make_result(x.data * factor, (x,), lambda g: (g * factor,))


def square(x: Tensor) -> Tensor:
    return make_result(x.data * x.data, (x,), lambda g: (2.0 * x.data * g,))


def exp(x: Tensor) -> Tensor:
    data = np.exp(x.data)
    return make_result(data, (x,), lambda g: (g * data,))


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0.0
    return make_result(np.where(mask, x.data, 0.0), (x,), lambda g: (g * mask,))


def hinge(x: Tensor) -> Tensor:
    """max(0, x) with subgradient 0 at x = 0."""
    return relu(x)


def tanh(x: Tensor) -> Tensor:
    data = np.tanh(x.data)
    return make_result(data, (x,), lambda g: (g * (1.0 - data * data),))


def sum(x: Tensor, axis: Optional[int] = None) -> Tensor:
    if axis is None:
        data = np.array(x.data.sum())

        def backward(g):
            return (np.full(x.shape, float(g)),)

    else:
        data = x.data.sum(axis=axis)

        def backward(g):
            return (np.broadcast_to(np.expand_dims(g, axis), x.shape).copy(),)

    return make_result(data, (x,), backward)


def mean(x: Tensor) -> Tensor:
    if x.size == 0:
        return Tensor(0.0)
    return scale(sum(x), 1.0 / x.size)


def l2norm(x: Tensor) -> Tensor:
    """Euclidean norm of all entries; gradient 0 at the origin."""
    norm = float(np.sqrt(np.sum(x.data * x.data)))

    def backward(g):
        if norm == 0.0:
            return (np.zeros(x.shape),)
        return (float(g) * x.data / norm,)

    return make_result(np.array(norm), (x,), backward)


def row_norm(x: Tensor) -> Tensor:
    """Euclidean norm of each row of an (n, d) tensor."""
    if x.data.ndim != 2:
        raise DimensionError(f"row_norm expects a matrix, got shape {x.shape}")
    norms = np.sqrt(np.sum(x.data * x.data, axis=1))

    def backward(g):
        safe = np.where(norms > 0.0, norms, 1.0)
        ratio = np.where(norms[:, None] > 0.0, x.data / safe[:, None], 0.0)
        return (g[:, None] * ratio,)

    return make_result(norms, (x,), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    data = a.data @ b.data

    def backward(g):
        return g @ b.data.T, a.data.T @ g

    return make_result(data, (a, b), backward)


def transpose(x: Tensor) -> Tensor:
    if x.data.ndim != 2:
        raise DimensionError(f"transpose expects a matrix, got shape {x.shape}")
    return make_result(x.data.T.copy(), (x,), lambda g: (g.T,))


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    shape = tuple(shape)
    return make_result(x.data.reshape(shape), (x,), lambda g: (g.reshape(x.shape),))


def linear(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Affine layer ``x @ weight.T + bias`` over a batch of rows."""
    x = as_tensor(x)
    if x.data.ndim != 2 or x.shape[1] != weight.shape[1]:
        raise DimensionError(
            f"linear: input {x.shape} does not match weight {weight.shape}"
        )
    if bias.shape != (weight.shape[0],):
        raise DimensionError(f"linear: bias {bias.shape} vs weight {weight.shape}")
    data = x.data @ weight.data.T + bias.data

    def backward(g):
        return g @ weight.data, g.T @ x.data, g.sum(axis=0)

    return make_result(data, (x, weight, bias), backward)


def concat(tensors: Sequence[Tensor], axis: int = 1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    try:
        data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as exc:
        raise DimensionError(f"concat: {exc}") from exc
    bounds = np.cumsum([0] + [t.shape[axis] for t in tensors])

    def backward(g):
        grads: List[np.ndarray] = []
        for start, stop in zip(bounds[:-1], bounds[1:]):
            index = [slice(None)] * g.ndim
            index[axis] = slice(start, stop)
            grads.append(g[tuple(index)])
        return grads

    return make_result(data, tensors, backward)


def gather_rows(x: Tensor, rows: np.ndarray) -> Tensor:
    rows = np.asarray(rows, dtype=np.int64)

    def backward(g):
        grad = np.zeros(x.shape)
        np.add.at(grad, rows, g)
        return (grad,)

    return make_result(x.data[rows], (x,), backward)


def diag(v: Tensor) -> Tensor:
    """Square diagonal matrix from a vector."""
    if v.data.ndim != 1:
        raise DimensionError(f"diag expects a vector, got shape {v.shape}")
    return make_result(np.diag(v.data), (v,), lambda g: (np.diag(g).copy(),))


def embed(x: Tensor, shape: Tuple[int, int], row: int, col: int) -> Tensor:
    """Place a matrix block into a zero matrix of the given shape."""
    rows, cols = x.shape
    if row < 0 or col < 0 or row + rows > shape[0] or col + cols > shape[1]:
        raise DimensionError(
            f"embed: block {x.shape} at ({row}, {col}) exceeds {tuple(shape)}"
        )
    data = np.zeros(shape)
    data[row : row + rows, col : col + cols] = x.data

    def backward(g):
        return (g[row : row + rows, col : col + cols],)

    return make_result(data, (x,), backward)


def symmetrize(m: Tensor) -> Tensor:
    """(M + M^T) / 2."""
    return scale(add(m, transpose(m)), 0.5)
