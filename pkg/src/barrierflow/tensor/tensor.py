from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .tape import current_tape

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Tensor:
    """Dense float64 array that can take part in reverse-mode differentiation.

    Attributes:
        data: Row-major float64 values
        grad: Gradient accumulator with the shape of ``data`` (leaves only)
        requires_grad: Whether operations on this tensor are recorded
        parents: Tensors this one was computed from (empty for leaves)
        backward_fn: Maps the upstream gradient to one gradient per parent
        name: Optional label used in diagnostics and checkpoints
    """

    __slots__ = ("data", "grad", "requires_grad", "parents", "backward_fn", "name")

    def __init__(
        self,
        data: Union[np.ndarray, Sequence, float],
        requires_grad: bool = False,
        name: Optional[str] = None,
    ) -> None:
        self.data = np.array(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.parents: Tuple["Tensor", ...] = ()
        self.backward_fn: Optional[BackwardFn] = None
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return self.backward_fn is None

    @property
    def T(self) -> "Tensor":
        return F.transpose(self)

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float("nan")

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False, name=self.name)

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, grad: np.ndarray) -> None:
        grad = np.asarray(grad, dtype=np.float64).reshape(self.data.shape)
        self.grad = grad.copy() if self.grad is None else self.grad + grad

    def backward(self) -> None:
        """Differentiate this scalar on the active tape."""
        tape = current_tape()
        if tape is None:
            raise RuntimeError("backward() must run inside the tape that recorded it")
        tape.backward(self)

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<Tensor{label} shape={self.shape} requires_grad={self.requires_grad}>"

    def __add__(self, other) -> "Tensor":
        return F.add(self, other)

    def __radd__(self, other) -> "Tensor":
        return F.add(self, other)

    def __sub__(self, other) -> "Tensor":
        return F.sub(self, other)

    def __rsub__(self, other) -> "Tensor":
        return F.sub(other, self)

    def __mul__(self, other) -> "Tensor":
        return F.mul(self, other)

    def __rmul__(self, other) -> "Tensor":
        return F.mul(self, other)

    def __neg__(self) -> "Tensor":
        return F.neg(self)

    def __matmul__(self, other) -> "Tensor":
        return F.matmul(self, other)

    def sum(self, axis: Optional[int] = None) -> "Tensor":
        return F.sum(self, axis=axis)

    def mean(self) -> "Tensor":
        return F.mean(self)


def as_tensor(value) -> Tensor:
    """Wrap arrays and python scalars as constant tensors."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def make_result(
    data: np.ndarray, parents: Sequence[Tensor], backward_fn: BackwardFn
) -> Tensor:
    """Create an op output and record it when a tape is active.

    Outputs only carry gradients when at least one parent does and a tape
    is listening; otherwise the op is evaluated as a plain constant.
    """
    out = Tensor(data)
    tape = current_tape()
    if tape is None or not any(p.requires_grad for p in parents):
        return out
    out.requires_grad = True
    out.parents = tuple(parents)
    out.backward_fn = backward_fn
    tape.record(out)
    return out


from . import functional as F  # noqa: E402
