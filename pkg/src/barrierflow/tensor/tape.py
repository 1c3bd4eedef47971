import logging
from contextlib import contextmanager
from contextvars import ContextVar
from typing import TYPE_CHECKING, Dict, Generator, List, Optional

import networkx as nx
import numpy as np

from ..errors import DimensionError

if TYPE_CHECKING:
    from .tensor import Tensor

logger = logging.getLogger(__name__)

_ACTIVE_TAPE: ContextVar[Optional["Tape"]] = ContextVar(
    "barrierflow_active_tape", default=None
)


def current_tape() -> Optional["Tape"]:
    """Return the tape operations are currently recorded on, if any."""
    return _ACTIVE_TAPE.get()


class Tape:
    """Ordered record of primitive operations for reverse-mode differentiation.

    Every recorded tensor becomes a node of a directed graph whose edges
    point from parents to the tensor computed from them. Recording order is
    a topological order, so the backward pass walks the record in reverse
    and only visits nodes that are ancestors of the differentiated output.

    Tapes are independent: separate tapes may record concurrently because
    each binds itself through a context variable.

    Attributes:
        graph: Parent -> child dependency graph keyed by tensor identity
        nodes: Recorded (non-leaf) tensors in recording order
    """

    def __init__(self) -> None:
        self.graph = nx.DiGraph()
        self.nodes: List["Tensor"] = []
        self._token = None

    def __enter__(self) -> "Tape":
        self._token = _ACTIVE_TAPE.set(self)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        _ACTIVE_TAPE.reset(self._token)
        self._token = None

    def record(self, output: "Tensor") -> None:
        key = id(output)
        self.graph.add_node(key, tensor=output)
        for parent in output.parents:
            if not parent.requires_grad:
                continue
            parent_key = id(parent)
            if parent_key not in self.graph:
                self.graph.add_node(parent_key, tensor=parent)
            self.graph.add_edge(parent_key, key)
        self.nodes.append(output)

    def backward(self, output: "Tensor", seed: Optional[np.ndarray] = None) -> None:
        """Accumulate d(output)/d(leaf) into every reachable leaf's ``grad``.

        Args:
            output: Scalar tensor recorded on this tape
            seed: Upstream gradient; defaults to ones (requires scalar output)

        Raises:
            DimensionError: If no seed is given for a non-scalar output
        """
        if seed is None:
            if output.data.size != 1:
                raise DimensionError(
                    f"backward needs a scalar output, got shape {output.shape}"
                )
            seed = np.ones_like(output.data)

        key = id(output)
        if key not in self.graph:
            logger.debug("Output carries no gradient; backward is a no-op")
            return

        relevant = nx.ancestors(self.graph, key)
        relevant.add(key)
        grads: Dict[int, np.ndarray] = {key: np.asarray(seed, dtype=np.float64)}

        for node in reversed(self.nodes):
            node_key = id(node)
            if node_key not in relevant or node_key not in grads:
                continue
            upstream = grads.pop(node_key)
            parent_grads = node.backward_fn(upstream)
            for parent, grad in zip(node.parents, parent_grads):
                if grad is None or not parent.requires_grad:
                    continue
                parent_key = id(parent)
                if parent_key in grads:
                    grads[parent_key] = grads[parent_key] + grad
                else:
                    grads[parent_key] = grad

        # whatever is left belongs to leaves (parameters and inputs)
        for leaf_key, grad in grads.items():
            leaf = self.graph.nodes[leaf_key]["tensor"]
            leaf.accumulate_grad(grad)


@contextmanager
def no_grad() -> Generator[None, None, None]:
    """Evaluate without recording, even inside an active tape."""
    token = _ACTIVE_TAPE.set(None)
    try:
        yield
    finally:
        _ACTIVE_TAPE.reset(token)
