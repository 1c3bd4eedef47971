import numpy as np

from barrierflow.tensor import Tape, Tensor, current_tape
from barrierflow.tensor import functional as F


def test_tape_is_bound_only_inside_context():
    assert current_tape() is None
    with Tape() as tape:
        assert current_tape() is tape
    assert current_tape() is None


def test_backward_of_unrecorded_output_is_noop():
    x = Tensor([1.0], requires_grad=True)
    with Tape() as tape:
        tape.backward(Tensor(3.0))
    assert x.grad is None


def test_shared_subexpression_gradients_add_up():
    x = Tensor([2.0], requires_grad=True)
    with Tape() as tape:
        y = F.square(x)
        out = F.sum(F.add(y, y))
        tape.backward(out)
    np.testing.assert_allclose(x.grad, [8.0])


def test_graph_records_parent_edges():
    x = Tensor([1.0, 2.0], requires_grad=True)
    with Tape() as tape:
        y = F.scale(x, 3.0)
        F.sum(y)
    assert tape.graph.has_edge(id(x), id(y))
    assert len(tape.nodes) == 2
