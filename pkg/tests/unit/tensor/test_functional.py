import numpy as np
import pytest

from barrierflow.errors import DimensionError
from barrierflow.tensor import Tape, Tensor, no_grad
from barrierflow.tensor import functional as F
from barrierflow.tensor.gradcheck import check_gradients


def test_matmul_identity_and_hand_product():
    m = Tensor([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(F.matmul(Tensor(np.eye(2)), m).data, m.data)
    assert F.matmul(Tensor([[1.0, 2.0]]), Tensor([[3.0], [4.0]])).data.tolist() == [[11.0]]


def test_matmul_shape_mismatch():
    with pytest.raises(DimensionError):
        F.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


def test_elementwise_shape_mismatch():
    with pytest.raises(DimensionError):
        F.add(Tensor(np.ones(3)), Tensor(np.ones(2)))


def test_hinge_and_norm_values():
    assert F.hinge(Tensor(-0.3)).item() == 0.0
    assert F.hinge(Tensor(0.2)).item() == pytest.approx(0.2)
    assert F.l2norm(Tensor([3.0, 4.0])).item() == pytest.approx(5.0)
    np.testing.assert_allclose(F.row_norm(Tensor([[3.0, 4.0], [0.0, 0.0]])).data, [5.0, 0.0])


def test_embed_places_block():
    block = Tensor([[1.0, 2.0]])
    out = F.embed(block, (3, 4), 1, 2)
    expected = np.zeros((3, 4))
    expected[1, 2:] = [1.0, 2.0]
    np.testing.assert_array_equal(out.data, expected)
    with pytest.raises(DimensionError):
        F.embed(block, (1, 2), 1, 0)


def test_no_record_without_tape():
    x = Tensor([1.0, 2.0], requires_grad=True)
    out = F.sum(F.square(x))
    assert out.is_leaf
    assert not out.requires_grad


def test_backward_accumulates_into_leaves():
    x = Tensor([1.0, -2.0], requires_grad=True)
    with Tape() as tape:
        out = F.sum(F.mul(x, x))
        tape.backward(out)
    np.testing.assert_allclose(x.grad, [2.0, -4.0])


def test_no_grad_inside_tape():
    x = Tensor([1.0], requires_grad=True)
    with Tape() as tape:
        with no_grad():
            out = F.sum(F.square(x))
        tape.backward(out)
    assert x.grad is None


def test_backward_needs_scalar():
    x = Tensor([1.0, 2.0], requires_grad=True)
    with Tape() as tape:
        out = F.scale(x, 2.0)
        with pytest.raises(DimensionError):
            tape.backward(out)


@pytest.mark.parametrize(
    "build",
    [
        lambda x, w, b: F.sum(F.tanh(F.linear(x, w, b))),
        lambda x, w, b: F.mean(F.row_norm(F.linear(x, w, b))),
        lambda x, w, b: F.sum(F.exp(F.scale(F.matmul(x, F.transpose(w)), 0.1))),
        lambda x, w, b: F.sum(F.square(F.concat([F.linear(x, w, b), x], axis=1))),
        lambda x, w, b: F.sum(F.gather_rows(F.linear(x, w, b), np.array([0, 0, 2]))),
    ],
)
def test_gradients_match_finite_differences(build):
    rng = np.random.default_rng(0)
    x = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
    w = Tensor(rng.normal(size=(2, 4)), requires_grad=True)
    b = Tensor(rng.normal(size=2), requires_grad=True)
    assert check_gradients(lambda: build(x, w, b), [x, w, b]) < 1e-4
