import numpy as np
import pytest

from barrierflow.core.optimizers.adam import Adam, AdamState, optimizer_step
from barrierflow.errors import CheckpointError, DimensionError, DivergenceError
from barrierflow.tensor import Tape, Tensor
from barrierflow.tensor import functional as F


def test_zero_gradient_leaves_parameters():
    params = [np.array([1.0, -2.0])]
    updated = optimizer_step(params, [np.zeros(2)], 0.1, AdamState())
    np.testing.assert_array_equal(updated[0], params[0])


def test_first_step_moves_by_lr_times_sign():
    updated = optimizer_step([np.zeros(3)], [np.array([0.5, -3.0, 1e-3])], 0.01, AdamState())
    np.testing.assert_allclose(updated[0], [-0.01, 0.01, -0.01], rtol=1e-4)


def test_shape_and_finiteness_checks():
    with pytest.raises(DimensionError):
        optimizer_step([np.zeros(2)], [np.zeros(3)], 0.1, AdamState())
    with pytest.raises(DivergenceError):
        optimizer_step([np.zeros(2)], [np.array([np.nan, 0.0])], 0.1, AdamState())


def test_quadratic_bowl_converges():
    w = Tensor([1.0, -1.0], requires_grad=True)
    optimizer = Adam([w], lr=0.05)
    for _ in range(500):
        optimizer.zero_grad()
        with Tape() as tape:
            tape.backward(F.sum(F.square(w)))
        optimizer.step()
    assert np.all(np.abs(w.data) < 1e-3)


def test_state_round_trip():
    w = Tensor(np.ones((2, 2)), requires_grad=True)
    optimizer = Adam([w], lr=0.1)
    w.grad = np.full((2, 2), 0.5)
    optimizer.step()
    arrays = optimizer.state_arrays("adam")
    assert set(arrays) == {"adam.step", "adam.m.0", "adam.v.0"}

    restored = Adam([Tensor(np.ones((2, 2)), requires_grad=True)], lr=0.1)
    restored.load_state_arrays(arrays, "adam")
    assert restored.state.step == 1
    np.testing.assert_array_equal(restored.state.first[0], optimizer.state.first[0])
    with pytest.raises(CheckpointError):
        restored.load_state_arrays({}, "adam")


def test_parameters_must_be_trainable():
    with pytest.raises(ValueError):
        Adam([Tensor([1.0])])
    with pytest.raises(ValueError):
        Adam([Tensor([1.0], requires_grad=True)], lr=0.0)
