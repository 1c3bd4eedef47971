import numpy as np
import pytest

from barrierflow.envs.buffer import TransitionBatch
from barrierflow.losses.salad import consistency_term, safe_term, salad_loss, unsafe_term
from barrierflow.losses.weights import LossWeights
from barrierflow.tensor import Tape
from barrierflow.tensor.gradcheck import check_gradients

from tests.helpers import make_constant


def empty_batch(observation_dim: int) -> TransitionBatch:
    return TransitionBatch(
        observations=np.zeros((0, observation_dim)),
        actions=np.zeros((0, 1)),
        next_observations=np.zeros((0, observation_dim)),
        labels=np.zeros(0, dtype=np.int8),
        states=np.zeros((0, 2)),
    )


@pytest.fixture
def frames(pendulum_spec):
    return np.random.default_rng(0).random((1, pendulum_spec.observation_dim))


def test_satisfied_safe_sample_contributes_nothing(params, frames):
    psi = 0.2
    make_constant(params.online["barrier"], -psi - 1.0)
    assert safe_term(params, frames, psi).item() == 0.0


def test_safe_sample_on_boundary_contributes_margin(params, frames):
    make_constant(params.online["barrier"], 0.0)
    assert safe_term(params, frames, 0.2).item() == pytest.approx(0.2)


def test_unsafe_term_penalizes_low_barrier(params, frames):
    make_constant(params.online["barrier"], -0.5)
    assert unsafe_term(params, frames, 0.1).item() == pytest.approx(0.6)


def test_perfect_prediction_has_zero_consistency(params, buffer):
    latent = np.array([0.3, -0.1])
    for role in ("online", "target"):
        make_constant(getattr(params, role)["encoder"], 0.0)
        getattr(params, role)["encoder"].biases[-1].data = latent.copy()
    make_constant(params.online["dynamics"], 0.0)
    params.online["dynamics"].biases[-1].data = latent.copy()
    assert consistency_term(params, buffer.batch(buffer.all_indices)).item() == 0.0


def test_weights_scale_terms(params, buffer, pendulum_spec):
    make_constant(params.online["barrier"], 0.0)
    safe = buffer.observations[buffer.safe_indices].astype(np.float64)
    unsafe = buffer.observations[buffer.unsafe_indices].astype(np.float64)
    batch = empty_batch(pendulum_spec.observation_dim)
    terms = salad_loss(params, safe, unsafe, batch, 0.1, LossWeights(xi1=2.0, xi2=3.0))
    assert terms.safe.item() == pytest.approx(0.1 * len(safe))
    assert terms.unsafe.item() == pytest.approx(0.1 * len(unsafe))
    assert terms.total.item() == pytest.approx(2.0 * terms.safe.item() + 3.0 * terms.unsafe.item())


def test_empty_batches_give_zero(params, pendulum_spec, caplog):
    nothing = np.zeros((0, pendulum_spec.observation_dim))
    terms = salad_loss(params, nothing, nothing, empty_batch(pendulum_spec.observation_dim), 0.0)
    assert terms.total.item() == 0.0
    assert "Empty batch" in caplog.text


def test_negative_psi_rejected(params, pendulum_spec):
    nothing = np.zeros((0, pendulum_spec.observation_dim))
    with pytest.raises(ValueError):
        salad_loss(params, nothing, nothing, empty_batch(pendulum_spec.observation_dim), -0.1)


def test_loss_is_nonnegative_and_differentiable(params, buffer):
    safe = buffer.observations[buffer.safe_indices].astype(np.float64)
    unsafe = buffer.observations[buffer.unsafe_indices].astype(np.float64)
    batch = buffer.batch(buffer.all_indices[:8])
    with Tape() as tape:
        terms = salad_loss(params, safe, unsafe, batch, 0.05)
        tape.backward(terms.total)
    assert terms.total.item() >= 0.0
    assert params.online["encoder"].weights[0].grad is not None
    assert params.target["encoder"].weights[0].grad is None


def test_gradients_match_finite_differences(params, buffer):
    safe = buffer.observations[buffer.safe_indices[:3]].astype(np.float64)
    unsafe = buffer.observations[buffer.unsafe_indices[:3]].astype(np.float64)
    batch = buffer.batch(buffer.all_indices[:4])
    tensors = [
        params.online["encoder"].weights[-1],
        *params.online["dynamics"].parameters(),
        *params.online["barrier"].parameters(),
    ]
    error = check_gradients(lambda: salad_loss(params, safe, unsafe, batch, 0.05).total, tensors)
    assert error < 1e-4
