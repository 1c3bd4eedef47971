import numpy as np

from barrierflow.nets.param_store import NETWORK_NAMES
from barrierflow.train.warm_start import initial_params, warm_start

from tests.helpers import tiny_config


def test_target_moves_away_from_initialization():
    config = tiny_config(warm_start_epochs=2)
    initial = initial_params(config)
    result = warm_start(config)
    assert len(result.epoch_losses) == 2
    moved = [
        not np.array_equal(a.data, b.data)
        for name in NETWORK_NAMES
        for a, b in zip(initial.target[name].parameters(), result.params.target[name].parameters())
    ]
    assert any(moved)
    assert result.margins.sound
    assert result.optimizer.state.step > 0


def test_seeded_warm_start_is_reproducible():
    config = tiny_config()
    first, second = warm_start(config), warm_start(config)
    assert first.epoch_losses == second.epoch_losses
    for a, b in zip(first.params.parameters(), second.params.parameters()):
        np.testing.assert_array_equal(a.data, b.data)
    np.testing.assert_array_equal(first.buffer.observations, second.buffer.observations)
