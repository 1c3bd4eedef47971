import math

import numpy as np

from barrierflow.envs.labels import Label, label, label_batch, sample_region


def test_pendulum_labels(pendulum_spec):
    assert label(np.array([0.0, 0.0]), pendulum_spec) == Label.SAFE
    assert label(np.array([math.pi, 0.0]), pendulum_spec) == Label.UNSAFE
    assert label(np.array([math.pi / 3, 0.0]), pendulum_spec) == Label.UNLABELED


def test_vehicle_labels(vehicle_spec):
    states = np.array([[0.0, 0.0, 0.0], [1.8, 0.0, 0.0], [1.0, 1.0, 0.0]])
    np.testing.assert_array_equal(
        label_batch(states, vehicle_spec), [Label.UNSAFE, Label.SAFE, Label.UNLABELED]
    )


def test_region_samples_carry_their_label(pendulum_spec, vehicle_spec):
    rng = np.random.default_rng(0)
    for spec in (pendulum_spec, vehicle_spec):
        safe = sample_region("safe", 50, spec, rng)
        unsafe = sample_region("unsafe", 50, spec, rng)
        assert safe.shape == (50, spec.state_dim)
        assert np.all(label_batch(safe, spec) == Label.SAFE)
        assert np.all(label_batch(unsafe, spec) == Label.UNSAFE)


def test_any_region_stays_in_bounds(pendulum_spec):
    states = sample_region("any", 100, pendulum_spec, np.random.default_rng(1))
    assert np.all(states >= np.asarray(pendulum_spec.state_low))
    assert np.all(states <= np.asarray(pendulum_spec.state_high))
