import math

import numpy as np
import pytest

from barrierflow.envs.dynamics import previous_state, step, wrap_angle
from barrierflow.errors import ActionBoundsError, DimensionError


def test_pendulum_equilibrium(pendulum_spec):
    np.testing.assert_array_equal(step(np.zeros(2), 0.0, pendulum_spec), [0.0, 0.0])


def test_pendulum_falls_under_gravity(pendulum_spec):
    out = step(np.array([math.pi / 6, 0.0]), 0.0, pendulum_spec)
    np.testing.assert_allclose(out, [0.5236, 0.25], atol=1e-4)


def test_pendulum_integrates_velocity(pendulum_spec):
    np.testing.assert_allclose(step(np.array([0.0, 1.0]), 0.0, pendulum_spec), [0.05, 1.0])


def test_pendulum_batch_matches_single(pendulum_spec):
    states = np.array([[0.1, 0.2], [-0.4, 1.0]])
    actions = np.array([1.0, -2.0])
    batch = step(states, actions, pendulum_spec)
    for i in range(2):
        np.testing.assert_array_equal(batch[i], step(states[i], actions[i], pendulum_spec))


def test_vehicle_moves_along_heading(vehicle_spec):
    np.testing.assert_allclose(step(np.zeros(3), 0.0, vehicle_spec), [0.05, 0.0, 0.0])
    out = step(np.array([0.0, 0.0, math.pi / 2]), 0.0, vehicle_spec)
    np.testing.assert_allclose(out, [0.0, 0.05, math.pi / 2], atol=1e-12)


def test_action_bounds_enforced(pendulum_spec):
    with pytest.raises(ActionBoundsError):
        step(np.zeros(2), 10.5, pendulum_spec)
    with pytest.raises(ActionBoundsError):
        step(np.zeros(2), float("nan"), pendulum_spec)


def test_state_width_checked(pendulum_spec):
    with pytest.raises(DimensionError):
        step(np.zeros(3), 0.0, pendulum_spec)


def test_wrap_angle():
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


def test_previous_state_inverts_zero_input_motion(vehicle_spec):
    state = np.array([0.3, -0.2, 0.7])
    np.testing.assert_allclose(step(previous_state(state, vehicle_spec), 0.0, vehicle_spec), state)


def euler_pendulum(theta, theta_dot, u, spec):
    accel = spec.gravity / spec.length * math.sin(theta) + u / (spec.mass * spec.length**2)
    new_theta_dot = min(max(theta_dot + spec.dt * accel, spec.state_low[1]), spec.state_high[1])
    return [math.remainder(theta + spec.dt * theta_dot, 2 * math.pi), new_theta_dot]


def euler_vehicle(x, y, theta, u, spec):
    return [
        x + spec.dt * spec.speed * math.cos(theta),
        y + spec.dt * spec.speed * math.sin(theta),
        math.remainder(theta + spec.dt * u, 2 * math.pi),
    ]


@pytest.mark.parametrize("env", ["pendulum", "vehicle"])
def test_batch_step_matches_closed_form_euler(env, pendulum_spec, vehicle_spec):
    spec = pendulum_spec if env == "pendulum" else vehicle_spec
    oracle = euler_pendulum if env == "pendulum" else euler_vehicle
    rng = np.random.default_rng(42)
    states = rng.uniform(spec.state_low, spec.state_high, (10_000, spec.state_dim))
    actions = rng.uniform(spec.action_low, spec.action_high, 10_000)

    expected = np.array([oracle(*s, u, spec) for s, u in zip(states.tolist(), actions.tolist())])
    np.testing.assert_allclose(step(states, actions, spec), expected, rtol=0.0, atol=1e-12)
