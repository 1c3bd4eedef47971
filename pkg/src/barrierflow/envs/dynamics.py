import numpy as np

from ..errors import ActionBoundsError, DimensionError
from .spec import EnvSpec


def wrap_angle(theta):
    """Map angles into [-pi, pi]; angles already inside are returned unchanged."""
    theta = np.asarray(theta, dtype=np.float64)
    inside = (theta >= -np.pi) & (theta <= np.pi)
    return np.where(inside, theta, np.mod(theta + np.pi, 2.0 * np.pi) - np.pi)


def _check_action(action: np.ndarray, spec: EnvSpec) -> np.ndarray:
    action = np.asarray(action, dtype=np.float64).reshape(-1)
    if np.any(~np.isfinite(action)) or np.any(action < spec.action_low) or np.any(
        action > spec.action_high
    ):
        raise ActionBoundsError(
            f"action outside [{spec.action_low}, {spec.action_high}]: "
            f"min {action.min():.6g}, max {action.max():.6g}"
        )
    return action


def _as_batch(state: np.ndarray, spec: EnvSpec):
    state = np.asarray(state, dtype=np.float64)
    single = state.ndim == 1
    batch = np.atleast_2d(state)
    if batch.shape[1] != spec.state_dim:
        raise DimensionError(f"{spec.env_id} states have {spec.state_dim} components")
    return batch, single


def pendulum_step(state: np.ndarray, action, spec: EnvSpec) -> np.ndarray:
    """Explicit Euler step of the torque-driven pendulum.

    theta' = theta + theta_dot * dt
    theta_dot' = theta_dot + (g / l * sin(theta) + u / (m * l^2)) * dt

    The angle is wrapped and the velocity saturated to the state set.
    Accepts a single state (2,) or a batch (n, 2) with one action per row.
    """
    batch, single = _as_batch(state, spec)
    u = _check_action(action, spec)
    theta, theta_dot = batch[:, 0], batch[:, 1]
    accel = spec.gravity / spec.length * np.sin(theta) + u / (spec.mass * spec.length**2)
    new_theta = wrap_angle(theta + theta_dot * spec.dt)
    new_theta_dot = np.clip(theta_dot + accel * spec.dt, spec.state_low[1], spec.state_high[1])
    out = np.stack([new_theta, new_theta_dot], axis=1)
    return out[0] if single else out


def vehicle_step(state: np.ndarray, action, spec: EnvSpec) -> np.ndarray:
    """Constant-speed unicycle step driven by the yaw rate."""
    batch, single = _as_batch(state, spec)
    u = _check_action(action, spec)
    x, y, theta = batch[:, 0], batch[:, 1], batch[:, 2]
    out = np.stack(
        [
            x + spec.speed * np.cos(theta) * spec.dt,
            y + spec.speed * np.sin(theta) * spec.dt,
            wrap_angle(theta + u * spec.dt),
        ],
        axis=1,
    )
    return out[0] if single else out


def step(state: np.ndarray, action, spec: EnvSpec) -> np.ndarray:
    if spec.env_id == "pendulum":
        return pendulum_step(state, action, spec)
    return vehicle_step(state, action, spec)


def previous_state(state: np.ndarray, spec: EnvSpec) -> np.ndarray:
    """Zero-input backward extrapolation of the kinematic part of a state.

    Used to render the earlier frame of an observation for states sampled
    directly from a region: the frame pair then encodes the velocity
    (pendulum) or heading of travel (vehicle).
    """
    batch, single = _as_batch(state, spec)
    if spec.env_id == "pendulum":
        out = np.stack([wrap_angle(batch[:, 0] - batch[:, 1] * spec.dt), batch[:, 1]], axis=1)
    else:
        theta = batch[:, 2]
        out = np.stack(
            [
                batch[:, 0] - spec.speed * np.cos(theta) * spec.dt,
                batch[:, 1] - spec.speed * np.sin(theta) * spec.dt,
                theta,
            ],
            axis=1,
        )
    return out[0] if single else out
