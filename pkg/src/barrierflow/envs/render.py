"""Deterministic software rasterizer for visuomotor observations.

Frames are row-major (channel, row, column) arrays with values in [0, 1];
an observation stacks the frame of the previous state before the frame of
the current state.
"""

from functools import lru_cache
from typing import List, Tuple

import numpy as np

from .spec import EnvSpec

PENDULUM_EXTENT = 1.25
PENDULUM_ROD_HALF_WIDTH = 0.1
VEHICLE_EXTENT = 2.2
OBSTACLE_HALF_SIDE = 0.7
ROBOT_RADIUS = 0.15
HEADING_LENGTH = 0.35
HEADING_HALF_WIDTH = 0.05

# (gray level, rgb colour) per drawn object
_ROD = (1.0, (0.9, 0.3, 0.2))
_OBSTACLE = (0.4, (0.8, 0.2, 0.2))
_ROBOT = (1.0, (0.2, 0.4, 0.9))
_HEADING = (0.7, (1.0, 1.0, 1.0))

_CHUNK = 256


@lru_cache(maxsize=16)
def _pixel_centers(size: int, extent: float) -> np.ndarray:
    """World (x, y) of every pixel centre, rows running top to bottom."""
    step = 2.0 * extent / size
    coords = -extent + (np.arange(size) + 0.5) * step
    gx, gy = np.meshgrid(coords, coords[::-1])
    centers = np.stack([gx.ravel(), gy.ravel()], axis=1)
    centers.setflags(write=False)
    return centers


def _coverage(distance: np.ndarray, half_width: float, pixel: float) -> np.ndarray:
    return np.clip((half_width - distance) / pixel + 0.5, 0.0, 1.0)


def _segment(centers: np.ndarray, start: np.ndarray, end: np.ndarray,
             half_width: float, pixel: float) -> np.ndarray:
    direction = end - start
    length2 = np.maximum(np.sum(direction * direction, axis=1), 1e-12)
    offset = centers[None, :, :] - start[:, None, :]
    t = np.clip(np.einsum("npk,nk->np", offset, direction) / length2[:, None], 0.0, 1.0)
    nearest = start[:, None, :] + t[:, :, None] * direction[:, None, :]
    distance = np.linalg.norm(centers[None, :, :] - nearest, axis=2)
    return _coverage(distance, half_width, pixel)


def _disk(centers: np.ndarray, center: np.ndarray, radius: float, pixel: float) -> np.ndarray:
    distance = np.linalg.norm(centers[None, :, :] - center[:, None, :], axis=2)
    return _coverage(distance, radius, pixel)


def _compose(layers: List[Tuple[np.ndarray, Tuple[float, Tuple[float, ...]]]],
             spec: EnvSpec) -> np.ndarray:
    """Max-composite coverage layers into (n, channels * pixels) frames."""
    n, pixels = layers[0][0].shape
    if spec.channels == "gray":
        frame = np.zeros((n, pixels))
        for coverage, (level, _) in layers:
            frame = np.maximum(frame, coverage * level)
        return frame
    frame = np.zeros((n, 3, pixels))
    for coverage, (_, colour) in layers:
        frame = np.maximum(frame, coverage[:, None, :] * np.asarray(colour)[None, :, None])
    return frame.reshape(n, 3 * pixels)


def _pendulum_frames(states: np.ndarray, spec: EnvSpec) -> np.ndarray:
    centers = _pixel_centers(spec.frame_size, PENDULUM_EXTENT)
    pixel = 2.0 * PENDULUM_EXTENT / spec.frame_size
    theta = states[:, 0]
    pivot = np.zeros((len(states), 2))
    tip = np.stack([np.sin(theta), np.cos(theta)], axis=1)
    rod = _segment(centers, pivot, tip, PENDULUM_ROD_HALF_WIDTH, pixel)
    return _compose([(rod, _ROD)], spec)


def _vehicle_frames(states: np.ndarray, spec: EnvSpec) -> np.ndarray:
    centers = _pixel_centers(spec.frame_size, VEHICLE_EXTENT)
    pixel = 2.0 * VEHICLE_EXTENT / spec.frame_size
    inside = np.all(np.abs(centers) <= OBSTACLE_HALF_SIDE, axis=1).astype(np.float64)
    obstacle = np.broadcast_to(inside, (len(states), len(centers)))
    position = states[:, :2]
    heading = np.stack([np.cos(states[:, 2]), np.sin(states[:, 2])], axis=1)
    robot = _disk(centers, position, ROBOT_RADIUS, pixel)
    marker = _segment(centers, position, position + HEADING_LENGTH * heading,
                      HEADING_HALF_WIDTH, pixel)
    return _compose([(obstacle, _OBSTACLE), (robot, _ROBOT), (marker, _HEADING)], spec)


def render_frames(states: np.ndarray, spec: EnvSpec) -> np.ndarray:
    """One frame per state, shape (n, frame_dim)."""
    states = np.atleast_2d(np.asarray(states, dtype=np.float64))
    draw = _pendulum_frames if spec.env_id == "pendulum" else _vehicle_frames
    if len(states) == 0:
        return np.zeros((0, spec.frame_dim))
    return np.concatenate(
        [draw(states[i : i + _CHUNK], spec) for i in range(0, len(states), _CHUNK)],
        axis=0,
    )


def render_batch(state_prev: np.ndarray, state_now: np.ndarray, spec: EnvSpec) -> np.ndarray:
    """Observations for a batch of (previous, current) states, (n, observation_dim)."""
    return np.concatenate(
        [render_frames(state_prev, spec), render_frames(state_now, spec)], axis=1
    )


def render(state_prev: np.ndarray, state_now: np.ndarray, spec: EnvSpec) -> np.ndarray:
    """Observation of a single transition: both frames, flattened."""
    return render_batch(np.atleast_2d(state_prev), np.atleast_2d(state_now), spec)[0]
