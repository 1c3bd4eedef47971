import logging
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np
import pandas as pd

from ....envs.rollout import Trajectory

logger = logging.getLogger(__name__)


def trajectory_columns(state_dim: int) -> List[str]:
    return ["trajectory", "t", *[f"state_{i}" for i in range(state_dim)], "action", "barrier", "label"]


def trajectory_frame(trajectories: Sequence[Trajectory], state_dim: int) -> pd.DataFrame:
    """One row per visited state; the final state of each trajectory has no action."""
    columns = trajectory_columns(state_dim)
    frames = []
    for index, trajectory in enumerate(trajectories):
        steps = len(trajectory.states)
        values: Dict[str, np.ndarray] = {
            "trajectory": np.full(steps, index),
            "t": np.arange(steps),
        }
        for i in range(state_dim):
            values[f"state_{i}"] = trajectory.states[:, i]
        values["action"] = np.append(trajectory.actions, np.nan)
        values["barrier"] = (
            trajectory.barrier if trajectory.barrier is not None else np.full(steps, np.nan)
        )
        values["label"] = trajectory.labels.astype(int)
        frames.append(pd.DataFrame(values, columns=columns))
    if not frames:
        return pd.DataFrame(columns=columns)
    return pd.concat(frames, ignore_index=True)


class TrajectorySink:
    """Writes closed-loop trajectories as one CSV."""

    def __init__(self, path: Union[str, Path]) -> None:
        self.path = Path(path)

    @property
    def node_id(self) -> str:
        return f"TrajectorySink_{self.path}"

    def write(self, trajectories: Sequence[Trajectory], state_dim: int) -> Path:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        trajectory_frame(trajectories, state_dim).to_csv(
            self.path, index=False, float_format="%.17g"
        )
        logger.info("Wrote %d trajectories to %s", len(trajectories), self.path)
        return self.path
