import numpy as np
import pandas as pd

from barrierflow.connectors.sinks.file_based.trajectory_sink import TrajectorySink, trajectory_frame
from barrierflow.envs.rollout import Trajectory


def make_trajectory(steps: int) -> Trajectory:
    return Trajectory(
        states=np.arange(2.0 * (steps + 1)).reshape(steps + 1, 2),
        actions=np.full(steps, 0.5),
        labels=np.ones(steps + 1, dtype=np.int8),
        barrier=np.linspace(-1.0, 0.0, steps + 1),
    )


def test_one_row_per_visited_state():
    frame = trajectory_frame([make_trajectory(2), make_trajectory(0)], 2)
    assert list(frame.columns) == ["trajectory", "t", "state_0", "state_1", "action", "barrier", "label"]
    assert frame["trajectory"].tolist() == [0, 0, 0, 1]
    assert frame["t"].tolist() == [0, 1, 2, 0]
    assert np.isnan(frame["action"].iloc[2])
    assert frame["action"].iloc[0] == 0.5


def test_write_csv(tmp_path):
    path = TrajectorySink(tmp_path / "trajectories.csv").write([make_trajectory(3)], 2)
    assert len(pd.read_csv(path)) == 4


def test_no_trajectories():
    assert trajectory_frame([], 3).empty
