import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from ....envs.buffer import DataBuffer
from ....envs.labels import label_batch
from ....envs.spec import EnvSpec
from ....errors import DatasetFormatError, EnvironmentMismatchError
from ...sinks.file_based.dataset_sink import frames_path, record_columns

logger = logging.getLogger(__name__)


class DatasetSource:
    """Reads a dataset exported by :class:`DatasetSink` back into a DataBuffer."""

    def __init__(self, path: Union[str, Path], spec: EnvSpec, max_size: Optional[int] = None) -> None:
        self.path = Path(path)
        self.spec = spec
        self.max_size = max_size

    @property
    def node_id(self) -> str:
        return f"DatasetSource_{self.path}"

    def read(self) -> DataBuffer:
        blob = frames_path(self.path)
        if not self.path.is_file() or not blob.is_file():
            raise FileNotFoundError(f"dataset {self.path} or its frames {blob} is missing")
        frame = pd.read_csv(self.path)
        expected = record_columns(self.spec.state_dim, self.spec.action_dim)
        if list(frame.columns) != expected:
            raise DatasetFormatError(f"{self.path} columns do not match {self.spec.env_id} records")

        buffer = DataBuffer(self.spec, max_size=self.max_size)
        if frame.empty:
            return buffer
        env_ids = set(frame["env_id"].astype(str))
        if env_ids != {self.spec.env_id}:
            raise EnvironmentMismatchError(
                f"dataset holds {sorted(env_ids)} records, expected {self.spec.env_id!r}"
            )
        length = self.spec.observation_dim
        if (frame["frame_len"] != length).any():
            raise DatasetFormatError(
                f"frame length in {self.path} does not match the {self.spec.env_id} camera"
            )

        frames = np.fromfile(blob, dtype="<f4")
        obs_offsets = frame["obs_offset"].to_numpy(dtype=np.int64)
        next_offsets = frame["next_obs_offset"].to_numpy(dtype=np.int64)
        if min(obs_offsets.min(), next_offsets.min()) < 0:
            raise DatasetFormatError(f"{self.path} has negative frame offsets")
        if max(obs_offsets.max(), next_offsets.max()) + length > frames.size:
            raise DatasetFormatError(f"{blob} is shorter than its index")
        window = np.arange(length)
        observations = frames[obs_offsets[:, None] + window].astype(np.float32)
        next_observations = frames[next_offsets[:, None] + window].astype(np.float32)

        def states(prefix: str) -> np.ndarray:
            cols = [f"{prefix}_{i}" for i in range(self.spec.state_dim)]
            return frame[cols].to_numpy(dtype=np.float64)

        actions = frame[[f"action_{i}" for i in range(self.spec.action_dim)]].to_numpy(np.float64)
        labels = frame["label"].to_numpy(dtype=np.int8)
        # labels are a function of the current state
        derived = label_batch(states("now"), self.spec)
        mismatched = np.flatnonzero(labels != derived)
        if mismatched.size:
            raise DatasetFormatError(
                f"{self.path} has {mismatched.size} labels that disagree with their states, "
                f"first at record {int(mismatched[0])}"
            )
        origins = frame["origin"].to_numpy(dtype=np.int8)
        buffer.append_records(
            observations, actions, next_observations,
            states("prev"), states("now"), states("next"),
            labels, origins,
        )
        logger.info("Imported %d %s records from %s", len(buffer), self.spec.env_id, self.path)
        return buffer
