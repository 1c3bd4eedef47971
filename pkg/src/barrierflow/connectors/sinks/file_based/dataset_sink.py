import logging
from pathlib import Path
from typing import List, Union

import numpy as np
import pandas as pd

from ....envs.buffer import DataBuffer

logger = logging.getLogger(__name__)


def frames_path(index_path: Union[str, Path]) -> Path:
    """Sidecar blob holding the float32 frames of a dataset index."""
    index_path = Path(index_path)
    return index_path.with_name(index_path.stem + ".frames.bin")


def record_columns(state_dim: int, action_dim: int) -> List[str]:
    columns = ["env_id"]
    for prefix in ("prev", "now", "next"):
        columns += [f"{prefix}_{i}" for i in range(state_dim)]
    columns += [f"action_{i}" for i in range(action_dim)]
    return columns + ["label", "origin", "obs_offset", "next_obs_offset", "frame_len"]


class DatasetSink:
    """Writes a DataBuffer as a CSV index plus a little-endian float32 frame blob.

    Each CSV row is one transition; ``obs_offset`` and ``next_obs_offset``
    count float32 elements into the sidecar blob.
    """

    def __init__(self, path: Union[str, Path]) -> None:
        self.path = Path(path)

    @property
    def node_id(self) -> str:
        return f"DatasetSink_{self.path}"

    def write(self, buffer: DataBuffer) -> Path:
        spec = buffer.spec
        n, length = len(buffer), spec.observation_dim
        columns = record_columns(spec.state_dim, spec.action_dim)
        values = {"env_id": [spec.env_id] * n}
        for prefix, states in (
            ("prev", buffer.state_prev),
            ("now", buffer.state_now),
            ("next", buffer.state_next),
        ):
            for i in range(spec.state_dim):
                values[f"{prefix}_{i}"] = states[:, i]
        for i in range(spec.action_dim):
            values[f"action_{i}"] = buffer.actions[:, i]
        values["label"] = buffer.labels.astype(int)
        values["origin"] = buffer.origins.astype(int)
        values["obs_offset"] = np.arange(n, dtype=np.int64) * 2 * length
        values["next_obs_offset"] = values["obs_offset"] + length
        values["frame_len"] = np.full(n, length, dtype=np.int64)

        self.path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(values, columns=columns).to_csv(
            self.path, index=False, float_format="%.17g"
        )
        frames = np.stack([buffer.observations, buffer.next_observations], axis=1)
        frames.astype("<f4").tofile(frames_path(self.path))
        logger.info("Exported %d %s records to %s", n, spec.env_id, self.path)
        return self.path
