import numpy as np
import pandas as pd

from barrierflow.connectors.sinks.file_based.dataset_sink import DatasetSink, frames_path, record_columns


def test_record_columns_order():
    assert record_columns(2, 1) == [
        "env_id", "prev_0", "prev_1", "now_0", "now_1", "next_0", "next_1",
        "action_0", "label", "origin", "obs_offset", "next_obs_offset", "frame_len",
    ]


def test_writes_index_and_frame_blob(buffer, tmp_path):
    path = DatasetSink(tmp_path / "data" / "dataset.csv").write(buffer)
    index = pd.read_csv(path)
    length = buffer.spec.observation_dim

    assert len(index) == len(buffer)
    assert set(index["env_id"]) == {"pendulum"}
    np.testing.assert_array_equal(index["obs_offset"], np.arange(len(buffer)) * 2 * length)
    blob = np.fromfile(frames_path(path), dtype="<f4")
    assert blob.size == 2 * length * len(buffer)
    np.testing.assert_array_equal(blob[length : 2 * length], buffer.next_observations[0])


def test_sidecar_name():
    assert frames_path("runs/dataset.csv").name == "dataset.frames.bin"
