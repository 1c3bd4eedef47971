import pandas as pd

from barrierflow.nets.checkpoint import load_checkpoint
from barrierflow.train.log import TRAINLOG_COLUMNS
from barrierflow.train.trainer import (
    CHECKPOINT_NAME,
    DATASET_NAME,
    TIMINGS_NAME,
    TRAINLOG_NAME,
    train,
)

from tests.helpers import tiny_config


def test_run_writes_artifacts(tmp_path):
    config = tiny_config(max_iterations=2)
    result = train(config, tmp_path)

    for name in (CHECKPOINT_NAME, DATASET_NAME, TRAINLOG_NAME, TIMINGS_NAME):
        assert (tmp_path / name).is_file()
    log = pd.read_csv(tmp_path / TRAINLOG_NAME)
    assert list(log.columns) == TRAINLOG_COLUMNS
    assert log["iteration"].tolist() == list(range(len(result.log)))

    checkpoint = load_checkpoint(tmp_path / CHECKPOINT_NAME)
    assert checkpoint.iteration == len(result.log)
    assert checkpoint.converged == result.converged
    assert not checkpoint.certified
    assert set(k.split(".")[0] for k in checkpoint.arrays) == {"adam", "lmi_adam"}
    if not result.converged:
        assert checkpoint.iteration == config.max_iterations


def test_periodic_checkpoints(tmp_path, monkeypatch):
    from barrierflow.train import trainer as trainer_module

    saved = []
    original = trainer_module.Trainer.save

    def recording_save(self, context, completed):
        saved.append(completed)
        return original(self, context, completed)

    monkeypatch.setattr(trainer_module.Trainer, "save", recording_save)
    result = train(tiny_config(max_iterations=2, checkpoint_every=1), tmp_path)
    if not result.converged:
        assert saved[:2] == [1, 2]
