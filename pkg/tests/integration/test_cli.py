import pandas as pd
import pytest
import yaml

from barrierflow import cli
from barrierflow.config.settings import config_settings
from barrierflow.errors import DivergenceError
from barrierflow.nets.checkpoint import load_checkpoint

from tests.helpers import tiny_config


def write_config(path, **overrides):
    path.write_text(yaml.safe_dump(config_settings(tiny_config(**overrides))))
    return path


def report_values(path):
    pairs = (line.split(" = ", 1) for line in path.read_text().splitlines())
    return {key: value for key, value in pairs}


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    config = write_config(root / "run.yaml")
    out = root / "run"
    code = cli.main(["train", "--config", str(config), "--out", str(out)])
    return code, out


def test_train_exit_code_matches_certificate(trained):
    code, out = trained
    checkpoint = load_checkpoint(out / "checkpoint.sldc")
    report = report_values(out / "report.txt")
    assert (out / "slacks.csv").is_file()
    certified = checkpoint.converged and report["certified"] == "true"
    assert checkpoint.certified == certified
    assert code == (0 if certified else 1)


def test_verify_uses_saved_dataset(trained, tmp_path):
    _, out = trained
    code = cli.main(["verify", "--checkpoint", str(out / "checkpoint.sldc"), "--out", str(tmp_path)])
    report = report_values(tmp_path / "report.txt")
    assert code == (0 if report["certified"] == "true" else 1)
    slacks = pd.read_csv(tmp_path / "slacks.csv")
    assert list(slacks.columns) == ["condition", "record", "label", "slack"]


def test_rollout_command(trained, tmp_path):
    _, out = trained
    code = cli.main([
        "rollout", "--checkpoint", str(out / "checkpoint.sldc"),
        "--n", "2", "--horizon", "3", "--out", str(tmp_path),
    ])
    assert code == 0
    assert len(pd.read_csv(tmp_path / "trajectories.csv")) == 2 * 4
    assert "n_trajectories = 2" in (tmp_path / "rollout_summary.txt").read_text()


def test_export_command(trained, tmp_path):
    _, out = trained
    code = cli.main([
        "export", "--checkpoint", str(out / "checkpoint.sldc"), "--grid", "3,4", "--out", str(tmp_path),
    ])
    assert code == 0
    assert len(pd.read_csv(tmp_path / "grid.csv")) == 12
    assert (tmp_path / "latents.csv").is_file()


def test_environment_variable_sets_output(trained, tmp_path, monkeypatch):
    _, out = trained
    monkeypatch.setenv("BARRIERFLOW_OUT", str(tmp_path / "from_env"))
    cli.main(["export", "--checkpoint", str(out / "checkpoint.sldc"), "--grid", "2"])
    assert (tmp_path / "from_env" / "grid.csv").is_file()


def test_configuration_errors_exit_2(tmp_path):
    assert cli.main(["train", "--config", str(tmp_path / "missing.yaml")]) == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump({"env": "pendulum", "weights": {"xi1": -1}}))
    assert cli.main(["train", "--config", str(bad)]) == 2


def test_checkpoint_errors_exit_2(trained, tmp_path):
    _, out = trained
    broken = tmp_path / "broken.sldc"
    broken.write_bytes(b"garbage")
    assert cli.main(["verify", "--checkpoint", str(broken)]) == 2
    vehicle = write_config(tmp_path / "vehicle.yaml", env={"env_id": "vehicle", "frame_size": 8})
    assert cli.main([
        "verify", "--checkpoint", str(out / "checkpoint.sldc"), "--config", str(vehicle),
    ]) == 2
    assert cli.main([
        "verify", "--checkpoint", str(out / "checkpoint.sldc"), "--dataset", str(tmp_path / "none.csv"),
    ]) == 2


def test_wrong_grid_length_exits_2(trained, tmp_path):
    _, out = trained
    code = cli.main([
        "export", "--checkpoint", str(out / "checkpoint.sldc"), "--grid", "3,3,3", "--out", str(tmp_path),
    ])
    assert code == 2
    assert not (tmp_path / "grid.csv").exists()


def test_divergence_exits_3(tmp_path, monkeypatch):
    def diverge(config, out_dir):
        raise DivergenceError("total loss is not finite (nan)")

    monkeypatch.setattr(cli, "train", diverge)
    config = write_config(tmp_path / "run.yaml")
    assert cli.main(["train", "--config", str(config), "--out", str(tmp_path / "out")]) == 3


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as exc_info:
        cli.main(["export", "--checkpoint", "x", "--grid", "a,b"])
    assert exc_info.value.code == 2
