"""Command-line entry point.

Exit codes: 0 success (trained and certified / verified), 1 verification
failure or unconverged run, 2 usage, configuration, file or environment
error, 3 divergence.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .certify.export import grid_export, latent_export
from .certify.report import report_lines, write_report, write_slacks
from .certify.verify import CertificateReport, verify
from .config.settings import OUTPUT_ENV_VAR, TrainConfig, load_config, output_directory, parse_config
from .connectors.sinks.file_based.trajectory_sink import TrajectorySink
from .connectors.sinks.stdout.print_sink import PrintSink
from .connectors.sources.file_based.dataset_source import DatasetSource
from .envs.labels import sample_region
from .envs.rollout import LatentPolicy, rollout_batch
from .errors import (
    BarrierFlowError,
    CheckpointError,
    ConfigError,
    DatasetFormatError,
    DivergenceError,
    EnvironmentMismatchError,
)
from .nets.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .train.trainer import DATASET_NAME, Trainer, train

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_DIVERGED = 0, 1, 2, 3

REPORT_NAME = "report.txt"
SLACKS_NAME = "slacks.csv"
TRAJECTORIES_NAME = "trajectories.csv"
ROLLOUT_SUMMARY_NAME = "rollout_summary.txt"
GRID_NAME = "grid.csv"
LATENTS_NAME = "latents.csv"


def configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def parse_grid(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid must be comma-separated integers, got {text!r}") from exc
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("grid resolutions must be positive")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="barrierflow",
        description="Train and verify visuomotor control barrier certificates",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="Increase log verbosity (-v info, -vv debug)")
    commands = parser.add_subparsers(dest="command", required=True)

    train_cmd = commands.add_parser("train", help="Warm start and train a certificate")
    train_cmd.add_argument("--config", required=True, help="YAML run configuration")
    train_cmd.add_argument("--out", default=None, help="Output directory")
    train_cmd.add_argument("--seed", type=int, default=None, help="Override the configured seed")
    train_cmd.add_argument("--resume", default=None, help="Checkpoint to continue from")

    verify_cmd = commands.add_parser("verify", help="Check a checkpoint's certificate")
    verify_cmd.add_argument("--checkpoint", required=True)
    verify_cmd.add_argument("--dataset", default=None,
                            help="Dataset index CSV (default: the one saved with the checkpoint)")
    verify_cmd.add_argument("--config", default=None, help="Override verification settings")
    verify_cmd.add_argument("--out", default=None)
    verify_cmd.add_argument("--seed", type=int, default=None)

    rollout_cmd = commands.add_parser("rollout", help="Simulate the learned policy")
    rollout_cmd.add_argument("--checkpoint", required=True)
    rollout_cmd.add_argument("--n", type=int, default=100, help="Number of trajectories")
    rollout_cmd.add_argument("--horizon", type=int, default=200)
    rollout_cmd.add_argument("--start-region", choices=["safe", "unsafe", "any"], default="safe")
    rollout_cmd.add_argument("--out", default=None)
    rollout_cmd.add_argument("--seed", type=int, default=None)

    export_cmd = commands.add_parser("export", help="Write barrier tables for plotting")
    export_cmd.add_argument("--checkpoint", required=True)
    export_cmd.add_argument("--grid", type=parse_grid, default=None,
                            help="Points per state axis, e.g. 41,41")
    export_cmd.add_argument("--dataset", default=None)
    export_cmd.add_argument("--out", default=None)
    return parser


def config_from_checkpoint(checkpoint: Checkpoint) -> TrainConfig:
    if not checkpoint.settings:
        raise CheckpointError("checkpoint does not carry its run configuration")
    try:
        return parse_config(checkpoint.settings)
    except ConfigError as exc:
        raise CheckpointError(f"stored run configuration is invalid: {exc}") from exc


def _with_seed(config: TrainConfig, seed: Optional[int]) -> TrainConfig:
    return config if seed is None else config.model_copy(update={"seed": seed})


def _certify(config: TrainConfig, checkpoint: Checkpoint, buffer, out_dir: Path,
             checkpoint_path: Path, seed: Optional[int] = None) -> CertificateReport:
    report, slacks = verify(checkpoint, buffer, config.verify, seed)
    write_report(report, out_dir / REPORT_NAME)
    write_slacks(slacks, out_dir / SLACKS_NAME, buffer)
    PrintSink().write_lines("Certificate", report_lines(report))
    certified = checkpoint.converged and report.certified
    if certified != checkpoint.certified:
        checkpoint.certified = certified
        save_checkpoint(checkpoint, checkpoint_path)
    return report


def cmd_train(args: argparse.Namespace) -> int:
    config = _with_seed(load_config(args.config), args.seed)
    out_dir = output_directory(config, args.out)
    trainer = Trainer(config, out_dir)
    result = trainer.resume(args.resume) if args.resume else train(config, out_dir)
    checkpoint = result.checkpoint
    _certify(config, checkpoint, result.buffer, out_dir, trainer.checkpoint_path)
    if not checkpoint.converged:
        logger.warning("Training stopped at iteration %d without converging", checkpoint.iteration)
    return EXIT_OK if checkpoint.converged and checkpoint.certified else EXIT_FAILED


def _artifact_directory(out: Optional[str], checkpoint_path: Path) -> Path:
    """--out, else $BARRIERFLOW_OUT, else the checkpoint's own directory."""
    if out:
        return Path(out)
    return Path(os.environ.get(OUTPUT_ENV_VAR) or checkpoint_path.parent)


def _dataset_path(checkpoint_path: Path, dataset: Optional[str]) -> Path:
    return Path(dataset) if dataset else checkpoint_path.parent / DATASET_NAME


def cmd_verify(args: argparse.Namespace) -> int:
    checkpoint_path = Path(args.checkpoint)
    checkpoint = load_checkpoint(checkpoint_path)
    config = config_from_checkpoint(checkpoint)
    if args.config:
        override = load_config(args.config)
        if override.env_id != config.env_id:
            raise EnvironmentMismatchError(
                f"configuration is for {override.env_id!r}, checkpoint for {config.env_id!r}"
            )
        config = config.model_copy(update={"verify": override.verify})
    buffer = DatasetSource(_dataset_path(checkpoint_path, args.dataset), config.env).read()
    out_dir = _artifact_directory(args.out, checkpoint_path)
    report, slacks = verify(checkpoint, buffer, config.verify, args.seed)
    write_report(report, out_dir / REPORT_NAME)
    write_slacks(slacks, out_dir / SLACKS_NAME, buffer)
    PrintSink().write_lines("Certificate", report_lines(report))
    return EXIT_OK if report.certified else EXIT_FAILED


def cmd_rollout(args: argparse.Namespace) -> int:
    if args.n < 0 or args.horizon < 0:
        raise ConfigError("invalid rollout request", fields=["--n and --horizon must be >= 0"])
    checkpoint_path = Path(args.checkpoint)
    checkpoint = load_checkpoint(checkpoint_path)
    config = config_from_checkpoint(checkpoint)
    spec = config.env
    seed = checkpoint.seed if args.seed is None else args.seed
    rng = np.random.default_rng(seed)
    starts = sample_region(args.start_region, args.n, spec, rng)
    trajectories = rollout_batch(LatentPolicy(checkpoint.params), starts, args.horizon, spec)

    out_dir = _artifact_directory(args.out, checkpoint_path)
    TrajectorySink(out_dir / TRAJECTORIES_NAME).write(trajectories, spec.state_dim)
    unsafe = [t for t in trajectories if not t.safe]
    summary = [
        f"env_id = {spec.env_id}",
        f"start_region = {args.start_region}",
        f"n_trajectories = {len(trajectories)}",
        f"horizon = {args.horizon}",
        f"n_unsafe_trajectories = {len(unsafe)}",
        f"n_unsafe_entries = {sum(t.unsafe_entries for t in trajectories)}",
    ]
    (out_dir / ROLLOUT_SUMMARY_NAME).write_text("\n".join(summary) + "\n")
    PrintSink().write_lines("Rollouts", summary)
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    checkpoint_path = Path(args.checkpoint)
    checkpoint = load_checkpoint(checkpoint_path)
    config = config_from_checkpoint(checkpoint)
    spec = config.env
    resolution = args.grid or [41] * spec.state_dim
    out_dir = _artifact_directory(args.out, checkpoint_path)
    out_dir.mkdir(parents=True, exist_ok=True)

    grid = grid_export(checkpoint.params, spec, resolution)
    grid.to_csv(out_dir / GRID_NAME, index=False, float_format="%.17g")
    dataset = _dataset_path(checkpoint_path, args.dataset)
    if dataset.is_file():
        buffer = DatasetSource(dataset, spec).read()
        latent_export(checkpoint.params, buffer).to_csv(
            out_dir / LATENTS_NAME, index=False, float_format="%.17g"
        )
    elif args.dataset:
        raise FileNotFoundError(f"dataset {dataset} does not exist")
    PrintSink().write_frame("Barrier grid", grid)
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "verify": cmd_verify,
    "rollout": cmd_rollout,
    "export": cmd_export,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CheckpointError, EnvironmentMismatchError, DatasetFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except BarrierFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
