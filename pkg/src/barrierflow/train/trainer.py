import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from ..certify.verify import lmi_status
from ..config.settings import TrainConfig, config_settings, parse_config
from ..connectors.sinks.file_based.dataset_sink import DatasetSink
from ..connectors.sources.file_based.dataset_source import DatasetSource
from ..core.interfaces.context import TrainingContext
from ..core.optimizers.adam import Adam
from ..core.pipeline.builder import Pipeline, PipelineBuilder
from ..envs.buffer import DataBuffer
from ..errors import CheckpointError
from ..nets.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .log import TrainLog
from .steps import (
    CollectRollouts,
    ConvergenceGate,
    LMIStep,
    PolyakStep,
    RefreshMargins,
    TotalLossStep,
    TrainLogSink,
)
from .warm_start import WarmStartResult, warm_start

logger = logging.getLogger(__name__)

CHECKPOINT_NAME = "checkpoint.sldc"
DATASET_NAME = "dataset.csv"
TRAINLOG_NAME = "trainlog.csv"
TIMINGS_NAME = "timings.csv"


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    log: TrainLog
    buffer: DataBuffer

    @property
    def converged(self) -> bool:
        return self.checkpoint.converged


def build_pipeline(log: TrainLog) -> Pipeline:
    """rollouts -> margins -> total loss -> LMI -> Polyak -> gate -> log."""
    return (
        PipelineBuilder()
        .set_source(CollectRollouts())
        .add_step(RefreshMargins())
        .add_step(TotalLossStep())
        .add_step(LMIStep())
        .add_step(PolyakStep())
        .add_step(ConvergenceGate())
        .set_sink(TrainLogSink(log))
        .build()
    )


class Trainer:
    """Runs the outer training loop and persists its artifacts.

    Attributes:
        config: Run configuration
        out_dir: Directory receiving the checkpoint, dataset and logs
    """

    def __init__(self, config: TrainConfig, out_dir: Union[str, Path]) -> None:
        self.config = config
        self.out_dir = Path(out_dir)
        self.log = TrainLog()
        self.pipeline = build_pipeline(self.log)

    @property
    def checkpoint_path(self) -> Path:
        return self.out_dir / CHECKPOINT_NAME

    def context_from(self, warm: WarmStartResult) -> TrainingContext:
        params = warm.params
        lmi_optimizer = Adam(
            [*params.barrier_weights(), params.lmi_free],
            self.config.lmi_lr,
            self.config.betas,
            self.config.eps,
        )
        return TrainingContext(
            config=self.config,
            params=params,
            buffer=warm.buffer,
            margins=warm.margins,
            optimizer=warm.optimizer,
            lmi_optimizer=lmi_optimizer,
        )

    def checkpoint(self, context: TrainingContext, completed: int) -> Checkpoint:
        arrays = {
            **context.optimizer.state_arrays("adam"),
            **context.lmi_optimizer.state_arrays("lmi_adam"),
        }
        return Checkpoint(
            env_id=self.config.env_id,
            params=context.params,
            margins=context.margins,
            seed=self.config.seed,
            iteration=completed,
            converged=context.converged,
            certified=False,
            settings=config_settings(self.config),
            arrays=arrays,
        )

    def save(self, context: TrainingContext, completed: int) -> Checkpoint:
        """Write the checkpoint, the dataset it was trained on and the log so far."""
        checkpoint = self.checkpoint(context, completed)
        save_checkpoint(checkpoint, self.checkpoint_path)
        DatasetSink(self.out_dir / DATASET_NAME).write(context.buffer)
        self.log.write_csv(self.out_dir / TRAINLOG_NAME)
        self.log.write_timings(self.out_dir / TIMINGS_NAME)
        return checkpoint

    def run(self, context: TrainingContext, start: int = 0) -> TrainResult:
        """Iterate from ``start`` until convergence or ``max_iterations``."""
        config = self.config
        completed = start
        for iteration in range(start, config.max_iterations):
            with context.iteration_scope(iteration):
                context = self.pipeline.execute(context)
                candidate = context.metadata["candidate"]
            completed = iteration + 1
            if context.converged:
                logger.info("Converged after %d iterations", completed)
                break
            periodic = config.checkpoint_every and completed % config.checkpoint_every == 0
            if candidate or periodic:
                self.save(context, completed)
        else:
            logger.warning(
                "Not converged after %d iterations; saving an uncertified checkpoint",
                config.max_iterations,
            )
        checkpoint = self.save(context, completed)
        return TrainResult(checkpoint=checkpoint, log=self.log, buffer=context.buffer)

    def resume(self, checkpoint_path: Union[str, Path]) -> TrainResult:
        """Continue a run from a checkpoint and the dataset saved next to it."""
        checkpoint_path = Path(checkpoint_path)
        checkpoint = load_checkpoint(checkpoint_path, expected_env=self.config.env_id)
        params = checkpoint.params
        buffer = DatasetSource(
            checkpoint_path.parent / DATASET_NAME, self.config.env, self.config.max_buffer_size
        ).read()
        optimizer = Adam(params.parameters(), self.config.lr, self.config.betas, self.config.eps)
        optimizer.load_state_arrays(checkpoint.arrays, "adam")
        context = self.context_from(WarmStartResult(params, buffer, checkpoint.margins, optimizer))
        context.lmi_optimizer.load_state_arrays(checkpoint.arrays, "lmi_adam")
        context.lmi_feasible = lmi_status(params, self.config.lipschitz_bound).feasible
        context.converged = checkpoint.converged

        previous = checkpoint_path.parent / TRAINLOG_NAME
        if previous.is_file():
            earlier = TrainLog.read_csv(previous)
            self.log.records = [r for r in earlier.records if r.iteration < checkpoint.iteration]
        logger.info("Resuming %s run at iteration %d", self.config.env_id, checkpoint.iteration)
        if checkpoint.converged:
            return TrainResult(checkpoint=checkpoint, log=self.log, buffer=buffer)
        return self.run(context, start=checkpoint.iteration)


def train(
    config: TrainConfig,
    out_dir: Union[str, Path],
    warm: Optional[WarmStartResult] = None,
) -> TrainResult:
    """Warm start (unless given) and run the outer loop; artifacts go to ``out_dir``."""
    trainer = Trainer(config, out_dir)
    warm = warm if warm is not None else warm_start(config)
    return trainer.run(trainer.context_from(warm))


def resume(checkpoint_path: Union[str, Path], out_dir: Optional[Union[str, Path]] = None) -> TrainResult:
    """Resume with the configuration stored in the checkpoint."""
    checkpoint_path = Path(checkpoint_path)
    settings = load_checkpoint(checkpoint_path).settings
    if not settings:
        raise CheckpointError(f"{checkpoint_path} does not carry its run configuration")
    config = parse_config(settings)
    trainer = Trainer(config, out_dir if out_dir is not None else checkpoint_path.parent)
    return trainer.resume(checkpoint_path)
