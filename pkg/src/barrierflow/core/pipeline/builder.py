import logging
from typing import List, Optional

from ..interfaces.context import TrainingContext
from ..interfaces.training_step import TrainingStep

logger = logging.getLogger(__name__)


class PipelineBuilder:
    """Constructs the linear chain of steps run once per outer iteration.

    Attributes:
        steps: Intermediate steps, run in insertion order
        source: First step (rollout collection)
        sink: Final step (log writer)
    """

    def __init__(self) -> None:
        self.steps: List[TrainingStep] = []
        self.source: Optional[TrainingStep] = None
        self.sink: Optional[TrainingStep] = None

    def set_source(self, source: TrainingStep) -> "PipelineBuilder":
        """Set the step that runs first.

        Args:
            source: Step implementing the TrainingStep interface

        Returns:
            PipelineBuilder instance for method chaining
        """
        self.source = source
        return self

    def add_step(self, step: TrainingStep) -> "PipelineBuilder":
        """Append an intermediate step.

        Args:
            step: Training step

        Returns:
            PipelineBuilder instance for method chaining
        """
        self.steps.append(step)
        return self

    def set_sink(self, sink: TrainingStep) -> "PipelineBuilder":
        """Set the step that runs last.

        Args:
            sink: Step recording the iteration's results

        Returns:
            PipelineBuilder instance for method chaining
        """
        self.sink = sink
        return self

    def build(self) -> "Pipeline":
        """Construct the configured pipeline.

        Returns:
            Fully configured Pipeline instance

        Raises:
            ValueError: If no source is configured or step ids repeat
        """
        if not self.source:
            raise ValueError("Pipeline source must be defined before building")
        chain = [self.source, *self.steps] + ([self.sink] if self.sink else [])
        ids = [step.step_id for step in chain]
        if len(set(ids)) != len(ids):
            raise ValueError(f"Pipeline step ids must be unique, got {ids}")
        return Pipeline(self.source, self.steps, self.sink)


class Pipeline:
    """One outer training iteration as a chain of steps.

    Attributes:
        source: First step
        steps: Sequence of intermediate steps
        sink: Final step (optional)
    """

    def __init__(
        self, source: TrainingStep, steps: List[TrainingStep], sink: Optional[TrainingStep]
    ) -> None:
        self.source = source
        self.steps = steps
        self.sink = sink

    @property
    def chain(self) -> List[TrainingStep]:
        return [self.source, *self.steps] + ([self.sink] if self.sink else [])

    def execute(self, context: TrainingContext) -> TrainingContext:
        """Run every step in order on ``context``.

        Returns:
            The context as left by the last step

        Raises:
            Exception: Any step failure, re-raised after logging
        """
        for step in self.chain:
            if not step.validate(context):
                raise ValueError(f"Step {step.step_id} rejected the context")
            logger.debug("Running step %s", step.step_id)
            try:
                context = step.execute(context)
            except Exception as e:
                logger.error("Step %s failed: %s", step.step_id, str(e))
                raise
            logger.debug("Step %s done", step.step_id)
        return context
