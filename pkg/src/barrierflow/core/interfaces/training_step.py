from abc import ABC, abstractmethod

from .context import TrainingContext


class TrainingStep(ABC):
    @property
    @abstractmethod
    def step_id(self) -> str:
        """Unique identifier for this step"""

    @abstractmethod
    def execute(self, context: TrainingContext) -> TrainingContext:
        """Run the step and return the updated context"""

    def validate(self, context: TrainingContext) -> bool:
        """Optional precondition hook"""
        return True
