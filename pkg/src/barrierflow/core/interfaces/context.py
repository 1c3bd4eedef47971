import logging
import time
from contextlib import contextmanager
from typing import Any, Dict, Generator, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ...certify.margins import Margins
from ...config.settings import TrainConfig
from ...envs.buffer import DataBuffer
from ...nets.param_store import ParamStore
from ..optimizers.base_optimizer import BaseOptimizer

logger = logging.getLogger(__name__)

PHASE_WARM_START = 0
PHASE_TRAIN = 1
PHASE_INIT = 3


def iteration_rng(seed: int, phase: int, iteration: int) -> np.random.Generator:
    """Random stream of one iteration, independent of every earlier draw."""
    return np.random.default_rng(np.random.SeedSequence([seed, phase, iteration]))


class TrainingContext(BaseModel):
    """State shared by the steps of one training iteration.

    Steps read the run objects and write their results into ``metadata``,
    which is cleared at the start of every iteration.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: TrainConfig
    params: ParamStore
    buffer: DataBuffer
    margins: Margins
    optimizer: BaseOptimizer
    lmi_optimizer: BaseOptimizer
    iteration: int = 0
    lmi_feasible: bool = True
    converged: bool = False
    rng: Optional[np.random.Generator] = None
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @property
    def random(self) -> np.random.Generator:
        if self.rng is None:
            logger.error("Random stream accessed outside an iteration")
            raise ValueError("No active iteration")
        return self.rng

    @contextmanager
    def iteration_scope(self, iteration: int) -> Generator[None, None, None]:
        """Bind the iteration index and its random stream while steps run."""
        logger.debug("Entering iteration %d", iteration)
        self.iteration = iteration
        self.rng = iteration_rng(self.config.seed, PHASE_TRAIN, iteration)
        self.metadata = {"iteration": iteration, "started": time.perf_counter()}
        try:
            yield
            logger.debug("Iteration %d finished", iteration)
        except Exception as e:
            logger.error("Exception in iteration %d: %s", iteration, str(e))
            raise
        finally:
            self.rng = None
